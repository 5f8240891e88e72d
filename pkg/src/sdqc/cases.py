"""Canonical constructions and seeded random instances.

The named cases are the ones every workflow can regenerate: the
symmetric two-point set, the half-disc plus point in its two solvable
phases, the non-cylindrical membership counterexample, and the
two-tensor hulls.
"""

from __future__ import annotations

import math

import numpy as np

from .planar import PlanarSet
from .tensors import SymMatrix

__all__ = [
    "TWO_POINT_P1",
    "TWO_POINT_Q1",
    "two_point_case",
    "circle_point_case_I",
    "circle_point_case_II",
    "non_cylindrical_case",
    "non_cylindrical_matrix",
    "two_matrix_case_full_rank",
    "two_matrix_case_deficient",
    "random_connected_set",
    "CASE_NAMES",
]

TWO_POINT_P1 = 0.5
TWO_POINT_Q1 = 1.0

CIRCLE_POINT_I = (0.0, 1.0, -3.0, 2.0)  # (p_c, r, p_d, q_d)
CIRCLE_POINT_II = (0.0, 1.0, 0.0, 3.0)

CASE_NAMES = (
    "two-point",
    "circle-point-I",
    "circle-point-II",
    "non-cylindrical",
    "two-matrix",
)


def two_point_case() -> PlanarSet:
    return PlanarSet(points=((-TWO_POINT_P1, TWO_POINT_Q1), (TWO_POINT_P1, TWO_POINT_Q1)))


def circle_point_case_I() -> tuple[PlanarSet, tuple[float, float, float, float]]:
    p_c, r, p_d, q_d = CIRCLE_POINT_I
    return PlanarSet(points=((p_d, q_d),), arcs=((p_c, r),)), CIRCLE_POINT_I


def circle_point_case_II() -> tuple[PlanarSet, tuple[float, float, float, float]]:
    p_c, r, p_d, q_d = CIRCLE_POINT_II
    return PlanarSet(points=((p_d, q_d),), arcs=((p_c, r),)), CIRCLE_POINT_II


def non_cylindrical_case() -> PlanarSet:
    return PlanarSet(points=((0.0, 0.0), (1.0, math.sqrt(3.0) / 2.0)))


def non_cylindrical_matrix() -> SymMatrix:
    return SymMatrix.diag(1.0, 0.25, 0.25)


def two_matrix_case_full_rank() -> tuple[SymMatrix, SymMatrix]:
    return SymMatrix.identity(3), SymMatrix(-np.eye(3))


def two_matrix_case_deficient() -> tuple[SymMatrix, SymMatrix]:
    return SymMatrix.diag(1.0, 1.0, 0.0), SymMatrix(np.zeros((3, 3)))


def random_connected_set(rng, max_points: int = 5) -> PlanarSet:
    """Random compact set whose hull is guaranteed connected.

    A full-width base segment on the q = 0 axis keeps the projection an
    interval, which is exactly the connectedness condition; a few points
    (and occasionally an arc) above it make the hull nontrivial.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    p_lo = float(rng.uniform(-2.0, 0.0))
    p_hi = float(p_lo + rng.uniform(1.0, 3.0))
    n_pts = int(rng.integers(2, max_points + 1))
    points = [
        (float(rng.uniform(p_lo, p_hi)), float(rng.uniform(0.2, 1.5)))
        for _ in range(n_pts)
    ]
    arcs = []
    if rng.uniform() < 0.3:
        r = float(rng.uniform(0.1, 0.4 * (p_hi - p_lo)))
        c = float(rng.uniform(p_lo + r, p_hi - r))
        arcs.append((c, r))
    return PlanarSet(
        points=tuple(points),
        segments=(((p_lo, 0.0), (p_hi, 0.0)),),
        arcs=tuple(arcs),
    )

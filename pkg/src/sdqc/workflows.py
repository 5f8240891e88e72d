"""Workflow layer shared by the command line and the test surface.

Each workflow returns plain data (regions, report dicts, verdicts) so
the CLI stays a thin argument-parsing shell and tests can exercise the
exact external interfaces: planar-set JSON in, region CSV / report JSON
/ SVG out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cases import (
    CIRCLE_POINT_I,
    CIRCLE_POINT_II,
    TWO_POINT_P1,
    TWO_POINT_Q1,
    circle_point_case_I,
    circle_point_case_II,
    non_cylindrical_case,
    non_cylindrical_matrix,
    two_matrix_case_deficient,
    two_matrix_case_full_rank,
    two_point_case,
)
from .curves import lamination_closure, two_matrix_hull
from .hull import (
    HullInfo,
    circle_point_hull,
    convex_hull,
    downward_closure,
    hsdqc,
    is_separable,
    slope_condition,
    two_point_hull,
)
from .ioutil import format_float
from .planar import PlanarSet, Region, column_deviation, hausdorff_distance
from .svgplot import hull_svg, profile_svg
from .tensors import SymMatrix, phi

__all__ = [
    "HullArtifacts",
    "compute_hull",
    "MembershipVerdict",
    "classify_membership",
    "oracle_compare",
    "example_artifacts",
]


@dataclass(frozen=True)
class HullArtifacts:
    h: PlanarSet
    hhat: Region
    conv: Region
    region: Region
    info: HullInfo
    slope_ok: bool

    def report(self) -> dict:
        return {
            "connected": self.info.connected,
            "slope_condition": self.slope_ok,
            "pmin": self.region.pmin,
            "pmax": self.region.pmax,
        }

    def svg(self, title: str = "hull") -> str:
        return hull_svg(self.h, self.hhat, self.conv, self.region, title=title)


def compute_hull(
    h: PlanarSet, n_grid: int = 512, tol: float | None = None
) -> HullArtifacts:
    hhat = downward_closure(h, n_grid)
    conv = convex_hull(hhat)
    region, info = hsdqc(h, n_grid=n_grid, tol=tol, full_output=True)
    slope_ok = slope_condition(region, hhat)
    return HullArtifacts(h=h, hhat=hhat, conv=conv, region=region, info=info, slope_ok=slope_ok)


@dataclass(frozen=True)
class MembershipVerdict:
    """Outcome of testing one stress tensor against a hull region.

    "member": the tensor is in the lifted hull (planar membership plus
    the boundary-slope condition).  "phi-member-only": only the
    invariant pair is certified inside the planar region; the tensor
    itself may still be outside the lifted hull.  "not-member": the
    invariant pair is separated, with a witness when available.
    """

    verdict: str
    phi_p: float
    phi_q: float
    slope_condition_held: bool
    witness: dict | None

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "phi": [self.phi_p, self.phi_q],
            "slope_condition_held": self.slope_condition_held,
            "witness": self.witness,
        }


def classify_membership(
    sigma: SymMatrix,
    h: PlanarSet,
    n_grid: int = 512,
    tol: float | None = None,
    artifacts: HullArtifacts | None = None,
) -> MembershipVerdict:
    if artifacts is None:
        artifacts = compute_hull(h, n_grid=n_grid, tol=tol)
    y = phi(sigma)
    inside = artifacts.region.contains(y.p, y.q)
    if inside:
        verdict = "member" if artifacts.slope_ok else "phi-member-only"
        witness = None
    else:
        verdict = "not-member"
        sep = is_separable(y, h, tol=tol, n_grid=n_grid)
        witness = sep.witness.as_dict() if sep.witness is not None else None
    return MembershipVerdict(
        verdict=verdict,
        phi_p=y.p,
        phi_q=y.q,
        slope_condition_held=artifacts.slope_ok,
        witness=witness,
    )


def oracle_compare(
    h: PlanarSet,
    n_grid: int = 256,
    n_directions: int = 720,
    tol: float | None = None,
) -> dict:
    """Separation-based hull versus the lamination fixpoint on one grid.

    The two constructions bracket the true hull from outside and inside;
    when the hull is connected they must agree within two grid steps.
    """
    region, info = hsdqc(h, n_grid=n_grid, tol=tol, full_output=True)
    inner, iterations = lamination_closure(
        h, n_grid=n_grid, n_directions=n_directions, tol=tol, full_output=True
    )
    step = region.step
    dev = column_deviation(region, inner)
    dh = hausdorff_distance(region, inner)
    within = dh <= 2.0 * step + 1e-12
    return {
        "grid_step": step,
        "column_deviation": dev,
        "hausdorff": dh,
        "connected": info.connected,
        "iterations": iterations,
        "within_tolerance": within,
    }


def _closed_form_summary(name: str, computed: Region, closed: Region, extra: dict) -> dict:
    dh = hausdorff_distance(computed, closed)
    step = computed.step
    out = {
        "name": name,
        "grid_step": step,
        "hausdorff_vs_closed_form": dh,
        "closed_form_matches": dh <= 2.0 * step + 1e-12,
    }
    out.update(extra)
    return out


def example_artifacts(name: str, n_grid: int = 512) -> tuple[dict, str, str]:
    """Regenerate a named construction: (report, csv, svg)."""
    if name == "two-point":
        h = two_point_case()
        art = compute_hull(h, n_grid=n_grid)
        closed = two_point_hull(TWO_POINT_P1, TWO_POINT_Q1, n_grid=n_grid)
        report = _closed_form_summary(
            name,
            art.region,
            closed,
            {
                "p1": TWO_POINT_P1,
                "q1": TWO_POINT_Q1,
                "psi_at_zero": art.region.psi_at(0.0),
                **art.report(),
            },
        )
        return report, art.region.to_csv(), art.svg(title=name)

    if name in ("circle-point-I", "circle-point-II"):
        if name == "circle-point-I":
            h, params = circle_point_case_I()
        else:
            h, params = circle_point_case_II()
        p_c, r, p_d, q_d = params
        art = compute_hull(h, n_grid=n_grid)
        result = circle_point_hull(p_c, r, p_d, q_d, n_grid=n_grid)
        extra = {
            "p_c": p_c,
            "r": r,
            "p_d": p_d,
            "q_d": q_d,
            "phase": result.label,
            **art.report(),
        }
        if result.tangency is not None:
            extra.update(
                {
                    "tangency_p0": result.tangency.p0,
                    "tangency_q0": result.tangency.q0,
                    "tangency_pt": result.tangency.p_t,
                }
            )
        if name == "circle-point-II":
            extra["equals_convex_hull"] = (
                column_deviation(art.region, art.conv) <= 2.0 * art.region.step
            )
        report = _closed_form_summary(name, art.region, result.region, extra)
        return report, art.region.to_csv(), art.svg(title=name)

    if name == "non-cylindrical":
        h = non_cylindrical_case()
        art = compute_hull(h, n_grid=n_grid)
        sigma = non_cylindrical_matrix()
        verdict = classify_membership(sigma, h, n_grid=n_grid, artifacts=art)
        # closed form: the wedge 0 <= q <= sqrt(3) p / 2 over [0, 1]
        closed = Region.from_function(
            0.0, 1.0, n_grid, lambda p: math.sqrt(3.0) / 2.0 * np.asarray(p)
        )
        report = _closed_form_summary(
            name,
            art.region,
            closed,
            {"membership": verdict.as_dict(), **art.report()},
        )
        return report, art.region.to_csv(), art.svg(title=name)

    if name == "two-matrix":
        a, b = two_matrix_case_full_rank()
        full = two_matrix_hull(a, b)
        ts = np.linspace(-1.0, 1.0, 201)
        witness = np.array([full.witness(t * np.eye(3)) for t in ts])
        expected = 3.0 * (1.0 - ts * ts)
        c, d = two_matrix_case_deficient()
        deficient = two_matrix_hull(c, d)
        report = {
            "name": name,
            "full_rank_kind": full.kind,
            "full_rank": full.rank,
            "deficient_kind": deficient.kind,
            "deficient_rank": deficient.rank,
            "witness_max_error": float(np.abs(witness - expected).max()),
        }
        csv = "t,witness\n" + "\n".join(
            f"{format_float(t)},{format_float(v)}" for t, v in zip(ts, witness)
        ) + "\n"
        svg = profile_svg(ts, witness, title=name, labels=("t", "witness"))
        return report, csv, svg

    raise KeyError(f"unknown example {name!r}")

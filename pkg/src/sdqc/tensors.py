"""Symmetric stress tensors and their pressure/shear invariants.

Arithmetic on real symmetric 2x2 and 3x3 matrices, the invariant map to
the (p, q) half-plane (mean pressure and Mises-type shear measure),
Tartar's nonconvex quadratic and its translated separators, and a
closed-form eigensolver for 3x3 symmetric matrices.

All types are immutable values and all functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SymMatrix",
    "PQPoint",
    "Direction",
    "phi",
    "tartar_f",
    "separator_value",
    "deviator_eigen",
    "eigen_sym3",
    "parse_matrix",
    "pq_of_array",
    "tartar_of_array",
]

SYMMETRY_TOL = 1e-9

# slope separating the two direction sectors on the unit circle
SECTOR_SLOPE = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class SymMatrix:
    """Real symmetric n x n matrix, n = 2 or 3.

    The constructor rejects input that is asymmetric beyond an absolute
    tolerance of 1e-9 (scaled by the matrix magnitude); asymmetric input
    is a user error in this domain, not something to silently average.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 3):
            raise ValueError(f"expected a 2x2 or 3x3 matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        scale = max(1.0, float(np.abs(a).max()))
        if float(np.abs(a - a.T).max()) > SYMMETRY_TOL * scale:
            raise ValueError("matrix is not symmetric within 1e-9")
        a = 0.5 * (a + a.T)  # remove roundoff-level asymmetry only
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def array(self) -> np.ndarray:
        return self.entries

    def trace(self) -> float:
        return float(np.trace(self.entries))

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def deviator(self) -> np.ndarray:
        a = self.entries
        return a - (np.trace(a) / a.shape[0]) * np.eye(a.shape[0])

    @classmethod
    def diag(cls, *values: float) -> "SymMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, dim: int = 3) -> "SymMatrix":
        return cls(np.eye(dim))

    def __array__(self, dtype=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class PQPoint:
    """A point of the invariant half-plane: pressure p, shear q >= 0."""

    p: float
    q: float

    def __post_init__(self):
        p = float(self.p)
        q = float(self.q)
        if not (math.isfinite(p) and math.isfinite(q)):
            raise ValueError("PQPoint coordinates must be finite")
        if q < 0.0:
            raise ValueError(f"q must be nonnegative, got {q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def as_tuple(self) -> tuple[float, float]:
        return (self.p, self.q)


@dataclass(frozen=True)
class Direction:
    """Unit direction in the (p, q) plane.

    The circle splits into the steep sector (|e2| >= sqrt(3)/2 |e1|,
    where rank-two curves are reflected straight lines) and the shallow
    sector (|e2| <= sqrt(3)/2 |e1|, where they are hyperbolas).  The two
    sectors overlap in four junction directions.
    """

    e1: float
    e2: float

    def __post_init__(self):
        e1 = float(self.e1)
        e2 = float(self.e2)
        r = math.hypot(e1, e2)
        if not math.isfinite(r) or abs(r - 1.0) > 1e-12:
            raise ValueError("direction must have unit norm within 1e-12")
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)

    @classmethod
    def from_angle(cls, theta: float) -> "Direction":
        return cls(math.cos(theta), math.sin(theta))

    @classmethod
    def of(cls, e1: float, e2: float) -> "Direction":
        """Normalize (e1, e2) and build a Direction."""
        r = math.hypot(e1, e2)
        if r == 0.0:
            raise ValueError("zero vector has no direction")
        return cls(e1 / r, e2 / r)

    @property
    def steep(self) -> bool:
        """True on the sector where the curve family is a reflected line."""
        return abs(self.e2) >= SECTOR_SLOPE * abs(self.e1) - 1e-15

    @property
    def shallow(self) -> bool:
        """True on the sector where the curve family is a hyperbola."""
        return abs(self.e2) <= SECTOR_SLOPE * abs(self.e1) + 1e-15

    def negated(self) -> "Direction":
        return Direction(-self.e1, -self.e2)


def _as_array(sigma) -> np.ndarray:
    if isinstance(sigma, SymMatrix):
        return sigma.entries
    return SymMatrix(np.asarray(sigma, dtype=float)).entries


def pq_of_array(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized invariants for stacked symmetric matrices (..., n, n).

    p = trace/n, q = |deviator| / sqrt(2).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    p = np.trace(a, axis1=-2, axis2=-1) / n
    dev = a - p[..., None, None] * np.eye(n)
    q = np.sqrt(np.sum(dev * dev, axis=(-2, -1)) / 2.0)
    return p, q


def tartar_of_array(a: np.ndarray) -> np.ndarray:
    """Vectorized Tartar quadratic (n-1)|s|^2 - (tr s)^2 on stacks."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1]
    tr = np.trace(a, axis1=-2, axis2=-1)
    return (n - 1) * np.sum(a * a, axis=(-2, -1)) - tr * tr


def phi(sigma) -> PQPoint:
    """Invariant map sigma -> (p, q).

    p is the mean pressure trace/n and q = |sigma - p Id| / sqrt(2) is
    the Mises-type shear invariant.  For n = 3 this satisfies
    |sigma|^2 = 2 q^2 + 3 p^2.
    """
    a = _as_array(sigma)
    p, q = pq_of_array(a)
    return PQPoint(float(p), float(q))


def tartar_f(sigma) -> float:
    """Tartar's quadratic (n-1)|sigma|^2 - (tr sigma)^2.

    Nonconvex, yet lower-semicontinuity-compatible with divergence-free
    symmetric fields; for n = 3 it equals 4 q^2 - 3 p^2 in invariants.
    """
    a = _as_array(sigma)
    return float(tartar_of_array(a))


def separator_value(y0: PQPoint, y: PQPoint) -> float:
    """Translated Tartar separator 4 (q^2 - q0^2) - 3 (p - p0)^2.

    Each member of this family lifts to a function of the stress tensor
    that cannot increase under admissible oscillations, which is what
    makes it usable as a separation certificate in the (p, q) plane.
    """
    return 4.0 * (y.q * y.q - y0.q * y0.q) - 3.0 * (y.p - y0.p) ** 2


def eigen_sym3(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a symmetric 3x3 matrix.

    Returns eigenvalues sorted ascending and the matrix of column
    eigenvectors.  Eigenvalues come from the trigonometric solution of
    the characteristic cubic of the deviator; eigenvectors from cross
    products of rows of (A - lambda I), with an explicit orthonormal
    completion when eigenvalues cluster.  Deterministic, no LAPACK.
    """
    a = np.array(a, dtype=float)
    a = 0.5 * (a + a.T)
    scale = float(np.abs(a).max())
    if scale == 0.0:
        return np.zeros(3), np.eye(3)
    b = a / scale

    m = np.trace(b) / 3.0
    k = b - m * np.eye(3)
    j2 = float(np.sum(k * k)) / 2.0
    if j2 < 1e-30:
        return np.full(3, m) * scale, np.eye(3)
    j3 = float(np.linalg.det(k))
    rho = 2.0 * math.sqrt(j2 / 3.0)
    r = 4.0 * j3 / rho**3
    r = min(1.0, max(-1.0, r))
    theta = math.acos(r) / 3.0
    w = m + rho * np.array(
        [
            math.cos(theta + 2.0 * math.pi / 3.0),
            math.cos(theta - 2.0 * math.pi / 3.0),
            math.cos(theta),
        ]
    )
    w.sort()

    gap_lo = w[1] - w[0]
    gap_hi = w[2] - w[1]
    # below this, cross-product null vectors of the clustered pair are
    # unreliable; build the clustered pair from the isolated vector
    cluster_tol = 1e-7

    if max(gap_lo, gap_hi) < cluster_tol:
        vecs = np.eye(3)
    elif min(gap_lo, gap_hi) < cluster_tol:
        iso = 0 if gap_lo > gap_hi else 2
        v_iso = _null_vector(b - w[iso] * np.eye(3))
        v_a = _any_perpendicular(v_iso)
        v_b = np.cross(v_iso, v_a)
        vecs = np.empty((3, 3))
        vecs[:, iso] = v_iso
        others = [i for i in range(3) if i != iso]
        vecs[:, others[0]] = v_a
        vecs[:, others[1]] = v_b
    else:
        vecs = np.column_stack([_null_vector(b - wi * np.eye(3)) for wi in w])
        # Gram-Schmidt polish, then restore a right-handed frame
        vecs[:, 1] -= vecs[:, 0] * (vecs[:, 0] @ vecs[:, 1])
        vecs[:, 1] /= np.linalg.norm(vecs[:, 1])
        vecs[:, 2] = np.cross(vecs[:, 0], vecs[:, 1])

    ortho_err = float(np.abs(vecs.T @ vecs - np.eye(3)).max())
    if ortho_err > 1e-10:
        raise ArithmeticError(f"eigenvector frame not orthonormal: {ortho_err:.3e}")
    return w * scale, vecs


def _null_vector(m: np.ndarray) -> np.ndarray:
    """Unit null vector of a (numerically) rank-2 symmetric 3x3 matrix."""
    c01 = np.cross(m[0], m[1])
    c02 = np.cross(m[0], m[2])
    c12 = np.cross(m[1], m[2])
    cands = np.array([c01, c02, c12])
    norms = np.linalg.norm(cands, axis=1)
    i = int(np.argmax(norms))
    if norms[i] < 1e-30:
        # matrix is (close to) rank one: any row is proportional to the
        # normal of the 2-plane of null vectors
        rows = np.linalg.norm(m, axis=1)
        j = int(np.argmax(rows))
        return _any_perpendicular(m[j] / rows[j])
    return cands[i] / norms[i]


def _any_perpendicular(v: np.ndarray) -> np.ndarray:
    k = int(np.argmin(np.abs(v)))
    e = np.zeros(3)
    e[k] = 1.0
    u = e - v * v[k]
    return u / np.linalg.norm(u)


def deviator_eigen(sigma) -> tuple[float, float, float]:
    """Ordered eigenvalues (ascending) of the deviator sigma - p Id, n = 3.

    They sum to zero and always satisfy lambda_1 <= -q/sqrt(3) and
    lambda_3 >= q/sqrt(3), the range needed to steer rank-two matrix
    paths through a prescribed tangent direction.
    """
    a = _as_array(sigma)
    if a.shape[0] != 3:
        raise ValueError("deviator_eigen requires a 3x3 matrix")
    p = np.trace(a) / 3.0
    w, _ = eigen_sym3(a - p * np.eye(3))
    return (float(w[0]), float(w[1]), float(w[2]))


def parse_matrix(text: str) -> SymMatrix:
    """Parse a row-major matrix literal: rows split by ';', entries by ','.

    Example: "1,0,0;0,0.25,0;0,0,0.25".
    """
    try:
        rows = [
            [float(x) for x in row.split(",")]
            for row in text.strip().split(";")
            if row.strip()
        ]
    except ValueError as exc:
        raise ValueError(f"cannot parse matrix literal {text!r}: {exc}") from None
    if not rows:
        raise ValueError("empty matrix literal")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix literal")
    return SymMatrix(np.array(rows, dtype=float))

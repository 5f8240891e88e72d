"""Hull construction in the (p, q) invariant plane.

The relaxed admissible region of an isotropic yield set H is built in
three steps: downward closure, planar convex hull, and removal of every
point that a translated Tartar separator 4(q^2 - q0^2) - 3(p - p0)^2
pushes strictly above the set.  The search over separators can be
restricted to the one-parameter family of hyperbolas through the query
point (plus their straight-line limits), which is decisive whenever the
resulting region is connected.

Also provides the boundary-slope test that upgrades membership in the
planar region to membership of full stress tensors, and closed forms
for the two canonical constructions (a symmetric two-point set, and a
half-disc plus an outlying point).
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .planar import (
    EmptySetError,
    PlanarSet,
    PrimitiveCloud,
    Region,
    convex_hull,
    downward_closure,
    max_quadratic,
    primitive_cloud,
)
from .tensors import PQPoint

__all__ = [
    "DomainError",
    "DegenerateTangencyError",
    "DisconnectedResultWarning",
    "SeparationWitness",
    "SeparationResult",
    "HullInfo",
    "is_separable",
    "hsdqc",
    "slope_condition",
    "two_point_psi",
    "two_point_hull",
    "CirclePointResult",
    "Tangency",
    "circle_point_hull",
    "worker_count",
]

SEPARATOR_SAMPLES = 256
SEP_TOL_FACTOR = 1e-9
SLOPE_BOUND = math.sqrt(3.0) / 4.0
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class DomainError(ValueError):
    """Raised when closed-form constructions leave their parameter domain."""


class DegenerateTangencyError(ArithmeticError):
    """Raised when the tangency solve admits no geometrically valid root."""


class DisconnectedResultWarning(UserWarning):
    """The separation-based region is disconnected: outer bound only."""


def worker_count() -> int:
    """Worker cap for per-column parallelism, from SDQC_THREADS (default 1)."""
    try:
        n = int(os.environ.get("SDQC_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, n)


# ----------------------------------------------------------------------
# separation


@dataclass(frozen=True)
class SeparationWitness:
    """Certificate separating a point from the closure of a set.

    kind "hyperbola": value(p, q) = 4(q^2 - q0^2) - 3(p - p0)^2, which is
    <= -margin on the set and 0 at the separated point.
    kind "affine": value(p, q) = b p + c q + d with c >= 0, which is
    <= -margin on the set and > 0 at the separated point.
    """

    kind: str
    params: tuple
    margin: float

    def value(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if self.kind == "hyperbola":
            p0, q0 = self.params
            return 4.0 * (q * q - q0 * q0) - 3.0 * (p - p0) ** 2
        b, c, d = self.params
        return b * p + c * q + d

    def as_dict(self) -> dict:
        if self.kind == "hyperbola":
            p0, q0 = self.params
            return {"kind": "hyperbola", "p0": p0, "q0": q0, "margin": self.margin}
        b, c, d = self.params
        return {"kind": "affine", "b": b, "c": c, "d": d, "margin": self.margin}


@dataclass(frozen=True)
class SeparationResult:
    separable: bool
    witness: SeparationWitness | None

    def __bool__(self) -> bool:
        return self.separable


def _separator_coeffs(p0, q0):
    """Coefficient arrays of 4(q^2-q0^2)-3(p-p0)^2 for the max kernel."""
    p0 = np.asarray(p0, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    return 4.0, -3.0, 6.0 * p0, -(3.0 * p0 * p0 + 4.0 * q0 * q0)


def _through_family(p_star: float, q_star: float, t: np.ndarray):
    """Hyperbola centers (p0, q0) whose curve passes through the point.

    t ranges over [-sqrt(3) q*, sqrt(3) q*]; the endpoints degenerate to
    the two limiting V-lines of slope sqrt(3)/2 through the point.
    """
    q0 = np.sqrt(np.clip(q_star * q_star - t * t / 3.0, 0.0, None))
    p0 = p_star - (2.0 / 3.0) * t
    return p0, q0


def _family_max_batch(
    cloud: PrimitiveCloud, p_star: np.ndarray, q_star: np.ndarray, t: np.ndarray
) -> np.ndarray:
    """Max of the through-point separators over the set, batched.

    p_star, q_star have shape (M,) and t shape (M,) or (M, S); the
    result matches the shape of t.  Batches are chunked so intermediate
    arrays stay small.
    """
    p_star = np.asarray(p_star, dtype=float)
    q_star = np.asarray(q_star, dtype=float)
    t = np.asarray(t, dtype=float)
    squeeze = t.ndim == 1
    if squeeze:
        t = t[:, None]
    m, s = t.shape
    out = np.empty((m, s))
    n_prims = max(cloud.pts.shape[0] + 4 * cloud.segs.shape[0], 1)
    chunk = max(1, int(4_000_000 // max(s * n_prims, 1)))
    for i0 in range(0, m, chunk):
        sl = slice(i0, min(i0 + chunk, m))
        q0 = np.sqrt(
            np.clip(q_star[sl, None] ** 2 - t[sl] ** 2 / 3.0, 0.0, None)
        )
        p0 = p_star[sl, None] - (2.0 / 3.0) * t[sl]
        cq, cp, bp, c0 = _separator_coeffs(p0, q0)
        out[sl] = max_quadratic(cloud, cq, cp, bp, c0)
    return out[:, 0] if squeeze else out


def _margins_batch(
    cloud: PrimitiveCloud,
    p_star: np.ndarray,
    q_star: np.ndarray,
    refine: bool = True,
    samples: int = SEPARATOR_SAMPLES,
) -> tuple[np.ndarray, np.ndarray]:
    """Best separation margin of each point, over the through family.

    Returns (margin, t_best): margin is -min over the family of the set
    maximum (positive means strictly separable), t_best is the family
    parameter achieving it.  A coarse scan of ``samples`` parameters is
    sharpened by a vectorized golden-section pass around the per-point
    minimizer; the margin function has kinks where the attaining
    primitive changes, which the coarse scan alone would smear by a
    grid-step-sized amount.
    """
    p_star = np.asarray(p_star, dtype=float)
    q_star = np.asarray(q_star, dtype=float)
    m = p_star.size
    t_lim = math.sqrt(3.0) * q_star
    frac = np.linspace(-1.0, 1.0, samples)
    t = t_lim[:, None] * frac[None, :]
    maxf = _family_max_batch(cloud, p_star, q_star, t)
    k = np.argmin(maxf, axis=1)
    rows = np.arange(m)
    best_val = maxf[rows, k]
    best_t = t[rows, k]

    if refine:
        span = t_lim * (2.0 / (samples - 1))
        a = np.maximum(best_t - span, -t_lim)
        b = np.minimum(best_t + span, t_lim)
        active = span > 0.0
        x1 = b - GOLDEN * (b - a)
        x2 = a + GOLDEN * (b - a)
        f1 = _family_max_batch(cloud, p_star, q_star, x1)
        f2 = _family_max_batch(cloud, p_star, q_star, x2)
        for _ in range(30):
            take1 = f1 <= f2
            b = np.where(take1, x2, b)
            a = np.where(take1, a, x1)
            x1n = np.where(take1, b - GOLDEN * (b - a), x2)
            x2n = np.where(take1, x1, a + GOLDEN * (b - a))
            probe = np.where(take1, x1n, x2n)
            fp = _family_max_batch(cloud, p_star, q_star, probe)
            f1, f2 = np.where(take1, fp, f2), np.where(take1, f1, fp)
            x1, x2 = x1n, x2n
        ref_t = np.where(f1 <= f2, x1, x2)
        ref_val = np.minimum(f1, f2)
        improved = active & (ref_val < best_val)
        best_val = np.where(improved, ref_val, best_val)
        best_t = np.where(improved, ref_t, best_t)
    return -best_val, best_t


def _best_separator(
    cloud: PrimitiveCloud,
    p_star: float,
    q_star: float,
    refine: bool = True,
) -> tuple[float, float, float]:
    """Best achievable separation margin from the through-point family.

    Returns (margin, p0, q0) where margin = -max over the set of the
    separator anchored at (p0, q0); positive margin means the point sits
    strictly above every admissible oscillation level.
    """
    margin, t_best = _margins_batch(
        cloud, np.array([p_star]), np.array([q_star]), refine=refine
    )
    p0, q0 = _through_family(p_star, q_star, t_best)
    return float(margin[0]), float(p0[0]), float(q0[0])


def _affine_witness(conv: Region, p_star: float, q_star: float, tol: float):
    """Supporting-line certificate when the point leaves the convex hull."""
    if p_star > conv.pmax + tol:
        margin = p_star - conv.pmax
        return SeparationWitness("affine", (1.0, 0.0, -conv.pmax - margin / 2.0), margin / 2.0)
    if p_star < conv.pmin - tol:
        margin = conv.pmin - p_star
        return SeparationWitness("affine", (-1.0, 0.0, conv.pmin - margin / 2.0), margin / 2.0)
    i = conv.column_index(p_star)
    top = conv.psi[i]
    if not np.isfinite(top) or q_star <= top + tol:
        return None
    # slope of the concave envelope near the column, evaluated from the
    # hull edge the column lies on
    grid, psi = conv.grid, conv.psi
    if conv.grid.size == 1:
        m = 0.0
    elif i + 1 < grid.size and p_star >= grid[i]:
        m = (psi[i + 1] - psi[i]) / conv.step if np.isfinite(psi[i + 1]) else 0.0
    else:
        m = (psi[i] - psi[i - 1]) / conv.step if np.isfinite(psi[i - 1]) else 0.0
    # q - (m p + c) with the line through the supporting edge
    c = float(psi[i] - m * grid[i])
    margin = q_star - (m * p_star + c)
    if margin <= tol:
        return None
    return SeparationWitness("affine", (-m, 1.0, -c - margin / 2.0), margin / 2.0)


def is_separable(
    y_star: PQPoint,
    h: PlanarSet,
    tol: float | None = None,
    n_grid: int = 512,
) -> SeparationResult:
    """Decide whether a point can be strictly separated from the set.

    Two witness families are searched: affine functions nondecreasing in
    q (equivalent to leaving the convex hull of the downward closure),
    and the one-parameter family of separator hyperbolas through the
    query point together with its V-line limits.  Separation requires a
    margin above ``tol`` (default 1e-9 times the hull diameter); points
    on the boundary are therefore declared members.
    """
    hhat = downward_closure(h, n_grid)
    conv = convex_hull(hhat)
    scale = _diameter(conv)
    if tol is None:
        tol = SEP_TOL_FACTOR * scale

    aff = _affine_witness(conv, y_star.p, y_star.q, tol)
    if aff is not None:
        return SeparationResult(True, aff)

    cloud = primitive_cloud(h, n_grid)
    margin, p0, q0 = _best_separator(cloud, y_star.p, y_star.q)
    if margin > tol:
        return SeparationResult(
            True, SeparationWitness("hyperbola", (p0, q0), margin)
        )
    return SeparationResult(False, None)


def _diameter(conv: Region) -> float:
    top = float(np.nanmax(conv.psi)) if np.any(conv.defined) else 0.0
    return math.hypot(conv.pmax - conv.pmin, top) or 1.0


# ----------------------------------------------------------------------
# the hull region


@dataclass(frozen=True)
class HullInfo:
    connected: bool
    gap_columns: np.ndarray
    tol: float
    iterations: int = 0


def _column_envelopes(
    cloud: PrimitiveCloud,
    p_cols: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    tol: float,
    bisect_iters: int = 42,
    workers: int = 1,
) -> np.ndarray:
    """Largest non-separable height per grid column, batched.

    Separability is monotone in q along a column (a separator for a
    point also separates everything above it), so per-column bisection
    between the closure height and the convex-hull height applies; all
    columns advance one bisection level per batch.
    """

    def solve(p_c: np.ndarray, lo_c: np.ndarray, hi_c: np.ndarray) -> np.ndarray:
        out = np.maximum(lo_c, 0.0)
        margin_hi, _ = _margins_batch(cloud, p_c, hi_c)
        keep = margin_hi <= tol
        out = np.where(keep, hi_c, out)
        active = ~keep & (hi_c > lo_c + 1e-15)
        if np.any(active):
            a = np.maximum(lo_c[active], 0.0)
            b = hi_c[active]
            pa = p_c[active]
            for _ in range(bisect_iters):
                mid = 0.5 * (a + b)
                margin, _ = _margins_batch(cloud, pa, mid)
                sep = margin > tol
                b = np.where(sep, mid, b)
                a = np.where(sep, a, mid)
            out[active] = a
        return out

    if workers > 1 and p_cols.size >= 4 * workers:
        chunks = np.array_split(np.arange(p_cols.size), workers)
        out = np.empty_like(lo)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(
                lambda idx: solve(p_cols[idx], lo[idx], hi[idx]), chunks
            )
            for idx, res in zip(chunks, results):
                out[idx] = res
        return out
    return solve(p_cols, lo, hi)


def hsdqc(
    h: PlanarSet,
    n_grid: int = 512,
    tol: float | None = None,
    p_range: tuple[float, float] | None = None,
    workers: int | None = None,
    full_output: bool = False,
):
    """Region of all hull points of the set in the invariant plane.

    Grid points of the convex hull of the downward closure survive iff
    no separator hyperbola through them clears the whole set with a
    positive margin.  Points (p, 0) with p inside the projection
    interval are members outright.  The result is downward closed and
    squeezed between the downward closure and its convex hull.

    When the projection of the computed region has gaps the region is
    only an outer bound; a DisconnectedResultWarning is emitted and the
    ``full_output`` info records the gap columns.
    """
    hhat = downward_closure(h, n_grid, p_range)
    conv = convex_hull(hhat)
    cloud = primitive_cloud(h, n_grid)
    if tol is None:
        tol = SEP_TOL_FACTOR * _diameter(conv)

    grid = conv.grid
    psi = np.full(grid.size, np.nan)
    defined = conv.defined
    hat_psi = np.where(np.isfinite(hhat.psi), hhat.psi, 0.0)

    cols = np.flatnonzero(defined)
    n_workers = worker_count() if workers is None else max(1, workers)
    psi[cols] = _column_envelopes(
        cloud,
        grid[cols],
        hat_psi[cols],
        conv.psi[cols],
        tol,
        workers=n_workers,
    )

    # projection/connectedness probe: a column is a gap when even its
    # base point (p, 0) is strictly separated (the q* = 0 family is the
    # single cone 4 q^2 - 3 (p - p_i)^2)
    margin0, _ = _margins_batch(
        cloud, grid[cols], np.zeros(cols.size), refine=False
    )
    gap_columns = cols[margin0 > tol]
    connected = _gaps_connected(gap_columns)
    region = Region(grid, psi)
    info = HullInfo(connected=connected, gap_columns=gap_columns, tol=tol)
    if not connected:
        warnings.warn(
            "computed region has a disconnected projection; returning the "
            "separation-based outer bound only",
            DisconnectedResultWarning,
        )
    if full_output:
        return region, info
    return region


def _gaps_connected(gap_columns: np.ndarray) -> bool:
    """Gaps wider than one grid step mean a disconnected projection."""
    if gap_columns.size < 2:
        return True
    runs = np.split(gap_columns, np.where(np.diff(gap_columns) > 1)[0] + 1)
    return all(len(r) < 2 for r in runs)


# ----------------------------------------------------------------------
# boundary slope test


def slope_condition(
    region: Region,
    hhat: Region,
    tol: float = 1e-6,
) -> bool:
    """Check the boundary-tangent bound |dq/dp| <= sqrt(3)/4 off the closure.

    Evaluated by finite differences between adjacent envelope nodes;
    edges whose endpoints both lie in the downward closure are exempt.
    When the test passes, planar membership characterizes full tensor
    membership; when it fails only the invariant pair is certified.
    """
    if region.grid.shape != hhat.grid.shape or not np.allclose(region.grid, hhat.grid):
        raise ValueError("region and closure must share a grid")
    psi = region.psi
    mask = region.defined
    if region.grid.size < 2:
        return True
    step = region.step
    qtol = max(1e-12, 2.0 * tol * _diameter(region))
    in_hat = mask & np.isfinite(hhat.psi) & (psi <= hhat.psi + qtol)
    ok = True
    for i in range(region.grid.size - 1):
        if not (mask[i] and mask[i + 1]):
            continue
        if in_hat[i] and in_hat[i + 1]:
            continue
        slope = abs(psi[i + 1] - psi[i]) / step
        if slope > SLOPE_BOUND + tol + 2.0 * qtol / step:
            ok = False
            break
    return ok


# ----------------------------------------------------------------------
# closed forms


def two_point_psi(p, p1: float, q1: float):
    """Envelope sqrt(q1^2 + 3/4 (p^2 - p1^2)) of the two-point hull."""
    p = np.asarray(p, dtype=float)
    return np.sqrt(q1 * q1 + 0.75 * (p * p - p1 * p1))


def two_point_set(p1: float, q1: float) -> PlanarSet:
    return PlanarSet(points=((-p1, q1), (p1, q1)))


def two_point_hull(p1: float, q1: float, n_grid: int = 512) -> Region:
    """Closed-form hull of H = {(-p1, q1), (p1, q1)}.

    Requires 0 < p1 < 2 q1 / sqrt(3); beyond that the envelope would
    leave the real line before reaching p = 0.
    """
    if not (p1 > 0.0 and q1 > 0.0):
        raise DomainError("two_point_hull requires p1 > 0 and q1 > 0")
    if p1 >= 2.0 * q1 / math.sqrt(3.0):
        raise DomainError(
            "two_point_hull requires p1 < 2 q1 / sqrt(3); the envelope "
            "degenerates otherwise"
        )
    return Region.from_function(-p1, p1, n_grid, lambda p: two_point_psi(p, p1, q1))


@dataclass(frozen=True)
class Tangency:
    """Separator hyperbola through the outlying point, tangent to the disc."""

    p0: float
    q0: float
    p_t: float
    q_t: float


@dataclass(frozen=True)
class CirclePointResult:
    label: str  # "I", "II" or "other"
    region: Region | None
    tangency: Tangency | None


def circle_point_set(p_c: float, r: float, p_d: float, q_d: float) -> PlanarSet:
    return PlanarSet(points=((p_d, q_d),), arcs=((p_c, r),))


def solve_tangency(
    p_c: float, r: float, p_d: float, q_d: float, tol: float = 1e-9
) -> Tangency:
    """Hyperbola through D = (p_d, q_d) tangent to the half-disc boundary.

    Writing u = p_d - p_c and shifting p by p_c, the center abscissa p0
    solves 3 p0^2 - 14 u p0 + 7 u^2 - 28/3 (q_d^2 - r^2) = 0 (the
    double-root condition of the intersection quadratic); the tangency
    abscissa is p_t = 3 p0 / 7.  Roots failing q0^2 >= 0 or p_t inside
    the disc are rejected.
    """
    u = p_d - p_c
    a, b, c = 3.0, -14.0 * u, 7.0 * u * u - (28.0 / 3.0) * (q_d * q_d - r * r)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise DegenerateTangencyError("tangency quadratic has no real root")
    sq = math.sqrt(disc)
    scale = max(1.0, abs(u), r, q_d)
    best = None
    for p0s in ((-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)):
        q0sq = q_d * q_d - 0.75 * (u - p0s) ** 2
        p_ts = 3.0 * p0s / 7.0
        if q0sq < -tol * scale * scale:
            continue
        if not (-r - tol * scale <= p_ts <= r + tol * scale):
            continue
        q_tsq = r * r - p_ts * p_ts
        cand = Tangency(
            p0=p_c + p0s,
            q0=math.sqrt(max(q0sq, 0.0)),
            p_t=p_c + p_ts,
            q_t=math.sqrt(max(q_tsq, 0.0)),
        )
        if best is None or cand.q0 > best.q0:
            best = cand
    if best is None:
        raise DegenerateTangencyError(
            "no tangency root with q0^2 >= 0 and contact inside the disc"
        )
    return best


def classify_circle_point(p_c: float, r: float, p_d: float, q_d: float) -> str:
    """Phase of the half-disc + point configuration.

    "I": the point lies left of the disc between the two critical
    slope-sqrt(3)/2 rays, so a unique tangent hyperbola caps the hull.
    "II": the point sits so high that no separator can cut the convex
    hull, which is then the full answer.  Everything else is "other".
    """
    s = math.sqrt(3.0) / 2.0
    p_x = p_c - math.sqrt(7.0 / 3.0) * r
    p_y = p_c + math.sqrt(7.0 / 3.0) * r
    q_z = math.sqrt(7.0) / 2.0 * r
    if q_d - q_z >= s * abs(p_d - p_c):
        return "II"
    if p_d < p_c - r and s * abs(p_d - p_x) < q_d < s * abs(p_d - p_y):
        return "I"
    return "other"


def circle_point_hull(
    p_c: float, r: float, p_d: float, q_d: float, n_grid: int = 512
) -> CirclePointResult:
    """Closed-form hull of a half-disc plus one outlying point.

    Region I returns the disc capped by the unique tangent hyperbola
    from the point; region II returns the convex hull of the downward
    closure; other configurations are reported unclassified with no
    region.
    """
    if r <= 0.0:
        raise DomainError("disc radius must be positive")
    if q_d < 0.0:
        raise DomainError("the point must lie in the upper half-plane")
    if (p_d - p_c) ** 2 + q_d * q_d <= r * r:
        raise DomainError("the point must lie outside the closed disc")

    label = classify_circle_point(p_c, r, p_d, q_d)
    if label == "II":
        hhat = downward_closure(circle_point_set(p_c, r, p_d, q_d), n_grid)
        return CirclePointResult("II", convex_hull(hhat), None)
    if label != "I":
        return CirclePointResult("other", None, None)

    tan = solve_tangency(p_c, r, p_d, q_d)

    def psi(p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        hyp = np.sqrt(
            np.clip(tan.q0 * tan.q0 + 0.75 * (p - tan.p0) ** 2, 0.0, None)
        )
        circ = np.sqrt(np.clip(r * r - (p - p_c) ** 2, 0.0, None))
        return np.where(p <= tan.p_t, hyp, circ)

    region = Region.from_function(p_d, p_c + r, n_grid, psi)
    return CirclePointResult("I", region, tan)

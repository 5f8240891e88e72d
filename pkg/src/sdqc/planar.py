"""Planar sets in the (p, q) half-plane and gridded upper-envelope regions.

A compact input set is a finite union of points, segments and upper
half-circle arcs centered on the q = 0 axis.  Hull computations
discretize such sets into a Region: a uniform p-grid carrying an upper
envelope psi, with the convention that the region is the union of the
vertical segments {p_i} x [0, psi_i].  Columns where the set is empty
carry psi = NaN.

Also provides the shared evaluation kernel used by both the separation
search and the lamination oracle: the exact maximum of a quadratic
c_q q^2 + c_p p^2 + b_p p + c_0 over the primitives of a set, optionally
restricted to a half-plane in p.  Along a segment the quadratic is a
univariate parabola, so its maximum is closed form; arcs are handled
through a fixed sampling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .tensors import PQPoint

__all__ = [
    "EmptySetError",
    "SchemaError",
    "Arc",
    "PlanarSet",
    "Region",
    "PrimitiveCloud",
    "primitive_cloud",
    "downward_closure",
    "convex_hull",
    "max_quadratic",
    "hausdorff_distance",
    "column_deviation",
]

ARC_MIN_SAMPLES = 64
DEFAULT_GRID = 512


class EmptySetError(ValueError):
    """Raised when a planar set has no primitives."""


class SchemaError(ValueError):
    """Raised when a serialized planar set violates its schema."""


@dataclass(frozen=True)
class Arc:
    """Upper half circle of given radius centered at (center_p, 0)."""

    center_p: float
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.center_p) and math.isfinite(self.radius)):
            raise ValueError("arc parameters must be finite")
        if self.radius <= 0.0:
            raise ValueError("arc radius must be positive")


@dataclass(frozen=True)
class PlanarSet:
    """Compact subset of the closed upper half-plane q >= 0.

    Stored as primitives: isolated points, straight segments and upper
    half-circle arcs.  Must contain at least one primitive; all
    coordinates finite (boundedness stands in for compactness).
    """

    points: tuple = ()
    segments: tuple = ()
    arcs: tuple = ()

    def __post_init__(self):
        pts = tuple(_as_pq(x) for x in self.points)
        segs = tuple((_as_pq(a), _as_pq(b)) for a, b in self.segments)
        arcs = tuple(
            a if isinstance(a, Arc) else Arc(*a) for a in self.arcs
        )
        if not (pts or segs or arcs):
            raise EmptySetError("planar set needs at least one primitive")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "arcs", arcs)

    def p_extent(self) -> tuple[float, float]:
        lo, hi = math.inf, -math.inf
        for pt in self.points:
            lo, hi = min(lo, pt.p), max(hi, pt.p)
        for a, b in self.segments:
            lo, hi = min(lo, a.p, b.p), max(hi, a.p, b.p)
        for arc in self.arcs:
            lo = min(lo, arc.center_p - arc.radius)
            hi = max(hi, arc.center_p + arc.radius)
        return lo, hi

    def q_max(self) -> float:
        top = 0.0
        for pt in self.points:
            top = max(top, pt.q)
        for a, b in self.segments:
            top = max(top, a.q, b.q)
        for arc in self.arcs:
            top = max(top, arc.radius)
        return top

    # -- JSON schema ----------------------------------------------------
    # {"points": [[p, q], ...],
    #  "segments": [[[p, q], [p, q]], ...],
    #  "arcs": [{"center": [p, 0], "radius": r, "half": "upper"}, ...]}

    def to_json_dict(self) -> dict:
        return {
            "points": [[pt.p, pt.q] for pt in self.points],
            "segments": [[[a.p, a.q], [b.p, b.q]] for a, b in self.segments],
            "arcs": [
                {"center": [arc.center_p, 0.0], "radius": arc.radius, "half": "upper"}
                for arc in self.arcs
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PlanarSet":
        if not isinstance(data, dict):
            raise SchemaError("planar set JSON must be an object")
        unknown = set(data) - {"points", "segments", "arcs"}
        if unknown:
            raise SchemaError(f"unknown keys in planar set JSON: {sorted(unknown)}")
        try:
            points = [tuple(map(float, p)) for p in data.get("points", [])]
            segments = [
                (tuple(map(float, a)), tuple(map(float, b)))
                for a, b in data.get("segments", [])
            ]
            arcs = []
            for spec in data.get("arcs", []):
                if set(spec) - {"center", "radius", "half"}:
                    raise SchemaError(f"unknown arc keys: {sorted(set(spec))}")
                if spec.get("half", "upper") != "upper":
                    raise SchemaError("only upper half arcs are supported")
                cp, cq = map(float, spec["center"])
                if cq != 0.0:
                    raise SchemaError("arc center must lie on the q = 0 axis")
                arcs.append(Arc(cp, float(spec["radius"])))
        except SchemaError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise SchemaError(f"malformed planar set JSON: {exc}") from None
        try:
            return cls(points=tuple(points), segments=tuple(segments), arcs=tuple(arcs))
        except EmptySetError:
            raise
        except ValueError as exc:
            raise SchemaError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "PlanarSet":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
        return cls.from_json_dict(data)


def _as_pq(x) -> PQPoint:
    if isinstance(x, PQPoint):
        return x
    p, q = x
    return PQPoint(float(p), float(q))


@dataclass(frozen=True)
class Region:
    """Vertically downward-closed region as an upper envelope on a grid.

    grid holds N uniform p-samples, psi the envelope height per sample
    (NaN marks columns not belonging to the region).  Membership of a
    point is decided against the nearest column.
    """

    grid: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        s = np.array(self.psi, dtype=float)
        if g.ndim != 1 or g.shape != s.shape or g.size == 0:
            raise ValueError("grid and psi must be matching 1-d arrays")
        if not np.all(np.isfinite(g)):
            raise ValueError("grid must be finite")
        if np.any(s[np.isfinite(s)] < -1e-15):
            raise ValueError("psi must be nonnegative where defined")
        np.clip(s, 0.0, None, out=s)
        g.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "psi", s)

    @property
    def pmin(self) -> float:
        return float(self.grid[0])

    @property
    def pmax(self) -> float:
        return float(self.grid[-1])

    @property
    def step(self) -> float:
        if self.grid.size < 2:
            return 0.0
        return float(self.grid[1] - self.grid[0])

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.psi)

    def column_index(self, p: float) -> int:
        if self.grid.size == 1:
            return 0
        i = int(round((p - self.pmin) / self.step))
        return min(max(i, 0), self.grid.size - 1)

    def psi_at(self, p: float) -> float:
        """Envelope height at the nearest grid column (NaN if undefined)."""
        return float(self.psi[self.column_index(p)])

    def contains(self, p: float, q: float, tol: float | None = None) -> bool:
        """Membership of (p, q) against the nearest column, within tol.

        Default tolerance is one grid step (half a step of horizontal
        snap plus comparable vertical slack).
        """
        if tol is None:
            tol = self.step if self.grid.size > 1 else 1e-12
        if q < -tol:
            return False
        if p < self.pmin - tol or p > self.pmax + tol:
            return False
        h = self.psi[self.column_index(p)]
        return bool(np.isfinite(h) and q <= h + tol)

    def interp(self, p: np.ndarray) -> np.ndarray:
        """Linear interpolation of the envelope (NaN columns propagate)."""
        return np.interp(p, self.grid, self.psi)

    @classmethod
    def from_function(cls, pmin: float, pmax: float, n: int, fn) -> "Region":
        grid = np.linspace(pmin, pmax, n)
        return cls(grid, np.asarray(fn(grid), dtype=float))

    # -- CSV ------------------------------------------------------------

    def to_csv(self) -> str:
        lines = ["p,psi"]
        for p, s in zip(self.grid, self.psi):
            lines.append(f"{p:.17g},{s:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Region":
        rows = [ln for ln in text.strip().splitlines()]
        if not rows or rows[0].strip() != "p,psi":
            raise SchemaError("region CSV must start with header 'p,psi'")
        grid, psi = [], []
        for ln in rows[1:]:
            a, b = ln.split(",")
            grid.append(float(a))
            psi.append(float(b))
        return cls(np.array(grid), np.array(psi))


# ----------------------------------------------------------------------
# primitive cloud and the exact quadratic-maximum kernel


@dataclass(frozen=True)
class PrimitiveCloud:
    """Point-like samples plus exact segments of a planar set.

    Arcs are expanded into samples at construction; segments are kept
    exact because quadratics restrict to closed-form parabolas on them.
    """

    pts: np.ndarray  # (Np, 2)
    segs: np.ndarray  # (Ns, 4) rows (pa, qa, pb, qb)


def primitive_cloud(h: PlanarSet, n_grid: int = DEFAULT_GRID) -> PrimitiveCloud:
    lo, hi = h.p_extent()
    width = max(hi - lo, 1e-30)
    pts: list[tuple[float, float]] = [(pt.p, pt.q) for pt in h.points]
    for arc in h.arcs:
        count = max(ARC_MIN_SAMPLES, math.ceil(n_grid * arc.radius / width))
        ang = np.linspace(0.0, math.pi, count + 1)
        pts.extend(
            zip(arc.center_p + arc.radius * np.cos(ang), arc.radius * np.sin(ang))
        )
    segs = [(a.p, a.q, b.p, b.q) for a, b in h.segments]
    return PrimitiveCloud(
        pts=np.asarray(pts, dtype=float).reshape(-1, 2),
        segs=np.asarray(segs, dtype=float).reshape(-1, 4),
    )


def max_quadratic(
    cloud: PrimitiveCloud,
    cq,
    cp,
    bp,
    c0,
    p_lo: float = -math.inf,
    p_hi: float = math.inf,
) -> np.ndarray:
    """Exact max of Q(p, q) = cq q^2 + cp p^2 + bp p + c0 over a cloud.

    The coefficient arguments may be arrays of a common shape B; the
    result has shape B and holds the maximum over all primitives whose
    p lies in [p_lo, p_hi] (-inf where nothing qualifies).  Segment
    maxima are solved in closed form on the clipped parameter interval.
    """
    cq = np.asarray(cq, dtype=float)
    cp, bp, c0 = np.broadcast_arrays(
        np.asarray(cp, dtype=float), np.asarray(bp, dtype=float), np.asarray(c0, dtype=float)
    )
    cq = np.broadcast_to(cq, cp.shape)
    out = np.full(cp.shape, -np.inf)

    if cloud.pts.size:
        p = cloud.pts[:, 0]
        q = cloud.pts[:, 1]
        keep = (p >= p_lo) & (p <= p_hi)
        if np.any(keep):
            p = p[keep]
            q = q[keep]
            vals = (
                cq[..., None] * q * q
                + cp[..., None] * p * p
                + bp[..., None] * p
                + c0[..., None]
            )
            out = np.maximum(out, vals.max(axis=-1))

    if cloud.segs.size:
        pa, qa, pb, qb = cloud.segs.T
        # clip the s-interval of each segment to the half-plane
        dp = pb - pa
        with np.errstate(divide="ignore", invalid="ignore"):
            s_at_lo = np.where(dp != 0.0, (p_lo - pa) / dp, np.nan)
            s_at_hi = np.where(dp != 0.0, (p_hi - pa) / dp, np.nan)
        s0 = np.zeros_like(pa)
        s1 = np.ones_like(pa)
        fwd = dp >= 0.0
        lo_s = np.where(fwd, s_at_lo, s_at_hi)
        hi_s = np.where(fwd, s_at_hi, s_at_lo)
        nz = dp != 0.0
        s0 = np.where(nz, np.maximum(s0, np.where(np.isnan(lo_s), 0.0, lo_s)), s0)
        s1 = np.where(nz, np.minimum(s1, np.where(np.isnan(hi_s), 1.0, hi_s)), s1)
        # vertical segments are in or out as a whole
        inside_vert = (pa >= p_lo) & (pa <= p_hi)
        valid = np.where(nz, s0 <= s1, inside_vert)
        if np.any(valid):
            pa, qa, pb, qb = (v[valid] for v in (pa, qa, pb, qb))
            s0, s1 = s0[valid], s1[valid]
            dp = pb - pa
            dq = qb - qa
            # Q(s) = a2 s^2 + a1 s + a0 along the segment
            a2 = cq[..., None] * dq * dq + cp[..., None] * dp * dp
            a1 = (
                2.0 * cq[..., None] * qa * dq
                + 2.0 * cp[..., None] * pa * dp
                + bp[..., None] * dp
            )
            a0 = (
                cq[..., None] * qa * qa
                + cp[..., None] * pa * pa
                + bp[..., None] * pa
                + c0[..., None]
            )
            v0 = a2 * s0 * s0 + a1 * s0 + a0
            v1 = a2 * s1 * s1 + a1 * s1 + a0
            best = np.maximum(v0, v1)
            with np.errstate(divide="ignore", invalid="ignore"):
                s_v = -a1 / (2.0 * a2)
            interior = (a2 < 0.0) & (s_v > s0) & (s_v < s1)
            if np.any(interior):
                v_v = a0 - a1 * a1 / (4.0 * a2)
                best = np.where(interior, np.maximum(best, v_v), best)
            out = np.maximum(out, best.max(axis=-1))

    return out


# ----------------------------------------------------------------------
# downward closure and convex hull on the grid


def downward_closure(
    h: PlanarSet,
    n_grid: int = DEFAULT_GRID,
    p_range: tuple[float, float] | None = None,
) -> Region:
    """Fill every point of the set vertically down to the q = 0 axis.

    Discretizes onto a uniform grid spanning the p-projection of the set
    (or the explicit p_range).  Points snap to the nearest column, with
    psi taken as the max; segments contribute their exact height at each
    column they cross; arcs contribute their exact height per column.
    """
    if n_grid < 2:
        raise ValueError("n_grid must be at least 2")
    lo, hi = h.p_extent()
    if p_range is not None:
        rlo, rhi = p_range
        if rlo > lo + 1e-15 or rhi < hi - 1e-15:
            raise ValueError("p_range must contain the set projection")
        lo, hi = float(rlo), float(rhi)
    if hi - lo < 1e-15:
        # degenerate projection: a single column
        grid = np.array([lo])
        psi = np.array([h.q_max()])
        return Region(grid, psi)

    grid = np.linspace(lo, hi, n_grid)
    step = grid[1] - grid[0]
    psi = np.full(n_grid, np.nan)

    def snap(p: float) -> int:
        return min(max(int(round((p - lo) / step)), 0), n_grid - 1)

    def raise_to(i: int, q: float):
        if not np.isfinite(psi[i]) or q > psi[i]:
            psi[i] = q

    for pt in h.points:
        raise_to(snap(pt.p), pt.q)
    for arc in h.arcs:
        # exact column heights over the covered span
        i0 = snap(arc.center_p - arc.radius)
        i1 = snap(arc.center_p + arc.radius)
        idx = np.arange(i0, i1 + 1)
        height_sq = arc.radius**2 - (grid[idx] - arc.center_p) ** 2
        for i, hsq in zip(idx, height_sq):
            raise_to(int(i), math.sqrt(max(hsq, 0.0)))
    for a, b in h.segments:
        pa, qa, pb, qb = a.p, a.q, b.p, b.q
        raise_to(snap(pa), qa)
        raise_to(snap(pb), qb)
        if abs(pb - pa) > 1e-15:
            i0, i1 = sorted((snap(min(pa, pb)), snap(max(pa, pb))))
            idx = np.arange(i0, i1 + 1)
            pcols = grid[idx]
            inside = (pcols >= min(pa, pb) - 1e-15) & (pcols <= max(pa, pb) + 1e-15)
            s = (pcols[inside] - pa) / (pb - pa)
            qcols = qa + s * (qb - qa)
            for i, q in zip(idx[inside], qcols):
                raise_to(int(i), float(q))
    return Region(grid, psi)


def convex_hull(region: Region) -> Region:
    """Convex hull of a downward-closed region, as a new upper envelope.

    Equals the least concave majorant of the defined envelope samples,
    evaluated on the same grid; the result is fully defined between the
    first and last populated column and remains downward closed.
    """
    mask = region.defined
    if not np.any(mask):
        raise EmptySetError("region has no defined columns")
    xs = region.grid[mask]
    ys = region.psi[mask]
    if xs.size == 1:
        return Region(region.grid.copy(), region.psi.copy())

    # upper hull by monotone chain (points already sorted by p)
    hull_x: list[float] = []
    hull_y: list[float] = []
    for x, y in zip(xs, ys):
        while len(hull_x) >= 2:
            x1, y1 = hull_x[-2], hull_y[-2]
            x2, y2 = hull_x[-1], hull_y[-1]
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) >= 0.0:
                hull_x.pop()
                hull_y.pop()
            else:
                break
        # drop duplicated abscissae, keeping the higher point
        if hull_x and abs(x - hull_x[-1]) < 1e-30:
            if y > hull_y[-1]:
                hull_x[-1], hull_y[-1] = x, y
            continue
        hull_x.append(x)
        hull_y.append(y)

    psi = np.full(region.grid.size, np.nan)
    inside = (region.grid >= xs[0] - 1e-15) & (region.grid <= xs[-1] + 1e-15)
    psi[inside] = np.interp(region.grid[inside], hull_x, hull_y)
    return Region(region.grid, psi)


# ----------------------------------------------------------------------
# set distances


def _envelope_points(region: Region) -> np.ndarray:
    mask = region.defined
    return np.column_stack([region.grid[mask], region.psi[mask]])


def _dist_to_region(points: np.ndarray, region: Region) -> np.ndarray:
    """Distance from each point to the union of columns of a region."""
    mask = region.defined
    gp = region.grid[mask]
    gs = region.psi[mask]
    dp = points[:, 0:1] - gp[None, :]
    dq = np.maximum(points[:, 1:2] - gs[None, :], 0.0)
    d = np.sqrt(dp * dp + dq * dq)
    return d.min(axis=1)


def hausdorff_distance(a: Region, b: Region) -> float:
    """Hausdorff distance between two downward-closed gridded regions.

    For such regions the supremum of the point-to-set distance is
    attained on the upper envelope, so only envelope samples enter.
    """
    pa = _envelope_points(a)
    pb = _envelope_points(b)
    if pa.size == 0 or pb.size == 0:
        raise EmptySetError("cannot compare an empty region")
    return float(max(_dist_to_region(pa, b).max(), _dist_to_region(pb, a).max()))


def column_deviation(a: Region, b: Region) -> float:
    """Max per-column envelope deviation of two regions on one grid."""
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid, b.grid):
        raise ValueError("regions must share a grid")
    da, db = a.defined, b.defined
    dev = 0.0
    both = da & db
    if np.any(both):
        dev = float(np.abs(a.psi[both] - b.psi[both]).max())
    only_a = da & ~db
    if np.any(only_a):
        dev = max(dev, float(a.psi[only_a].max()))
    only_b = db & ~da
    if np.any(only_b):
        dev = max(dev, float(b.psi[only_b].max()))
    return dev

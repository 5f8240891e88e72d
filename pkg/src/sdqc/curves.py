"""Rank-two curve families, their tensor-level lifts and the lamination oracle.

Segments of symmetric matrices whose endpoints differ by a rank-deficient
matrix project to a two-parameter family of curves in the (p, q) plane:
reflected straight lines of slope at least sqrt(3)/2 ("V-lines") and the
hyperbolas q^2 = q0^2 + 3/4 (p - p0)^2.  Through every point with q > 0
there is exactly one such curve per unit direction, matching continuously
at the four junction directions (+-2/sqrt7, +-sqrt3/sqrt7).

The lamination closure iterates a simple rule: a point joins the set as
soon as one of its curves meets the current set on both sides.  It is an
inner bound for the separation-based hull and agrees with it, up to grid
resolution, whenever that hull is connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .hull import SEP_TOL_FACTOR, _diameter
from .planar import (
    PlanarSet,
    PrimitiveCloud,
    Region,
    convex_hull,
    downward_closure,
    max_quadratic,
    primitive_cloud,
)
from .tensors import Direction, PQPoint, SymMatrix, eigen_sym3, pq_of_array

__all__ = [
    "DegenerateBaseError",
    "SlopeOutOfRangeError",
    "NotConvergedError",
    "RankTwoCurve",
    "GammaCurve",
    "MatrixPath",
    "gamma",
    "lift_line",
    "lift_through_matrix",
    "lamination_closure",
    "TwoMatrixHull",
    "two_matrix_hull",
]

SECTOR_SLOPE = math.sqrt(3.0) / 2.0
TANGENT_SLOPE = math.sqrt(3.0) / 4.0
DEFAULT_DIRECTIONS = 720
GOLDEN_SECTION = (math.sqrt(5.0) - 1.0) / 2.0


class DegenerateBaseError(ValueError):
    """Curve construction through a point on the q = 0 axis."""


class SlopeOutOfRangeError(ValueError):
    """Requested tangent slope exceeds sqrt(3)/4, unreachable by lifts."""


class NotConvergedError(RuntimeError):
    """Lamination fixpoint did not stabilize within max_iter sweeps."""

    def __init__(self, iterations: int):
        super().__init__(f"lamination closure not converged after {iterations} sweeps")
        self.iterations = iterations


@dataclass(frozen=True)
class RankTwoCurve:
    """Graph of a planar rank-two curve.

    kind "vline": q = slope |p - p0| with slope >= sqrt(3)/2 (math.inf
    denotes the vertical line p = p0).
    kind "hyperbola": q^2 = q0^2 + 3/4 (p - p0)^2.
    orientation is the sign of increasing natural parameter in p.
    """

    kind: str
    p0: float
    slope: float = math.nan
    q0: float = math.nan
    orientation: int = 1

    def __post_init__(self):
        if self.kind == "vline":
            if not (self.slope >= SECTOR_SLOPE - 1e-12):
                raise ValueError("vline slope must be at least sqrt(3)/2")
        elif self.kind == "hyperbola":
            if not (self.q0 >= 0.0):
                raise ValueError("hyperbola apex height must be nonnegative")
        else:
            raise ValueError(f"unknown curve kind {self.kind!r}")

    def graph_q(self, p):
        """Height of the curve graph over abscissa p."""
        p = np.asarray(p, dtype=float)
        if self.kind == "hyperbola":
            return np.sqrt(self.q0 * self.q0 + 0.75 * (p - self.p0) ** 2)
        if math.isinf(self.slope):
            return np.where(p == self.p0, 0.0, np.inf)
        return self.slope * np.abs(p - self.p0)


def _arc_speed(s, q0: float):
    """Euclidean speed of the natural parametrization of a hyperbola."""
    s = np.asarray(s, dtype=float)
    num = 4.0 * q0 * q0 + (7.0 / 3.0) * s * s
    den = 9.0 * q0 * q0 + 3.0 * s * s
    out = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 7.0 / 9.0)
    return np.sqrt(out)


@dataclass(frozen=True)
class GammaCurve:
    """Arc-length parametrized rank-two curve through a base point.

    point_at(0) is the base point, the unit tangent there is the chosen
    direction, and point_at respects point_at(t; e) == point_at(-t; -e).
    """

    y: PQPoint
    e: Direction
    curve: RankTwoCurve
    s_base: float = 0.0  # natural parameter of the base point (hyperbola)

    def point_at(self, t: float) -> PQPoint:
        if self.curve.kind == "vline":
            p = self.y.p + self.e.e1 * t
            q = abs(self.y.q + self.e.e2 * t)
            return PQPoint(p, q)
        s = self._natural_parameter(float(t))
        p = self.curve.p0 + (2.0 / 3.0) * s
        q = math.sqrt(self.curve.q0**2 + s * s / 3.0)
        return PQPoint(p, q)

    def points_at(self, ts) -> np.ndarray:
        return np.array([(pt.p, pt.q) for pt in map(self.point_at, np.atleast_1d(ts))])

    def _natural_parameter(self, t: float) -> float:
        """Invert the signed arc length to the natural parameter."""
        q0 = self.curve.q0
        sgn = 1.0 if self.e.e1 > 0 else -1.0
        target = sgn * t
        s = self.s_base + target / _arc_speed(self.s_base, q0)
        for _ in range(60):
            length, _ = quad(lambda u: _arc_speed(u, q0), self.s_base, s, limit=200)
            err = length - target
            if abs(err) < 1e-13 * (1.0 + abs(target)):
                break
            s -= err / float(_arc_speed(s, q0))
        return s


def gamma(y: PQPoint, e: Direction, sector: str = "auto") -> GammaCurve:
    """Rank-two curve through y with unit tangent e at the base point.

    Steep directions (|e2| >= sqrt(3)/2 |e1|) give the reflected line
    through y; shallow ones give the member of the hyperbola family
    tangent to e at y.  At the four junction directions both
    constructions produce the same graph; ``sector`` can force one.
    """
    if y.q <= 0.0:
        raise DegenerateBaseError(
            "curves through the q = 0 axis are handled by the projection rule"
        )
    if sector == "auto":
        sector = "steep" if e.steep else "shallow"
    if sector == "steep":
        if not e.steep:
            raise ValueError("direction is not in the steep sector")
        if abs(e.e1) < 1e-300:
            curve = RankTwoCurve("vline", p0=y.p, slope=math.inf,
                                 orientation=1 if e.e2 > 0 else -1)
        else:
            m = e.e2 / e.e1
            curve = RankTwoCurve(
                "vline",
                p0=y.p - y.q / m,
                slope=abs(m),
                orientation=1 if e.e1 > 0 else -1,
            )
        return GammaCurve(y=y, e=e, curve=curve)
    if sector == "shallow":
        if not e.shallow:
            raise ValueError("direction is not in the shallow sector")
        t_star = 2.0 * y.q * e.e2 / e.e1
        radicand = y.q * y.q - t_star * t_star / 3.0
        if radicand < 1e-14 * y.q * y.q:
            # junction directions cancel the radicand only to machine
            # precision; snap so both constructions share one graph
            radicand = 0.0
        q0 = math.sqrt(max(radicand, 0.0))
        p0 = y.p - (2.0 / 3.0) * t_star
        curve = RankTwoCurve(
            "hyperbola", p0=p0, q0=q0, orientation=1 if e.e1 > 0 else -1
        )
        return GammaCurve(y=y, e=e, curve=curve, s_base=t_star)
    raise ValueError(f"unknown sector {sector!r}")


# ----------------------------------------------------------------------
# tensor-level lifts


@dataclass(frozen=True)
class MatrixPath:
    """Affine path of symmetric matrices t -> base + t * direction."""

    base: np.ndarray = field(repr=False)
    direction: np.ndarray = field(repr=False)
    g: np.ndarray | None = field(default=None, repr=False)

    def at(self, t: float) -> SymMatrix:
        return SymMatrix(self.base + t * self.direction)

    def phi_at(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        mats = self.base[None, :, :] + t[:, None, None] * self.direction[None, :, :]
        p, q = pq_of_array(mats)
        return np.column_stack([p, q])


def lift_line(y: PQPoint, curve: RankTwoCurve) -> MatrixPath:
    """Diagonal matrix path whose invariant image traces the curve graph.

    Along the path the matrix difference between any two parameters has
    rank at most two.
    """
    p0 = curve.p0
    if curve.kind == "hyperbola":
        base = np.diag([p0 + curve.q0, p0 - curve.q0, p0])
        direction = np.diag([1.0, 1.0, 0.0])
        return MatrixPath(base, direction)
    if math.isinf(curve.slope):
        base = p0 * np.eye(3)
        direction = np.diag([1.0, -1.0, 0.0])
        return MatrixPath(base, direction)
    a = math.sqrt(max(4.0 * curve.slope**2 - 3.0, 0.0)) / 3.0
    base = p0 * np.eye(3)
    direction = np.diag([1.0 + a, 1.0 - a, 0.0])
    return MatrixPath(base, direction)


def lift_through_matrix(sigma: SymMatrix, e: Direction) -> MatrixPath:
    """Rank-two path through a given tensor with prescribed planar tangent.

    Adds multiples of B = Id - g (x) g, with the unit vector g chosen on
    the arc between the extreme deviator eigenvectors so that
    g . dev(sigma) g = -4 q e2 / (3 e1); the eigenvalue bounds
    lambda_1 <= -q/sqrt(3) <= q/sqrt(3) <= lambda_3 guarantee a root.
    Only tangent slopes up to sqrt(3)/4 are reachable this way.
    """
    if abs(e.e2) > TANGENT_SLOPE * abs(e.e1) + 1e-12:
        raise SlopeOutOfRangeError(
            "tangent slope exceeds sqrt(3)/4; no rank-two lift through a "
            "general tensor exists"
        )
    a = sigma.array
    if a.shape[0] != 3:
        raise ValueError("lift_through_matrix requires a 3x3 tensor")
    p = np.trace(a) / 3.0
    dev = a - p * np.eye(3)
    q = float(np.linalg.norm(dev)) / math.sqrt(2.0)
    if q <= 1e-300:
        raise DegenerateBaseError("deviator vanishes; use the vertical line lift")
    target = -4.0 * q * e.e2 / (3.0 * e.e1)

    w, vecs = eigen_sym3(dev)
    v1 = vecs[:, 0]
    v3 = vecs[:, 2]

    def value(theta: float) -> float:
        g = math.cos(theta) * v1 + math.sin(theta) * v3
        return float(g @ dev @ g)

    lo, hi = 0.0, math.pi / 2.0
    f_lo = value(lo) - target
    scale = max(abs(w[0]), abs(w[2]), 1e-300)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = value(mid) - target
        if abs(f_mid) <= 1e-12 * scale:
            lo = hi = mid
            break
        if (f_lo <= 0.0) == (f_mid <= 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < 1e-16:
            break
    theta = 0.5 * (lo + hi)
    g = math.cos(theta) * v1 + math.sin(theta) * v3
    g = g / np.linalg.norm(g)
    direction = np.eye(3) - np.outer(g, g)
    return MatrixPath(base=a.copy(), direction=direction, g=g)


# ----------------------------------------------------------------------
# lamination closure


def _direction_tables(n_directions: int):
    """Curve orientations from uniform angle samples on [0, pi).

    Opposite directions trace the same curve with swapped sides, so half
    the circle suffices.  Shallow orientations (|tan| <= sqrt(3)/2) are
    returned as slopes s = tan(theta); steep ones as inverse slopes
    u = cot(theta), which keeps each family on one well-scaled,
    contiguous interval (the vertical direction would sit at u = 0; it
    never decides membership because the points it could add already lie
    in the downward closure, so the midpoint sampling skipping it is
    harmless).
    """
    m = max(8, n_directions // 2)
    theta = (np.arange(m) + 0.5) * math.pi / m
    tan = np.tan(theta)
    shallow = np.abs(tan) <= SECTOR_SLOPE
    s_vals = tan[shallow]
    u_vals = 1.0 / tan[~shallow]
    return np.sort(s_vals), np.sort(u_vals)


def _upper_line_envelope(slopes: np.ndarray, intercepts: np.ndarray):
    """Upper envelope of lines y = s x + c with ascending slopes.

    Returns hull slopes, hull intercepts and the breakpoints where
    consecutive hull lines cross, for O(log) pointwise evaluation.
    """
    hs: list[float] = []
    hc: list[float] = []
    hx: list[float] = []
    for s, c in zip(slopes, intercepts):
        keep = True
        while hs:
            if s - hs[-1] < 1e-15 * max(1.0, abs(s)):
                if c <= hc[-1]:
                    keep = False
                    break
                hs.pop()
                hc.pop()
                if hx:
                    hx.pop()
                continue
            x = (hc[-1] - c) / (s - hs[-1])
            if hx and x <= hx[-1]:
                hs.pop()
                hc.pop()
                hx.pop()
                continue
            hx.append(x)
            break
        if keep:
            hs.append(s)
            hc.append(c)
    return np.asarray(hs), np.asarray(hc), np.asarray(hx)


def _envelope_eval(env, x):
    hs, hc, hx = env
    if hs.size == 0:
        return np.full(np.shape(x), -np.inf)
    idx = np.searchsorted(hx, x, side="right")
    return hs[idx] * x + hc[idx]


class _SideContext:
    """Per-column, per-side hit structures against one snapshot.

    The hyperbola-sector column test max_i [psi_i^2 - 3/4 (p_i - p0)^2]
    >= q0^2 is a max of equal-curvature parabolas in p0, hence an upper
    envelope of lines evaluated at p0.  The V-sector tests reduce to the
    cone envelopes max_i (psi_i -+ m d_i), functions of the slope alone.
    """

    def __init__(self, p_cols: np.ndarray, psi: np.ndarray, boundary: float, sign: float):
        d = sign * (p_cols - boundary)
        keep = d >= 0.0
        self.p = p_cols[keep]
        self.psi = psi[keep]
        self.d = d[keep]
        self.empty = self.p.size == 0
        if self.empty:
            self.hyp_env = (np.empty(0), np.empty(0), np.empty(0))
        else:
            self.hyp_env = _upper_line_envelope(
                1.5 * self.p, self.psi * self.psi - 0.75 * self.p * self.p
            )

    def hyp_margin2(self, p0, q0_sq):
        """Squared-units margin of the hyperbola-branch column test."""
        return -0.75 * p0 * p0 + _envelope_eval(self.hyp_env, p0) - q0_sq

    def cone_asc(self, m_abs):
        """max_i (psi_i - m d_i): set points above the ascending ray."""
        if self.empty:
            return np.full(np.shape(m_abs), -np.inf)
        m_abs = np.asarray(m_abs, dtype=float)
        return (self.psi - m_abs[..., None] * self.d).max(axis=-1)

    def cone_desc(self, m_abs):
        """max_i (psi_i + m d_i): set points above the descending ray."""
        if self.empty:
            return np.full(np.shape(m_abs), -np.inf)
        m_abs = np.asarray(m_abs, dtype=float)
        return (self.psi + m_abs[..., None] * self.d).max(axis=-1)


class _LaminationKernel:
    """Shared state of the both-sides test against one sweep snapshot."""

    def __init__(self, grid, psi, cloud: PrimitiveCloud, s_vals, u_vals, tol, tol2):
        finite = np.isfinite(psi)
        self.p_cols = grid[finite]
        self.psi_cols = psi[finite]
        self.cloud = cloud
        self.s_vals = s_vals
        self.u_vals = u_vals
        self.m_vals = 1.0 / u_vals
        self.m_abs = np.abs(self.m_vals)
        self.tol = tol
        self.tol2 = tol2
        step = grid[1] - grid[0] if grid.size > 1 else 0.0
        self.halfstep = 0.5 * step
        self.span = (float(self.p_cols[0]), float(self.p_cols[-1]))

    def column(self, p_star: float) -> "_ColumnTester":
        return _ColumnTester(self, p_star)


class _ColumnTester:
    """Both-sides curve tests for candidates in one grid column."""

    def __init__(self, kernel: _LaminationKernel, p_star: float):
        self.k = kernel
        self.p_star = p_star
        h = kernel.halfstep
        self.left = _SideContext(kernel.p_cols, kernel.psi_cols, p_star + h, -1.0)
        self.right = _SideContext(kernel.p_cols, kernel.psi_cols, p_star - h, +1.0)
        # cone envelopes of the sampled steep slopes, shared by all
        # candidates of the column
        self.asc_l = self.left.cone_asc(kernel.m_abs)
        self.desc_l = self.left.cone_desc(kernel.m_abs)
        self.asc_r = self.right.cone_asc(kernel.m_abs)
        self.desc_r = self.right.cone_desc(kernel.m_abs)
        # primitives split per side once, for the scalar refinement path
        self._side_prims = {
            -1: self._clip_prims(p_hi=p_star + h),
            +1: self._clip_prims(p_lo=p_star - h),
        }

    def _clip_prims(self, p_lo=-math.inf, p_hi=math.inf):
        cloud = self.k.cloud
        pts = cloud.pts
        if pts.size:
            keep = (pts[:, 0] >= p_lo) & (pts[:, 0] <= p_hi)
            pts = pts[keep]
        segs = cloud.segs
        if segs.size:
            pa, qa, pb, qb = segs.T
            dp = pb - pa
            with np.errstate(divide="ignore", invalid="ignore"):
                sa = np.where(dp != 0.0, (p_lo - pa) / dp, np.nan)
                sb = np.where(dp != 0.0, (p_hi - pa) / dp, np.nan)
            lo_s = np.where(dp >= 0.0, sa, sb)
            hi_s = np.where(dp >= 0.0, sb, sa)
            s0 = np.where(np.isnan(lo_s), 0.0, np.maximum(0.0, lo_s))
            s1 = np.where(np.isnan(hi_s), 1.0, np.minimum(1.0, hi_s))
            vertical = dp == 0.0
            ok = np.where(vertical, (pa >= p_lo) & (pa <= p_hi), s0 <= s1)
            segs = np.column_stack([pa, qa, pb, qb, s0, s1])[ok]
        else:
            segs = np.empty((0, 6))
        return pts, segs

    # -- batched coarse scan -------------------------------------------

    def addable(self, q_cand: np.ndarray):
        """Reachability of (p*, q) plus refinement hints per candidate.

        Returns (ok, hint_s, hint_u): booleans and, per candidate, the
        index of the best coarse orientation in each sector.
        """
        k = self.k
        q_cand = np.asarray(q_cand, dtype=float)
        n = q_cand.size

        # shallow sector: hyperbolas through the candidates
        t_star = 2.0 * q_cand[:, None] * k.s_vals[None, :]
        q0_sq = np.clip(q_cand[:, None] ** 2 - t_star**2 / 3.0, 0.0, None)
        p0 = self.p_star - (2.0 / 3.0) * t_star
        g_l = self.left.hyp_margin2(p0, q0_sq)
        g_r = self.right.hyp_margin2(p0, q0_sq)
        prim_l = self._prim_hyp(p0, q0_sq, side=-1)
        prim_r = self._prim_hyp(p0, q0_sq, side=+1)
        m_l = np.where(prim_l, np.maximum(g_l, 0.0), g_l)
        m_r = np.where(prim_r, np.maximum(g_r, 0.0), g_r)
        marg_s = np.minimum(m_l, m_r)
        hint_s = np.argmax(marg_s, axis=1)
        ok = marg_s[np.arange(n), hint_s] >= -k.tol2

        # steep sector: reflected lines through the candidates
        marg_u = np.minimum(
            self._steep_margins(q_cand, side=-1),
            self._steep_margins(q_cand, side=+1),
        )
        hint_u = np.argmax(marg_u, axis=1)
        ok |= marg_u[np.arange(n), hint_u] >= -k.tol
        return ok, hint_s, hint_u

    def _steep_margins(self, q_cand: np.ndarray, side: int) -> np.ndarray:
        """Linear-units margins of the V branches on one side, batched.

        Ascending branches compare the candidate height against the
        ascending cone envelope.  Descending ones hit the base interval
        exactly whenever their apex lands inside the populated span;
        otherwise every side column precedes the apex and the descending
        cone envelope is exact.
        """
        k = self.k
        asc = (side * k.m_vals) > 0  # line rises into this side
        e_asc = self.asc_l if side < 0 else self.asc_r
        e_desc = self.desc_l if side < 0 else self.desc_r
        marg = np.empty((q_cand.size, k.m_vals.size))
        marg[:, asc] = e_asc[None, asc] - q_cand[:, None]
        desc = ~asc
        apex = self.p_star + side * q_cand[:, None] / k.m_abs[None, desc]
        lo, hi = k.span
        apex_in = (apex >= lo - k.halfstep) & (apex <= hi + k.halfstep)
        marg[:, desc] = np.where(
            apex_in, 0.0, e_desc[None, desc] - q_cand[:, None]
        )
        return marg

    def _prim_hyp(self, p0, q0_sq, side: int):
        """Exact primitive test of the hyperbola branches.

        A set point weakly above the curve graph certifies that the
        branch passes through the downward-closed set.
        """
        k = self.k
        cloud = k.cloud
        if cloud.pts.size == 0 and cloud.segs.size == 0:
            return np.zeros(np.shape(p0), dtype=bool)
        cq, cp = 1.0, -0.75
        bp = 1.5 * p0
        c0 = -q0_sq - 0.75 * p0 * p0
        if side < 0:
            vals = max_quadratic(cloud, cq, cp, bp, c0, p_hi=self.p_star + k.halfstep)
        else:
            vals = max_quadratic(cloud, cq, cp, bp, c0, p_lo=self.p_star - k.halfstep)
        return vals >= -k.tol2

    # -- golden refinement near the best coarse orientation -------------

    def _prim_hyp_scalar(self, p0: float, q0_sq: float, side: int) -> bool:
        """Scalar fast path of the primitive test for refinement loops."""
        pts, segs = self._side_prims[side]
        tol2 = self.k.tol2
        if pts.size:
            vals = pts[:, 1] ** 2 - q0_sq - 0.75 * (pts[:, 0] - p0) ** 2
            if float(vals.max()) >= -tol2:
                return True
        if segs.size:
            pa, qa, pb, qb, s0, s1 = segs.T
            dp = pb - pa
            dq = qb - qa
            a2 = dq * dq - 0.75 * dp * dp
            a1 = 2.0 * qa * dq - 1.5 * (pa - p0) * dp
            a0 = qa * qa - q0_sq - 0.75 * (pa - p0) ** 2
            v0 = a2 * s0 * s0 + a1 * s0 + a0
            v1 = a2 * s1 * s1 + a1 * s1 + a0
            best = np.maximum(v0, v1)
            with np.errstate(divide="ignore", invalid="ignore"):
                sv = -a1 / (2.0 * a2)
            inner = (a2 < 0.0) & (sv > s0) & (sv < s1)
            if np.any(inner):
                vv = a0 - a1 * a1 / (4.0 * a2)
                best = np.where(inner, np.maximum(best, vv), best)
            if float(best.max()) >= -tol2:
                return True
        return False

    def _margin_shallow(self, s: float, q: float) -> float:
        t_star = 2.0 * q * s
        q0_sq = max(q * q - t_star * t_star / 3.0, 0.0)
        p0 = self.p_star - (2.0 / 3.0) * t_star
        out = math.inf
        for side, ctx in ((-1, self.left), (+1, self.right)):
            g = float(ctx.hyp_margin2(p0, q0_sq))
            if g < -self.k.tol2 and self._prim_hyp_scalar(p0, q0_sq, side):
                g = 0.0
            out = min(out, g)
        return out

    def _margin_steep(self, u: float, q: float) -> float:
        if abs(u) < 1e-12:
            u = math.copysign(1e-12, u if u != 0.0 else 1.0)
        m = 1.0 / u
        m_abs = abs(m)
        k = self.k
        lo, hi = k.span
        out = math.inf
        for side, ctx in ((-1, self.left), (+1, self.right)):
            if side * m > 0:
                g = float(ctx.cone_asc(m_abs)) - q
            else:
                apex = self.p_star + side * q / m_abs
                if lo - k.halfstep <= apex <= hi + k.halfstep:
                    g = 0.0
                else:
                    g = float(ctx.cone_desc(m_abs)) - q
            out = min(out, g)
        return out

    def refine(self, q: float, hint_s: int, hint_u: int, iters: int = 26) -> bool:
        """Golden search of both sectors around the best coarse samples.

        Orientation windows narrower than the coarse angular step, in
        particular tangency orientations, are recovered this way.
        """
        k = self.k
        jobs = []
        if k.s_vals.size:
            a = k.s_vals[max(hint_s - 1, 0)] if hint_s > 0 else -SECTOR_SLOPE
            b = (
                k.s_vals[min(hint_s + 1, k.s_vals.size - 1)]
                if hint_s < k.s_vals.size - 1
                else SECTOR_SLOPE
            )
            jobs.append((self._margin_shallow, float(a), float(b), -k.tol2))
        if k.u_vals.size:
            u_lim = 1.0 / SECTOR_SLOPE
            a = k.u_vals[max(hint_u - 1, 0)] if hint_u > 0 else -u_lim
            b = (
                k.u_vals[min(hint_u + 1, k.u_vals.size - 1)]
                if hint_u < k.u_vals.size - 1
                else u_lim
            )
            jobs.append((self._margin_steep, float(a), float(b), -k.tol))
        for fn, a, b, threshold in jobs:
            # sector edges carry the junction orientations (the exact
            # slope-sqrt(3)/2 limits); golden iterates never reach them
            if fn(a, q) >= threshold or fn(b, q) >= threshold:
                return True
            x1 = b - GOLDEN_SECTION * (b - a)
            x2 = a + GOLDEN_SECTION * (b - a)
            f1 = fn(x1, q)
            f2 = fn(x2, q)
            if max(f1, f2) >= threshold:
                return True
            for _ in range(iters):
                if f1 >= f2:
                    b, x2, f2 = x2, x1, f1
                    x1 = b - GOLDEN_SECTION * (b - a)
                    f1 = fn(x1, q)
                else:
                    a, x1, f1 = x1, x2, f2
                    x2 = a + GOLDEN_SECTION * (b - a)
                    f2 = fn(x2, q)
                if max(f1, f2) >= threshold:
                    return True
        return False


def lamination_closure(
    h: PlanarSet,
    n_grid: int = 512,
    n_directions: int = DEFAULT_DIRECTIONS,
    max_iter: int = 40,
    tol: float | None = None,
    p_range: tuple[float, float] | None = None,
    full_output: bool = False,
):
    """Fixpoint of two-sided rank-two attachment, as a gridded region.

    Starts from the downward closure together with the base interval on
    the q = 0 axis; repeatedly promotes every grid point some of whose
    curves meet the current set at parameters of both signs; sweeps the
    grid in increasing-q order per column until stable.  The result is
    an inner bound for the separation-based hull and matches it within
    grid resolution whenever that hull is connected.

    Raises NotConvergedError (carrying the sweep count) if max_iter
    sweeps do not stabilize.
    """
    hhat = downward_closure(h, n_grid, p_range)
    conv = convex_hull(hhat)
    if conv.grid.size == 1:
        region = Region(conv.grid, np.where(np.isfinite(hhat.psi), hhat.psi, 0.0))
        return (region, 0) if full_output else region
    cloud = primitive_cloud(h, n_grid)
    # base interval of the q = 0 axis joins the seed set
    base = np.array([[conv.pmin, 0.0, conv.pmax, 0.0]])
    cloud = PrimitiveCloud(
        pts=cloud.pts,
        segs=np.vstack([cloud.segs, base]) if cloud.segs.size else base,
    )

    scale = _diameter(conv)
    if tol is None:
        tol = SEP_TOL_FACTOR * scale
    tol2 = tol * max(scale, 1.0)

    grid = conv.grid
    step = conv.step
    defined = conv.defined
    psi = np.where(np.isfinite(hhat.psi), hhat.psi, np.where(defined, 0.0, np.nan))
    cap = conv.psi

    s_vals, u_vals = _direction_tables(n_directions)

    iterations = 0
    for sweep in range(max_iter):
        iterations = sweep + 1
        snapshot = psi.copy()
        kernel = _LaminationKernel(grid, snapshot, cloud, s_vals, u_vals, tol, tol2)
        changed = False
        for i in range(grid.size):
            if not defined[i]:
                continue
            lo = snapshot[i]
            hi = cap[i]
            if hi <= lo + 0.5 * step:
                continue
            n_cand = int(math.floor((hi - lo) / step)) + 1
            qs = hi - step * np.arange(n_cand)  # top-down
            qs = qs[qs > lo + 0.25 * step]
            if qs.size == 0:
                continue
            tester = kernel.column(float(grid[i]))
            ok, hint_s, hint_u = tester.addable(qs)
            winner = int(np.argmax(ok)) if ok.any() else qs.size
            # the coarse angular sampling can miss orientation windows
            # narrower than its step; walk upward from the coarse winner
            # refining candidates until two consecutive ones stay out
            misses = 0
            for j in range(winner - 1, -1, -1):
                if tester.refine(float(qs[j]), int(hint_s[j]), int(hint_u[j])):
                    winner = j
                    misses = 0
                else:
                    misses += 1
                    if misses >= 2:
                        break
            if winner < qs.size and qs[winner] > psi[i]:
                psi[i] = float(qs[winner])
                changed = True
        if not changed:
            break
    else:
        raise NotConvergedError(iterations)

    region = Region(grid, psi)
    if full_output:
        return region, iterations
    return region


# ----------------------------------------------------------------------
# two-matrix hulls


@dataclass(frozen=True)
class TwoMatrixHull:
    """Hull of a two-tensor set {A, B}.

    kind "pair": the set is already its own hull; the certificate is
    Tartar's quadratic shifted to vanish on the normalized pair
    (A, B) -> (Id, -Id), reported through ``witness``.
    kind "segment": the hull is the full segment [A, B].
    """

    kind: str
    rank: int
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def midpoint_path(self, lam: float) -> SymMatrix:
        """Point lam * A + (1 - lam) * B of the segment."""
        return SymMatrix(lam * self.a + (1.0 - lam) * self.b)

    def witness(self, xi) -> float:
        """Normalized-coordinate certificate ((n-1)|xi|^2 - (tr xi)^2 + n)_+.

        Vanishes on the normalized pair {Id, -Id} and is positive on the
        open segment between them: along t Id it equals n (1 - t^2).
        """
        if self.kind != "pair":
            raise ValueError("witness only applies to full-rank pairs")
        x = np.asarray(xi, dtype=float)
        n = x.shape[-1]
        tr = np.trace(x, axis1=-2, axis2=-1)
        val = (n - 1) * np.sum(x * x, axis=(-2, -1)) - tr * tr + n
        return float(np.maximum(val, 0.0)) if np.ndim(val) == 0 else np.maximum(val, 0.0)


def two_matrix_hull(a: SymMatrix, b: SymMatrix) -> TwoMatrixHull:
    """Hull of {A, B}: the pair itself when rank(A - B) = n, else [A, B].

    The rank is read off the singular values of A - B with threshold
    1e-10 times its norm.
    """
    am = a.array if isinstance(a, SymMatrix) else SymMatrix(a).array
    bm = b.array if isinstance(b, SymMatrix) else SymMatrix(b).array
    if am.shape != bm.shape:
        raise ValueError("tensors must share a dimension")
    d = am - bm
    nrm = float(np.linalg.norm(d))
    if nrm == 0.0:
        raise ValueError("the two tensors must differ")
    svals = np.linalg.svd(d, compute_uv=False)
    rank = int(np.sum(svals > 1e-10 * nrm))
    n = am.shape[0]
    kind = "pair" if rank == n else "segment"
    return TwoMatrixHull(kind=kind, rank=rank, a=am.copy(), b=bm.copy())

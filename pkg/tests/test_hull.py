import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdqc import (
    DegenerateTangencyError,
    DisconnectedResultWarning,
    DomainError,
    PlanarSet,
    PQPoint,
    Region,
    column_deviation,
    convex_hull,
    downward_closure,
    hausdorff_distance,
    hsdqc,
    is_separable,
    slope_condition,
    two_point_hull,
    two_point_psi,
)
from sdqc.hull import circle_point_hull, classify_circle_point, solve_tangency
from sdqc.planar import primitive_cloud

SQ3 = math.sqrt(3.0)

TWO_POINT = PlanarSet(points=((-0.5, 1.0), (0.5, 1.0)))
WEDGE = PlanarSet(points=((0.0, 0.0), (1.0, SQ3 / 2.0)))


def refined_samples(h: PlanarSet, n: int = 5120) -> np.ndarray:
    """10x-refined discretization of the downward closure, as points."""
    r = downward_closure(h, n)
    mask = r.defined
    pts = [np.column_stack([r.grid[mask], r.psi[mask]])]
    for a, b in h.segments:
        s = np.linspace(0.0, 1.0, n)[:, None]
        pts.append((1 - s) * np.array([[a.p, a.q]]) + s * np.array([[b.p, b.q]]))
    return np.vstack(pts)


class TestIsSeparable:
    def test_outside_convex_hull_affine(self):
        res = is_separable(PQPoint(2.0, 0.5), TWO_POINT)
        assert res.separable and res.witness.kind == "affine"

    def test_above_cap_hyperbola(self):
        res = is_separable(PQPoint(0.0, 0.95), TWO_POINT)
        assert res.separable and res.witness.kind == "hyperbola"

    def test_below_cap_member(self):
        # the envelope height at p = 0 is sqrt(13)/4 ~ 0.9014
        assert not is_separable(PQPoint(0.0, 0.90), TWO_POINT)

    def test_threshold_is_cap_height(self):
        cap = math.sqrt(13.0) / 4.0
        assert not is_separable(PQPoint(0.0, cap - 1e-4), TWO_POINT)
        assert is_separable(PQPoint(0.0, cap + 1e-4), TWO_POINT)

    def test_member_of_set_never_separable(self):
        assert not is_separable(PQPoint(0.5, 1.0), TWO_POINT)
        assert not is_separable(PQPoint(0.5, 0.25), TWO_POINT)

    def test_witness_soundness(self, rng):
        # every returned witness clears a 10x-refined discretization by
        # its reported margin
        for _ in range(40):
            pts = tuple(
                (float(rng.uniform(-1, 1)), float(rng.uniform(0.2, 1.5)))
                for _ in range(3)
            )
            h = PlanarSet(points=pts, segments=(((-1.0, 0.0), (1.0, 0.0)),))
            y = PQPoint(float(rng.uniform(-1.2, 1.2)), float(rng.uniform(0.0, 2.0)))
            res = is_separable(y, h)
            if not res.separable:
                continue
            w = res.witness
            fine = refined_samples(h)
            vals = w.value(fine[:, 0], fine[:, 1])
            if w.kind == "hyperbola":
                assert float(w.value(y.p, y.q)) == pytest.approx(0.0, abs=1e-9)
                assert np.max(vals) < -0.5 * w.margin + 1e-9
            else:
                assert float(w.value(y.p, y.q)) > 0.0
                assert np.max(vals) <= 1e-9
                # nondecreasing in q
                assert w.params[1] >= 0.0


class TestHsdqc:
    def test_two_point_matches_closed_form(self):
        region = hsdqc(TWO_POINT, n_grid=256)
        closed = two_point_hull(0.5, 1.0, n_grid=256)
        assert hausdorff_distance(region, closed) <= 2.0 * region.step
        assert region.psi_at(0.0) == pytest.approx(math.sqrt(0.8125), abs=1e-3)

    def test_single_point_equals_closure(self):
        h = PlanarSet(points=((2.0, 5.0),))
        region = hsdqc(h, n_grid=64)
        assert region.grid.size == 1
        assert region.psi[0] == pytest.approx(5.0)

    def test_wedge_region(self):
        region, info = hsdqc(WEDGE, n_grid=256, full_output=True)
        closed = Region.from_function(
            0.0, 1.0, 256, lambda p: SQ3 / 2.0 * np.asarray(p)
        )
        assert info.connected
        assert hausdorff_distance(region, closed) <= 2.0 * region.step

    def test_containment_chain(self, rng):
        for _ in range(10):
            pts = tuple(
                (float(rng.uniform(-1, 1)), float(rng.uniform(0.0, 1.5)))
                for _ in range(4)
            )
            h = PlanarSet(points=pts)
            hhat = downward_closure(h, 128)
            conv = convex_hull(hhat)
            region = hsdqc(h, n_grid=128)
            hat_psi = np.where(np.isfinite(hhat.psi), hhat.psi, 0.0)
            assert np.all(region.psi >= hat_psi - 1e-9)
            assert np.all(region.psi <= conv.psi + 1e-9)

    def test_monotone_in_h(self, rng):
        for _ in range(8):
            pts = [
                (float(rng.uniform(-1, 1)), float(rng.uniform(0.2, 1.5)))
                for _ in range(4)
            ]
            h2 = PlanarSet(points=tuple(pts), segments=(((-1.0, 0.0), (1.0, 0.0)),))
            h1 = PlanarSet(points=tuple(pts[:2]), segments=(((-1.0, 0.0), (1.0, 0.0)),))
            r1 = hsdqc(h1, n_grid=96, p_range=(-1.0, 1.0))
            r2 = hsdqc(h2, n_grid=96, p_range=(-1.0, 1.0))
            assert np.all(r1.psi <= r2.psi + 2.0 * r1.step)

    def test_projection_identity(self):
        region, info = hsdqc(TWO_POINT, n_grid=128, full_output=True)
        assert info.connected
        conv = convex_hull(downward_closure(TWO_POINT, 128))
        assert region.pmin == conv.pmin and region.pmax == conv.pmax
        assert np.all(np.isfinite(region.psi))

    def test_disconnected_warns(self):
        h = PlanarSet(points=((0.0, 0.05), (4.0, 0.05)))
        with pytest.warns(DisconnectedResultWarning):
            region, info = hsdqc(h, n_grid=128, full_output=True)
        assert not info.connected
        assert info.gap_columns.size > 0

    def test_idempotent(self):
        region = hsdqc(TWO_POINT, n_grid=128)
        mask = region.defined
        resampled = PlanarSet(
            points=tuple(zip(region.grid[mask], region.psi[mask]))
        )
        again = hsdqc(resampled, n_grid=128)
        assert hausdorff_distance(region, again) <= 2.0 * region.step


class TestSlopeCondition:
    def test_two_point_holds(self):
        # max envelope slope 3 p1 / (4 q1) = 3/8 stays under sqrt(3)/4
        region = hsdqc(TWO_POINT, n_grid=256)
        hhat = downward_closure(TWO_POINT, 256)
        assert slope_condition(region, hhat)

    def test_wedge_fails(self):
        region = hsdqc(WEDGE, n_grid=256)
        hhat = downward_closure(WEDGE, 256)
        assert not slope_condition(region, hhat)

    def test_single_point_vacuous(self):
        h = PlanarSet(points=((2.0, 5.0),))
        region = hsdqc(h, n_grid=64)
        hhat = downward_closure(h, 64)
        assert slope_condition(region, hhat)


class TestTwoPointClosedForm:
    def test_cap_height(self):
        region = two_point_hull(0.5, 1.0, n_grid=513)
        assert region.psi_at(0.0) == pytest.approx(math.sqrt(0.8125), abs=1e-12)

    def test_endpoints(self):
        region = two_point_hull(0.5, 1.0, n_grid=513)
        assert region.psi_at(0.5) == pytest.approx(1.0, abs=1e-12)
        assert region.psi_at(-0.5) == pytest.approx(1.0, abs=1e-12)

    def test_domain_guard(self):
        with pytest.raises(DomainError):
            two_point_hull(2.0, 1.0)
        with pytest.raises(DomainError):
            two_point_hull(2.0 / SQ3, 1.0)  # boundary excluded
        with pytest.raises(DomainError):
            two_point_hull(-1.0, 1.0)

    @settings(max_examples=30, deadline=None)
    @given(
        q1=st.floats(min_value=0.2, max_value=3.0),
        frac=st.floats(min_value=0.05, max_value=0.95),
    )
    def test_grid_hull_matches(self, q1, frac):
        p1 = frac * 2.0 * q1 / SQ3
        closed = two_point_hull(p1, q1, n_grid=128)
        region = hsdqc(PlanarSet(points=((-p1, q1), (p1, q1))), n_grid=128)
        assert hausdorff_distance(region, closed) <= 2.0 * region.step


def brute_force_tangency(p_c, r, p_d, q_d, iters=60):
    """Independent tangency oracle by bisection on the contact gap.

    For a hyperbola center abscissa x (shifted by the disc center), the
    minimum over the disc span of (hyperbola height^2 - circle height^2)
    is computed directly; the tangent hyperbola is where that minimum
    vanishes.  No discriminant formula is involved.
    """
    u = p_d - p_c

    def min_gap(x):
        q0_sq = q_d**2 - 0.75 * (u - x) ** 2
        p = np.linspace(-r, r, 40001)
        gap = q0_sq + 0.75 * (p - x) ** 2 - (r * r - p * p)
        return float(gap.min())

    # the gap is monotone between "hyperbola through D misses the disc"
    # (positive) and "cuts it" (negative)
    x_hi = u + 2.0 * q_d / SQ3  # q0 -> 0 limit on the disc side
    x_lo = u
    g_lo, g_hi = min_gap(x_lo), min_gap(x_hi)
    assert g_lo * g_hi < 0, "oracle bracket failed"
    for _ in range(iters):
        mid = 0.5 * (x_lo + x_hi)
        if min_gap(mid) * g_lo > 0:
            x_lo = mid
        else:
            x_hi = mid
    x = 0.5 * (x_lo + x_hi)
    q0 = math.sqrt(max(q_d**2 - 0.75 * (u - x) ** 2, 0.0))
    return p_c + x, q0


class TestCirclePoint:
    def test_classification(self):
        assert classify_circle_point(0.0, 1.0, -3.0, 2.0) == "I"
        assert classify_circle_point(0.0, 1.0, 0.0, 3.0) == "II"
        assert classify_circle_point(0.0, 1.0, -3.0, 0.1) == "other"
        # right of the disc edge, below the apex cone: neither phase
        assert classify_circle_point(0.0, 1.0, 0.5, 1.2) == "other"

    def test_tangency_against_brute_force(self):
        tan = solve_tangency(0.0, 1.0, -3.0, 2.0)
        p0_ref, q0_ref = brute_force_tangency(0.0, 1.0, -3.0, 2.0)
        assert tan.p0 == pytest.approx(p0_ref, abs=1e-9)
        assert tan.q0 == pytest.approx(q0_ref, abs=1e-7)
        # frozen values, cross-checked between the closed form and the
        # scan oracle
        assert tan.p0 == pytest.approx(-0.8898990733922135, abs=1e-12)
        assert tan.q0 == pytest.approx(0.8127764512131982, abs=1e-12)
        assert tan.p_t == pytest.approx(3.0 * tan.p0 / 7.0, abs=1e-12)

    def test_tangency_shift_equivariance(self):
        base = solve_tangency(0.0, 1.0, -3.0, 2.0)
        shifted = solve_tangency(2.5, 1.0, -0.5, 2.0)
        assert shifted.p0 == pytest.approx(base.p0 + 2.5, abs=1e-10)
        assert shifted.q0 == pytest.approx(base.q0, abs=1e-10)
        assert shifted.p_t == pytest.approx(base.p_t + 2.5, abs=1e-10)

    def test_tangency_validity(self):
        tan = solve_tangency(0.0, 1.0, -3.0, 2.0)
        assert tan.q0 >= 0.0
        assert -1.0 - 1e-9 <= tan.p_t <= 1.0 + 1e-9

    def test_region_one_matches_grid_hull(self):
        h = PlanarSet(points=((-3.0, 2.0),), arcs=((0.0, 1.0),))
        result = circle_point_hull(0.0, 1.0, -3.0, 2.0, n_grid=256)
        assert result.label == "I"
        region = hsdqc(h, n_grid=256)
        assert hausdorff_distance(region, result.region) <= 2.0 * region.step

    def test_region_two_is_convex_hull(self):
        h = PlanarSet(points=((0.0, 3.0),), arcs=((0.0, 1.0),))
        result = circle_point_hull(0.0, 1.0, 0.0, 3.0, n_grid=256)
        assert result.label == "II"
        conv = convex_hull(downward_closure(h, 256))
        assert np.array_equal(result.region.grid, conv.grid)
        assert np.array_equal(result.region.psi, conv.psi)
        # and the grid hull agrees with it
        region = hsdqc(h, n_grid=256)
        assert column_deviation(region, conv) <= 2.0 * region.step

    def test_other_unclassified(self):
        result = circle_point_hull(0.0, 1.0, -3.0, 0.1, n_grid=64)
        assert result.label == "other"
        assert result.region is None and result.tangency is None

    def test_preconditions(self):
        with pytest.raises(DomainError):
            circle_point_hull(0.0, -1.0, -3.0, 2.0)
        with pytest.raises(DomainError):
            circle_point_hull(0.0, 1.0, 0.5, 0.5)  # inside the disc
        with pytest.raises(DomainError):
            circle_point_hull(0.0, 1.0, -3.0, -2.0)

    def test_degenerate_tangency_raises(self):
        # D on the critical ray through the near tangent point: the
        # contact leaves the disc within tolerance
        with pytest.raises(DegenerateTangencyError):
            solve_tangency(0.0, 1.0, -3.0, 20.0)


class TestEquivariance:
    @settings(max_examples=20, deadline=None)
    @given(
        alpha=st.floats(min_value=0.25, max_value=4.0),
        beta=st.floats(min_value=-2.0, max_value=2.0),
    )
    def test_scaling_translation(self, alpha, beta):
        # (p, q) -> (alpha p + beta, alpha q) commutes with the hull
        h1 = TWO_POINT
        h2 = PlanarSet(
            points=tuple((alpha * pt.p + beta, alpha * pt.q) for pt in h1.points)
        )
        r1 = hsdqc(h1, n_grid=96)
        r2 = hsdqc(h2, n_grid=96)
        mapped = Region(alpha * r1.grid + beta, alpha * r1.psi)
        assert hausdorff_distance(mapped, r2) <= 2.0 * max(r2.step, alpha * r1.step)

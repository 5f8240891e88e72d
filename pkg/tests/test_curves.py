import math

import numpy as np
import pytest

from sdqc import (
    DegenerateBaseError,
    Direction,
    PlanarSet,
    PQPoint,
    SlopeOutOfRangeError,
    SymMatrix,
    gamma,
    hausdorff_distance,
    hsdqc,
    lamination_closure,
    lift_line,
    lift_through_matrix,
    phi,
    two_matrix_hull,
    two_point_psi,
)
from sdqc.curves import RankTwoCurve

from conftest import random_sym

SQ3 = math.sqrt(3.0)
JUNCTIONS = [
    Direction(s1 * 2.0 / math.sqrt(7.0), s2 * SQ3 / math.sqrt(7.0))
    for s1 in (+1.0, -1.0)
    for s2 in (+1.0, -1.0)
]


class TestGamma:
    def test_horizontal_gives_symmetric_hyperbola(self):
        g = gamma(PQPoint(0.0, 1.0), Direction(1.0, 0.0))
        assert g.curve.kind == "hyperbola"
        assert g.curve.p0 == pytest.approx(0.0, abs=1e-14)
        assert g.curve.q0 == pytest.approx(1.0, abs=1e-14)

    def test_vertical_gives_reflected_ray(self):
        g = gamma(PQPoint(0.0, 1.0), Direction(0.0, 1.0))
        assert g.curve.kind == "vline"
        assert math.isinf(g.curve.slope)
        pt = g.point_at(-2.5)
        assert pt.p == 0.0 and pt.q == pytest.approx(1.5)

    def test_junction_parameters(self):
        # q0 cancels to zero only up to sqrt(eps): the radicand is an
        # exact difference of nearly equal doubles
        e = Direction(2.0 / math.sqrt(7.0), SQ3 / math.sqrt(7.0))
        g = gamma(PQPoint(0.0, 1.0), e, sector="shallow")
        assert g.curve.q0 == pytest.approx(0.0, abs=1e-7)
        assert g.curve.p0 == pytest.approx(-2.0 / SQ3, abs=1e-7)

    def test_base_point_and_tangent(self, rng):
        for _ in range(40):
            y = PQPoint(float(rng.uniform(-2, 2)), float(rng.uniform(0.2, 2.5)))
            e = Direction.from_angle(float(rng.uniform(0, 2 * math.pi)))
            g = gamma(y, e)
            p0 = g.point_at(0.0)
            assert p0.p == pytest.approx(y.p, abs=1e-12)
            assert p0.q == pytest.approx(y.q, abs=1e-12)
            dt = 1e-6
            a = g.point_at(dt)
            b = g.point_at(-dt)
            tangent = np.array([a.p - b.p, a.q - b.q]) / (2 * dt)
            assert np.abs(tangent - [e.e1, e.e2]).max() < 1e-6

    def test_odd_symmetry(self, rng):
        for _ in range(20):
            y = PQPoint(float(rng.uniform(-1, 1)), float(rng.uniform(0.3, 2.0)))
            e = Direction.from_angle(float(rng.uniform(0, 2 * math.pi)))
            g1 = gamma(y, e)
            g2 = gamma(y, e.negated())
            for t in (-1.7, -0.4, 0.9, 2.3):
                a = g1.point_at(t)
                b = g2.point_at(-t)
                assert a.p == pytest.approx(b.p, abs=1e-9)
                assert a.q == pytest.approx(b.q, abs=1e-9)

    def test_junction_continuity(self):
        # at the four junction directions the two constructions must
        # produce the same curve, point by point in arc length
        ts = np.linspace(-10.0, 10.0, 41)
        for e in JUNCTIONS:
            y = PQPoint(0.3, 1.2)
            ga = gamma(y, e, sector="steep")
            gb = gamma(y, e, sector="shallow")
            pa = ga.points_at(ts)
            pb = gb.points_at(ts)
            assert np.abs(pa - pb).max() < 1e-9

    def test_degenerate_base_rejected(self):
        with pytest.raises(DegenerateBaseError):
            gamma(PQPoint(0.0, 0.0), Direction(1.0, 0.0))

    def test_arc_length_parametrization(self, rng):
        # smooth-sector curves: chord lengths track the parameter steps
        # (V-lines are trivially arc length but kink at the reflection)
        for _ in range(10):
            y = PQPoint(float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 2.0)))
            slope = float(rng.uniform(-0.6, 0.6))
            g = gamma(y, Direction.of(1.0, slope))
            ts = np.linspace(-1.0, 1.0, 201)
            pts = g.points_at(ts)
            seg = np.sqrt((np.diff(pts, axis=0) ** 2).sum(axis=1))
            dt = ts[1] - ts[0]
            assert np.all(seg <= dt + 1e-12)
            assert np.abs(seg - dt).max() < 1e-4 * dt


class TestLiftLine:
    def test_hyperbola_base_matrix(self):
        curve = RankTwoCurve("hyperbola", p0=0.0, q0=1.0)
        path = lift_line(PQPoint(0.0, 1.0), curve)
        assert np.allclose(path.at(0.0).array, np.diag([1.0, -1.0, 0.0]))

    def test_vertical_profile(self):
        curve = RankTwoCurve("vline", p0=2.0, slope=math.inf)
        path = lift_line(PQPoint(2.0, 1.0), curve)
        for t in (-2.0, -0.5, 1.0, 3.0):
            y = phi(path.at(t))
            assert y.p == pytest.approx(2.0, abs=1e-12)
            assert y.q == pytest.approx(abs(t), abs=1e-12)

    def test_limit_slope_profile(self):
        curve = RankTwoCurve("vline", p0=0.0, slope=SQ3 / 2.0)
        path = lift_line(PQPoint(1.0, SQ3 / 2.0), curve)
        for t in (-1.0, 0.5, 2.0):
            y = phi(path.at(t))
            assert y.q == pytest.approx(SQ3 / 2.0 * abs(y.p), abs=1e-12)

    def test_phi_traces_declared_graph(self, rng):
        for _ in range(60):
            y = PQPoint(float(rng.uniform(-1, 1)), float(rng.uniform(0.2, 2.0)))
            e = Direction.from_angle(float(rng.uniform(0, 2 * math.pi)))
            g = gamma(y, e)
            path = lift_line(y, g.curve)
            for t in rng.uniform(-3, 3, size=5):
                yy = phi(path.at(float(t)))
                assert yy.q == pytest.approx(
                    float(g.curve.graph_q(yy.p)), abs=1e-10
                )

    def test_rank_two_increments(self, rng):
        for _ in range(30):
            y = PQPoint(float(rng.uniform(-1, 1)), float(rng.uniform(0.2, 2.0)))
            e = Direction.from_angle(float(rng.uniform(0, 2 * math.pi)))
            path = lift_line(y, gamma(y, e).curve)
            t, s = rng.uniform(-4, 4, size=2)
            d = path.at(float(t)).array - path.at(float(s)).array
            svals = np.linalg.svd(d, compute_uv=False)
            assert svals[2] <= 1e-10 * max(svals[0], 1e-300)


class TestLiftThroughMatrix:
    def test_shear_pair_horizontal(self):
        p, q = 2.0, 3.0
        sigma = SymMatrix.diag(p + q, p - q, p)
        path = lift_through_matrix(sigma, Direction(1.0, 0.0))
        assert abs(path.g @ (sigma.deviator() @ path.g)) < 1e-10
        # direction has eigenvalues (1, 1, 0)
        svals = np.linalg.svd(path.direction, compute_uv=False)
        assert np.allclose(svals, [1.0, 1.0, 0.0], atol=1e-12)

    def test_boundary_slope_reachable(self):
        p, q = 1.0, 2.0
        sigma = SymMatrix.diag(p + q, p - q, p)
        e = Direction.of(4.0, SQ3)  # slope exactly sqrt(3)/4
        path = lift_through_matrix(sigma, e)
        target = -4.0 * q * e.e2 / (3.0 * e.e1)
        assert path.g @ (sigma.deviator() @ path.g) == pytest.approx(
            target, abs=1e-10
        )

    def test_slope_guard(self):
        sigma = SymMatrix.diag(3.0, -1.0, 1.0)
        with pytest.raises(SlopeOutOfRangeError):
            lift_through_matrix(sigma, Direction.of(1.0, 0.5))

    def test_hyperbola_identity(self, rng):
        # 2 q^2 = 2 q*^2 + 3/2 (p - p*)^2 + 3 (p - p*)(p* - g.sigma g)
        for _ in range(40):
            a = random_sym(rng, 3, scale=2.0)
            y = phi(SymMatrix(a))
            if y.q < 0.1:
                continue
            slope = float(rng.uniform(-SQ3 / 4.0, SQ3 / 4.0))
            e = Direction.of(1.0, slope)
            path = lift_through_matrix(SymMatrix(a), e)
            c = y.p - float(path.g @ a @ path.g)
            for t in rng.uniform(-2, 2, size=4):
                yy = phi(path.at(float(t)))
                lhs = 2.0 * yy.q**2
                rhs = 2.0 * y.q**2 + 1.5 * (yy.p - y.p) ** 2 + 3.0 * (yy.p - y.p) * c
                assert lhs == pytest.approx(rhs, abs=1e-10 * max(1.0, abs(rhs)))

    def test_tangent_direction(self, rng):
        for _ in range(20):
            a = random_sym(rng, 3, scale=2.0)
            y = phi(SymMatrix(a))
            if y.q < 0.2:
                continue
            slope = float(rng.uniform(-SQ3 / 4.0, SQ3 / 4.0))
            e = Direction.of(1.0, slope)
            path = lift_through_matrix(SymMatrix(a), e)
            dt = 1e-7
            ya, yb = path.phi_at([dt, -dt])
            d = (ya - yb) / (2 * dt)
            d = d / np.linalg.norm(d)
            assert abs(d[1] / d[0] - slope) < 1e-5

    def test_rank_two_path(self, rng):
        a = random_sym(rng, 3, scale=1.0)
        path = lift_through_matrix(SymMatrix(a + 3 * np.eye(3)), Direction(1.0, 0.0))
        d = path.at(1.5).array - path.at(-0.5).array
        svals = np.linalg.svd(d, compute_uv=False)
        assert svals[2] <= 1e-12 * svals[0]


class TestLaminationClosure:
    def test_two_point_converges_to_cap(self):
        h = PlanarSet(points=((-0.5, 1.0), (0.5, 1.0)))
        inner = lamination_closure(h, n_grid=128)
        closed = np.array(
            [two_point_psi(p, 0.5, 1.0) for p in inner.grid]
        )
        assert np.abs(inner.psi - closed).max() <= 2.0 * inner.step

    def test_single_point_fixpoint(self):
        h = PlanarSet(points=((2.0, 5.0),))
        inner, iters = lamination_closure(h, n_grid=64, full_output=True)
        assert inner.grid.size == 1 and inner.psi[0] == pytest.approx(5.0)

    def test_wedge_closure(self):
        h = PlanarSet(points=((0.0, 0.0), (1.0, SQ3 / 2.0)))
        inner = lamination_closure(h, n_grid=128)
        expected = SQ3 / 2.0 * inner.grid
        assert np.abs(inner.psi - expected).max() <= 2.0 * inner.step

    def test_inner_bound_and_agreement(self, rng):
        from sdqc.cases import random_connected_set

        for _ in range(4):
            h = random_connected_set(rng)
            outer, info = hsdqc(h, n_grid=96, full_output=True)
            inner = lamination_closure(h, n_grid=96)
            assert np.all(inner.psi <= outer.psi + outer.step + 1e-12)
            if info.connected:
                assert hausdorff_distance(inner, outer) <= 2.0 * outer.step

    def test_monotone(self, rng):
        base = (((-1.0, 0.0), (1.0, 0.0)),)
        pts = [(0.2, 1.0), (-0.4, 0.8), (0.7, 1.2)]
        h1 = PlanarSet(points=tuple(pts[:1]), segments=base)
        h2 = PlanarSet(points=tuple(pts), segments=base)
        r1 = lamination_closure(h1, n_grid=96, p_range=(-1.0, 1.0))
        r2 = lamination_closure(h2, n_grid=96, p_range=(-1.0, 1.0))
        assert np.all(r1.psi <= r2.psi + 2.0 * r1.step)

    def test_idempotent(self):
        h = PlanarSet(points=((-0.5, 1.0), (0.5, 1.0)))
        inner = lamination_closure(h, n_grid=96)
        mask = inner.defined
        resampled = PlanarSet(points=tuple(zip(inner.grid[mask], inner.psi[mask])))
        again = lamination_closure(resampled, n_grid=96)
        assert hausdorff_distance(inner, again) <= 2.0 * inner.step

    def test_rank_two_segment_convexity(self, rng):
        # between two curve points inside the computed region, the whole
        # arc stays inside (up to grid tolerance)
        h = PlanarSet(points=((-0.5, 1.0), (0.5, 1.0)))
        region = lamination_closure(h, n_grid=128)
        tol = 2.0 * region.step
        for _ in range(40):
            y = PQPoint(float(rng.uniform(-0.4, 0.4)), float(rng.uniform(0.2, 0.85)))
            e = Direction.from_angle(float(rng.uniform(0, math.pi)))
            g = gamma(y, e)
            ts = np.linspace(-0.6, 0.6, 25)
            pts = g.points_at(ts)
            inside = np.array(
                [region.contains(p, q, tol=tol) for p, q in pts]
            )
            if inside[0] and inside[-1]:
                assert np.all(inside)


class TestTwoMatrixHull:
    def test_full_rank_pair(self):
        hull = two_matrix_hull(SymMatrix.identity(3), SymMatrix(-np.eye(3)))
        assert hull.kind == "pair" and hull.rank == 3
        for t in np.linspace(-1.0, 1.0, 21):
            assert hull.witness(t * np.eye(3)) == pytest.approx(
                3.0 * (1.0 - t * t), abs=1e-12
            )
        assert hull.witness(np.eye(3)) == 0.0
        assert hull.witness(-np.eye(3)) == 0.0

    def test_rank_one_segment(self):
        hull = two_matrix_hull(SymMatrix.diag(1.0, 0.0, 0.0), SymMatrix(np.zeros((3, 3))))
        assert hull.kind == "segment" and hull.rank == 1
        mid = hull.midpoint_path(0.5)
        assert np.allclose(mid.array, np.diag([0.5, 0.0, 0.0]))

    def test_rank_two_segment(self):
        hull = two_matrix_hull(SymMatrix.diag(1.0, 1.0, 0.0), SymMatrix(np.zeros((3, 3))))
        assert hull.kind == "segment" and hull.rank == 2

    def test_equal_matrices_rejected(self):
        with pytest.raises(ValueError):
            two_matrix_hull(SymMatrix.identity(3), SymMatrix.identity(3))

    def test_witness_only_for_pairs(self):
        hull = two_matrix_hull(SymMatrix.diag(1.0, 1.0, 0.0), SymMatrix(np.zeros((3, 3))))
        with pytest.raises(ValueError):
            hull.witness(np.eye(3))

import math

import numpy as np
import pytest

from sdqc import (
    FourierField,
    GridTooCoarseError,
    NonzeroMeanError,
    NotRankDeficientError,
    divdiv,
    lambda_direction_check,
    potential_of,
    project_divfree,
    quadratic_potential,
    random_divfree_field,
    shear_sine_mode,
    sym_det_candidate,
    tartar_candidate,
)
from sdqc import test_inequality as run_inequality
from sdqc.fields import frobenius_candidate, kernel_projection_rank, symbol_matrix
from sdqc.verify import divdiv_second_differences, roundtrip_error

from conftest import random_sym


class TestFourierField:
    def test_reality_pairing_enforced(self):
        e = np.eye(2, dtype=complex)
        with pytest.raises(ValueError):
            FourierField(dim=2, modes={(1, 0): e})  # missing partner

    def test_symmetry_enforced(self):
        bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(ValueError):
            FourierField(dim=2, modes={(1, 0): bad, (-1, 0): bad.conj()})

    def test_divergence_enforced(self):
        e = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(ValueError):
            FourierField(dim=2, modes={(1, 0): e, (-1, 0): e.conj()})

    def test_transverse_mode_accepted(self):
        e = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
        f = FourierField(dim=2, modes={(1, 0): e, (-1, 0): e.conj()})
        assert f.k_max == 1

    def test_evaluate_cosine(self):
        e = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
        f = FourierField(dim=2, modes={(1, 0): 0.5 * e, (-1, 0): 0.5 * e})
        grid = 8
        vals = f.evaluate(grid)
        x = np.arange(grid) / grid
        assert np.allclose(vals[:, 0, 1, 1], np.cos(2 * np.pi * x), atol=1e-12)
        assert np.allclose(vals[..., 0, 0], 0.0)


class TestProjectDivfree:
    def test_transverse_unchanged(self):
        e = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
        f = project_divfree({(1, 0): e, (-1, 0): e.conj()})
        assert np.allclose(f.modes[(1, 0)], e, atol=1e-14)

    def test_longitudinal_killed(self):
        e = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        f = project_divfree({(1, 0): e, (-1, 0): e.conj()})
        assert np.allclose(f.modes[(1, 0)], 0.0, atol=1e-14)

    def test_projection_is_orthogonal(self, rng):
        # projected part and removed part are Frobenius-orthogonal
        for _ in range(50):
            k = (1, 2, -1)
            raw = random_sym(rng, 3) + 1j * random_sym(rng, 3)
            f = project_divfree({k: raw, tuple(-x for x in k): raw.conj()})
            proj = f.modes[k]
            rem = raw - proj
            inner = np.sum(proj * rem.conj())
            assert abs(inner) < 1e-12 * max(1.0, np.linalg.norm(raw) ** 2)

    def test_seeded_generator_invariants(self):
        f = random_divfree_field(3, 2, np.random.default_rng(42))
        assert f.k_max == 2
        assert f.check_divergence  # constructor validated both invariants
        assert np.linalg.norm(f.mean_mode) == 0.0

    def test_requires_nonzero_support(self):
        with pytest.raises(ValueError):
            project_divfree({(0, 0): np.eye(2, dtype=complex)})


class TestPotentials:
    def test_single_mode_roundtrip(self):
        e = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
        f = FourierField(dim=2, modes={(1, 0): 0.5 * e, (-1, 0): 0.5 * e})
        assert roundtrip_error(f) < 1e-14

    def test_zero_field(self):
        f = FourierField(dim=3, modes={(0, 0, 0): np.zeros((3, 3), dtype=complex)})
        pot = potential_of(f)
        back = divdiv(pot)
        assert np.allclose(back.modes[(0, 0, 0)], 0.0)

    def test_roundtrip_hundred_random(self, rng):
        for _ in range(100):
            f = random_divfree_field(3, 2, rng)
            assert roundtrip_error(f) < 1e-12

    def test_roundtrip_2d(self, rng):
        for _ in range(20):
            f = random_divfree_field(2, 3, rng)
            assert roundtrip_error(f) < 1e-12

    def test_index_symmetries(self, rng):
        f = random_divfree_field(3, 1, rng)
        pot = potential_of(f)
        for k, a in pot.modes.items():
            assert np.abs(a - a.transpose(1, 0, 3, 2)).max() < 1e-12
            assert np.abs(a + a.transpose(0, 2, 1, 3)).max() < 1e-12

    def test_nonzero_mean_rejected(self, rng):
        f = random_divfree_field(3, 1, rng, mean=np.eye(3))
        with pytest.raises(NonzeroMeanError):
            potential_of(f)

    def test_divdiv_output_admissible(self, rng):
        # divdiv of any valid potential is symmetric and divergence-free
        f = random_divfree_field(3, 2, rng)
        pot = potential_of(f)
        back = divdiv(pot)  # constructor enforces both properties
        assert back.check_divergence


class TestQuadraticPotential:
    def test_divdiv_identity(self, rng):
        for _ in range(10):
            m = random_sym(rng, 3, scale=3.0)
            pot = quadratic_potential(m)
            x = rng.uniform(-5, 5, size=3)
            dd = divdiv_second_differences(pot, x)
            assert np.abs(dd - m).max() < 1e-9 * max(1.0, np.linalg.norm(m))
            assert np.abs(pot.divdiv_value(x) - m).max() < 1e-12

    def test_divdiv_identity_2d(self, rng):
        m = random_sym(rng, 2, scale=2.0)
        pot = quadratic_potential(m)
        dd = divdiv_second_differences(pot, np.array([0.3, -0.7]))
        assert np.abs(dd - m).max() < 1e-9

    def test_zero_field(self):
        pot = quadratic_potential(np.zeros((3, 3)))
        assert np.abs(pot.value(np.ones(3))).max() == 0.0

    def test_pointwise_bounds(self, rng):
        for _ in range(5):
            m = random_sym(rng, 3, scale=2.0)
            pot = quadratic_potential(m)
            m_norm = np.linalg.norm(m)
            for x in rng.uniform(-10, 10, size=(200, 3)):
                r = np.linalg.norm(x)
                assert np.linalg.norm(pot.value(x)) <= 2 * r * r * m_norm + 1e-12
                assert np.linalg.norm(pot.grad(x)) <= 4 * r * m_norm + 1e-12
            assert np.linalg.norm(pot.hess()) <= 4 * m_norm + 1e-12

    def test_index_symmetries(self, rng):
        m = random_sym(rng, 3)
        pot = quadratic_potential(m)
        a = pot.value(rng.uniform(-2, 2, 3))
        assert np.abs(a - a.transpose(1, 0, 3, 2)).max() < 1e-14
        assert np.abs(a + a.transpose(0, 2, 1, 3)).max() < 1e-14


class TestInequality:
    def test_tartar_never_violated(self, rng):
        cand = tartar_candidate(3)
        for _ in range(100):
            f = random_divfree_field(3, 2, rng)
            mean = random_sym(rng, 3, scale=2.0)
            rep = run_inequality(cand, f, mean, grid=5)
            assert not rep.violated
            assert rep.plancherel_error is not None
            assert rep.plancherel_error < 1e-9

    def test_convex_candidate_never_violated(self, rng):
        cand = frobenius_candidate()
        for _ in range(20):
            f = random_divfree_field(3, 2, rng)
            rep = run_inequality(cand, f, random_sym(rng, 3), grid=5)
            assert not rep.violated
            assert rep.margin >= -1e-12

    def test_det_counterexample_value(self):
        rep = run_inequality(
            sym_det_candidate(), shear_sine_mode(), np.zeros((2, 2)), grid=8
        )
        assert rep.violated
        assert rep.lhs == 0.0
        assert rep.rhs == pytest.approx(-0.125, abs=1e-9)

    def test_quadratic_excess_mean_independent(self, rng):
        cand = tartar_candidate(3)
        f = random_divfree_field(3, 2, rng)
        r1 = run_inequality(cand, f, np.zeros((3, 3)), grid=5)
        r2 = run_inequality(cand, f, random_sym(rng, 3, scale=5.0), grid=5)
        assert r1.margin == pytest.approx(r2.margin, abs=1e-9 * max(1, abs(r1.margin)))

    def test_nyquist_guard(self, rng):
        f = random_divfree_field(3, 2, rng)
        with pytest.raises(GridTooCoarseError):
            run_inequality(tartar_candidate(3), f, np.zeros((3, 3)), grid=4)


class TestLambdaDirectionCheck:
    def test_tartar_convex_on_rank_one_line(self):
        res = lambda_direction_check(
            tartar_candidate(3), np.diag([1.0, 0.0, 0.0]), np.zeros((3, 3))
        )
        assert res.convex

    def test_concave_candidate_fails(self):
        def neg_q_sq(a):
            n = a.shape[-1]
            tr = np.trace(a, axis1=-2, axis2=-1) / n
            dev = a - tr[..., None, None] * np.eye(n)
            return -0.5 * np.sum(dev * dev, axis=(-2, -1))

        res = lambda_direction_check(neg_q_sq, np.diag([1.0, -1.0, 0.0]), np.zeros((3, 3)))
        assert not res.convex
        assert res.witness_lambda is not None

    def test_full_rank_direction_rejected(self):
        with pytest.raises(NotRankDeficientError):
            lambda_direction_check(tartar_candidate(3), np.eye(3), -np.eye(3))

    def test_convex_candidate_along_any_singular_line(self, rng):
        cand = frobenius_candidate()
        for _ in range(20):
            a = random_sym(rng, 3)
            a[2, :] = a[:, 2] = 0.0  # singular
            b = random_sym(rng, 3)
            b[2, :] = b[:, 2] = 0.0
            res = lambda_direction_check(cand, a + b, b)  # difference singular
            assert res.convex


class TestCharacteristicCone:
    def test_kernel_dimension(self, rng):
        for _ in range(50):
            w = rng.standard_normal(3)
            w /= np.linalg.norm(w)
            assert kernel_projection_rank(w) == 3

    def test_kernel_members_singular(self, rng):
        for _ in range(50):
            w = rng.standard_normal(3)
            w /= np.linalg.norm(w)
            q = np.eye(3) - np.outer(w, w)
            s = q @ random_sym(rng, 3) @ q
            scale = max(np.linalg.norm(s), 1e-300)
            assert abs(np.linalg.det(s)) < 1e-10 * scale**3
            assert np.abs(s @ w).max() < 1e-12 * scale

    def test_symbol_surjective(self, rng):
        for _ in range(100):
            w = rng.standard_normal(3)
            w /= np.linalg.norm(w)
            v = rng.standard_normal(3)
            f = symbol_matrix(v, w)
            assert np.abs(f - f.T).max() < 1e-12
            assert np.abs(f @ w - v).max() < 1e-12 * max(1.0, np.abs(v).max())

"""Seeded verification suites over the periodic-field machinery.

Each suite runs a batch of randomized (or canonical) checks and returns
a flat report: {candidate, trials, violations, worst_margin,
plancherel_max_error}, plus the suite name and seed.  "violations"
counts inequality failures observed; whether that constitutes a suite
failure depends on the suite (the determinant counterexample *expects*
exactly one).
"""

from __future__ import annotations

import numpy as np

from .fields import (
    kernel_projection_rank,
    potential_of,
    divdiv,
    quadratic_potential,
    random_divfree_field,
    random_symmetric,
    shear_sine_mode,
    sym_det_candidate,
    symbol_matrix,
    tartar_candidate,
    test_inequality,
)

__all__ = [
    "SUITES",
    "run_suite",
    "suite_tartar",
    "suite_det_counterexample",
    "suite_potentials",
    "suite_cone",
    "divdiv_second_differences",
    "roundtrip_error",
]


def roundtrip_error(field) -> float:
    """Sup coefficient error of divdiv(potential_of(field)) against field."""
    back = divdiv(potential_of(field))
    err = 0.0
    for k, w in field.modes.items():
        wb = back.modes.get(k)
        if wb is None:
            err = max(err, float(np.abs(w).max()))
        else:
            err = max(err, float(np.abs(w - wb).max()))
    scale = max(np.sqrt(field.norm_sq()), 1e-300)
    return err / scale


def divdiv_second_differences(pot, x, h: float = 0.5) -> np.ndarray:
    """Double divergence of a quadratic potential by central differences.

    Exact up to roundoff because the potential is quadratic in x.
    """
    x = np.asarray(x, dtype=float)
    n = pot.dim
    out = np.zeros((n, n))
    for hh in range(n):
        for kk in range(n):
            e1 = np.zeros(n)
            e2 = np.zeros(n)
            e1[hh] = h
            e2[kk] = h
            if hh == kk:
                d2 = (pot.value(x + e1) - 2.0 * pot.value(x) + pot.value(x - e1)) / h**2
            else:
                d2 = (
                    pot.value(x + e1 + e2)
                    - pot.value(x + e1 - e2)
                    - pot.value(x - e1 + e2)
                    + pot.value(x - e1 - e2)
                ) / (4.0 * h**2)
            out += d2[:, :, hh, kk]
    return out


def suite_tartar(seed: int = 0, trials: int = 1000) -> dict:
    """Jensen test of Tartar's quadratic over random admissible fields.

    Expects zero violations; also records the worst relative error of
    the per-mode coefficient identity for the excess rhs - lhs.
    """
    rng = np.random.default_rng(seed)
    cand = tartar_candidate(3)
    violations = 0
    worst_margin = np.inf
    plancherel_max = 0.0
    for _ in range(trials):
        field = random_divfree_field(3, 2, rng)
        mean = random_symmetric(rng, 3, scale=2.0)
        rep = test_inequality(cand, field, mean, grid=5)
        if rep.violated:
            violations += 1
        worst_margin = min(worst_margin, rep.margin)
        if rep.plancherel_error is not None:
            plancherel_max = max(plancherel_max, rep.plancherel_error)
    return {
        "suite": "tartar",
        "candidate": cand.name,
        "trials": trials,
        "violations": violations,
        "worst_margin": float(worst_margin),
        "plancherel_max_error": plancherel_max,
        "seed": seed,
    }


def suite_det_counterexample(seed: int = 0, trials: int = 1) -> dict:
    """Canonical planar shear mode against the symmetrized determinant.

    The mode is the symmetric part of a divergence-free unsymmetric
    field; the observed average -1/8 below the mean value 0 certifies
    that the symmetrized determinant admits no unsymmetrized Jensen
    inequality.  Exactly one violation is the expected outcome.
    """
    cand = sym_det_candidate()
    field = shear_sine_mode()
    rep = test_inequality(cand, field, np.zeros((2, 2)), grid=8)
    return {
        "suite": "det-counterexample",
        "candidate": cand.name,
        "trials": 1,
        "violations": 1 if rep.violated else 0,
        "worst_margin": rep.margin,
        "plancherel_max_error": None,
        "seed": seed,
        "lhs": rep.lhs,
        "rhs": rep.rhs,
    }


def suite_potentials(seed: int = 0, trials: int = 100) -> dict:
    """Potential roundtrip plus the closed-form quadratic potential.

    Roundtrip must be the identity to 1e-12 per field; the quadratic
    potential must reproduce its constant field to 1e-9 under second
    differences and stay within its three pointwise bounds.
    """
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(trials):
        field = random_divfree_field(3, 2, rng)
        err = roundtrip_error(field)
        worst = max(worst, err)
        if err > 1e-12:
            violations += 1

    n_points = 1000
    for _ in range(5):
        m = random_symmetric(rng, 3, scale=3.0)
        pot = quadratic_potential(m)
        m_norm = float(np.linalg.norm(m))
        x0 = rng.uniform(-5.0, 5.0, size=3)
        dd = divdiv_second_differences(pot, x0)
        err = float(np.abs(dd - m).max()) / max(m_norm, 1e-300)
        worst = max(worst, err)
        if err > 1e-9:
            violations += 1
        xs = rng.uniform(-10.0, 10.0, size=(n_points // 5, 3))
        hess_norm = float(np.linalg.norm(pot.hess()))
        if hess_norm > 4.0 * m_norm + 1e-12:
            violations += 1
        for x in xs:
            r = float(np.linalg.norm(x))
            if float(np.linalg.norm(pot.value(x))) > 2.0 * r * r * m_norm + 1e-12:
                violations += 1
            if float(np.linalg.norm(pot.grad(x))) > 4.0 * r * m_norm + 1e-12:
                violations += 1
    return {
        "suite": "potentials",
        "candidate": "potential-roundtrip",
        "trials": trials,
        "violations": violations,
        "worst_margin": worst,
        "plancherel_max_error": None,
        "seed": seed,
    }


def suite_cone(seed: int = 0, trials: int = 200) -> dict:
    """Characteristic-cone probes of the divergence constraint.

    For random unit wavevectors the annihilator of the direction inside
    the symmetric matrices must be 3-dimensional (n = 3), consist of
    singular matrices, and the symbol must be onto: the canonical
    F(v, w) satisfies F w = v to 1e-12.
    """
    rng = np.random.default_rng(seed)
    violations = 0
    worst = 0.0
    for _ in range(trials):
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        if kernel_projection_rank(w) != 3:
            violations += 1
        s = random_symmetric(rng, 3)
        u = np.eye(3) - np.outer(w, w)
        s_proj = u @ s @ u
        scale = max(float(np.linalg.norm(s_proj)), 1e-300)
        det_err = abs(float(np.linalg.det(s_proj))) / scale**3
        worst = max(worst, det_err)
        if det_err > 1e-10:
            violations += 1
        v = rng.standard_normal(3)
        f = symbol_matrix(v, w)
        sym_err = float(np.abs(f - f.T).max())
        surj_err = float(np.abs(f @ w - v).max()) / max(1.0, float(np.abs(v).max()))
        worst = max(worst, surj_err)
        if surj_err > 1e-12 or sym_err > 1e-12:
            violations += 1
    return {
        "suite": "cone",
        "candidate": "divergence-symbol",
        "trials": trials,
        "violations": violations,
        "worst_margin": worst,
        "plancherel_max_error": None,
        "seed": seed,
    }


SUITES = {
    "tartar": (suite_tartar, False),
    "det-counterexample": (suite_det_counterexample, True),
    "potentials": (suite_potentials, False),
    "cone": (suite_cone, False),
}


def run_suite(name: str, seed: int = 0, trials: int | None = None) -> tuple[dict, bool]:
    """Run a named suite; returns (report, failed).

    A suite fails when violations appear where none are expected, or
    none appear where one is expected.
    """
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn, expects_violation = SUITES[name]
    kwargs = {"seed": seed}
    if trials is not None:
        kwargs["trials"] = trials
    report = fn(**kwargs)
    if expects_violation:
        failed = report["violations"] == 0
    else:
        failed = report["violations"] > 0
    return report, failed

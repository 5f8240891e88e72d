"""Periodic divergence-free symmetric test fields and inequality checks.

Fields live in coefficient space: a finite map from integer frequency
vectors k (wavevector 2 pi k) to complex symmetric coefficient matrices,
with the reality pairing w(-k) = conj(w(k)).  Divergence-free means
w(k) k = 0 for every nonzero mode.  Real-space samples are produced by
direct summation, which keeps the Plancherel cross-checks exact at the
scale of a few hundred modes.

Every divergence-free mean-zero field derives from a fourth-order
potential with the index symmetries a_ijhk = a_jikh = -a_ihjk; the
coefficient-space construction and its inverse contraction are both
provided, plus the closed-form quadratic potential of a constant field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from types import MappingProxyType

import numpy as np

__all__ = [
    "NonzeroMeanError",
    "GridTooCoarseError",
    "NotRankDeficientError",
    "FourierField",
    "Potential",
    "project_divfree",
    "random_divfree_field",
    "shear_sine_mode",
    "potential_of",
    "divdiv",
    "QuadraticPotential",
    "quadratic_potential",
    "Candidate",
    "tartar_candidate",
    "frobenius_candidate",
    "sym_det_candidate",
    "InequalityReport",
    "test_inequality",
    "ConvexityCheck",
    "lambda_direction_check",
    "random_symmetric",
    "kernel_projection_rank",
    "symbol_matrix",
]

REALITY_TOL = 1e-12
DIVFREE_TOL = 1e-12


class NonzeroMeanError(ValueError):
    """A potential was requested for a field with a nonzero mean."""


class GridTooCoarseError(ValueError):
    """Evaluation grid below the Nyquist bound of the field support."""


class NotRankDeficientError(ValueError):
    """Directional convexity check along a direction of full rank."""


def _freeze_modes(modes: dict) -> MappingProxyType:
    frozen = {}
    for k, coeff in modes.items():
        key = tuple(int(x) for x in k)
        arr = np.array(coeff, dtype=complex)
        arr.setflags(write=False)
        frozen[key] = arr
    return MappingProxyType(frozen)


@dataclass(frozen=True)
class FourierField:
    """Finitely supported Fourier coefficients of a periodic matrix field.

    ``check_divergence`` exists for one documented exception: fields that
    are admissible as the symmetric part of a divergence-free
    *unsymmetric* field (used by the determinant counterexample) store
    symmetric coefficients that do not themselves satisfy w(k) k = 0.
    """

    dim: int
    modes: MappingProxyType = field(repr=False)
    check_divergence: bool = True

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("field dimension must be 2 or 3")
        frozen = _freeze_modes(dict(self.modes))
        for k, w in frozen.items():
            if len(k) != self.dim or w.shape != (self.dim, self.dim):
                raise ValueError(f"mode {k} has wrong shape {w.shape}")
            if not np.all(np.isfinite(w.view(float))):
                raise ValueError(f"mode {k} has non-finite entries")
            nrm = np.linalg.norm(w)
            if np.linalg.norm(w - w.T) > 1e-12 * max(nrm, 1e-300):
                raise ValueError(f"mode {k} coefficient is not symmetric")
            neg = tuple(-x for x in k)
            if neg not in frozen:
                raise ValueError(f"mode {k} lacks its conjugate partner {neg}")
            if np.linalg.norm(frozen[neg] - w.conj()) > REALITY_TOL * max(nrm, 1e-300):
                raise ValueError(f"modes {k}/{neg} violate the reality pairing")
            if self.check_divergence and any(k):
                lam = 2.0 * math.pi * np.asarray(k, dtype=float)
                if np.linalg.norm(w @ lam) > DIVFREE_TOL * max(nrm, 1e-300) * np.linalg.norm(lam):
                    raise ValueError(f"mode {k} is not divergence-free")
        object.__setattr__(self, "modes", frozen)

    @property
    def k_max(self) -> int:
        return max((max(abs(x) for x in k) for k in self.modes), default=0)

    @property
    def mean_mode(self) -> np.ndarray:
        zero = (0,) * self.dim
        if zero in self.modes:
            return self.modes[zero].real.copy()
        return np.zeros((self.dim, self.dim))

    def norm_sq(self, include_mean: bool = True) -> float:
        total = 0.0
        for k, w in self.modes.items():
            if not include_mean or any(k):
                total += float(np.sum(np.abs(w) ** 2))
        return total

    def evaluate(self, grid: int) -> np.ndarray:
        """Real-space samples on the uniform periodic grid, by direct sum.

        Returns an array of shape (grid,)*dim + (dim, dim).
        """
        if grid < 1:
            raise ValueError("grid must be positive")
        shape = (grid,) * self.dim
        out = np.zeros(shape + (self.dim, self.dim), dtype=complex)
        axis_cache: dict[int, np.ndarray] = {}

        def axis_phase(ki: int) -> np.ndarray:
            if ki not in axis_cache:
                axis_cache[ki] = np.exp(2j * np.pi * ki * np.arange(grid) / grid)
            return axis_cache[ki]

        for k in sorted(self.modes):
            w = self.modes[k]
            phase = np.ones(shape, dtype=complex)
            for ax, ki in enumerate(k):
                sh = [1] * self.dim
                sh[ax] = grid
                phase = phase * axis_phase(ki).reshape(sh)
            out += phase[..., None, None] * w
        real = out.real
        imag_max = float(np.abs(out.imag).max()) if out.size else 0.0
        scale = max(float(np.abs(real).max()), 1e-300)
        if imag_max > 1e-9 * scale:
            raise ArithmeticError("field synthesis produced a non-real result")
        return real


def project_divfree(modes: dict, dim: int | None = None) -> FourierField:
    """Orthogonal projection of raw coefficients onto admissible fields.

    Per nonzero mode the coefficient is replaced by its closest symmetric
    matrix annihilating the wavevector (Q S Q with Q the projector onto
    the orthogonal complement of the direction); the mean mode is kept;
    reality is enforced by averaging conjugate pairs.
    """
    if not modes:
        raise ValueError("no modes given")
    keys = [tuple(int(x) for x in k) for k in modes]
    if dim is None:
        dim = len(keys[0])
    raw = {k: np.array(v, dtype=complex) for k, v in zip(keys, modes.values())}
    if all(not any(k) for k in raw):
        raise ValueError("support must contain a nonzero frequency")

    # close under k -> -k, then average conjugate pairs
    for k in list(raw):
        neg = tuple(-x for x in k)
        if neg not in raw:
            raw[neg] = np.zeros((dim, dim), dtype=complex)
    paired = {}
    for k, w in raw.items():
        neg = tuple(-x for x in k)
        w = 0.5 * (w + w.T)
        wn = 0.5 * (raw[neg] + raw[neg].T)
        paired[k] = 0.5 * (w + wn.conj())

    projected = {}
    for k, w in paired.items():
        if not any(k):
            projected[k] = w.real.astype(complex)
            continue
        u = np.asarray(k, dtype=float)
        u = u / np.linalg.norm(u)
        q = np.eye(dim) - np.outer(u, u)
        projected[k] = q @ w @ q
    return FourierField(dim=dim, modes=projected)


def random_divfree_field(
    dim: int,
    k_max: int,
    rng,
    mean: np.ndarray | None = None,
    amplitude: float = 1.0,
) -> FourierField:
    """Seeded random admissible field supported on |k|_inf <= k_max."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    modes = {}
    for k in sorted(product(range(-k_max, k_max + 1), repeat=dim)):
        if not any(k):
            continue
        re = rng.standard_normal((dim, dim))
        im = rng.standard_normal((dim, dim))
        modes[k] = amplitude * (re + re.T + 1j * (im + im.T)) / 2.0
    if mean is not None:
        modes[(0,) * dim] = np.asarray(mean, dtype=complex)
    return project_divfree(modes, dim=dim)


def shear_sine_mode() -> FourierField:
    """The planar shear mode sym(e1 (x) e2) sin(2 pi x1).

    This symmetric field is the symmetric part of the divergence-free
    unsymmetric field e1 (x) e2 sin(2 pi x1); it is admissible for the
    unsymmetrized inequality but is not itself divergence-free, so the
    constructor check is waived.
    """
    e = np.zeros((2, 2))
    e[0, 1] = e[1, 0] = 0.5
    modes = {(1, 0): -0.5j * e, (-1, 0): 0.5j * e}
    return FourierField(dim=2, modes=modes, check_divergence=False)


# ----------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class Potential:
    """Fourth-order coefficient field with a_ijhk = a_jikh = -a_ihjk."""

    dim: int
    modes: MappingProxyType = field(repr=False)

    def __post_init__(self):
        frozen = _freeze_modes(dict(self.modes))
        for k, a in frozen.items():
            if a.shape != (self.dim,) * 4:
                raise ValueError(f"mode {k} has wrong potential shape {a.shape}")
            nrm = max(float(np.abs(a).max()), 1e-300)
            if (
                np.abs(a - a.transpose(1, 0, 3, 2)).max() > 1e-12 * nrm
                or np.abs(a + a.transpose(0, 2, 1, 3)).max() > 1e-12 * nrm
            ):
                raise ValueError(f"mode {k} violates the potential index symmetries")
        object.__setattr__(self, "modes", frozen)


def potential_of(w: FourierField) -> Potential:
    """Coefficient-space potential of a mean-zero admissible field.

    Per mode, a_ijhk = (w_ij l_h l_k + w_hk l_i l_j - w_ih l_j l_k
    - w_jk l_i l_h) / |l|^4 with l the wavevector; contracting twice
    against l recovers the field exactly.
    """
    zero = (0,) * w.dim
    if zero in w.modes and np.linalg.norm(w.modes[zero]) > 1e-14:
        raise NonzeroMeanError("potential construction requires a mean-zero field")
    modes = {}
    for k, coeff in w.modes.items():
        if not any(k):
            modes[k] = np.zeros((w.dim,) * 4, dtype=complex)
            continue
        lam = 2.0 * math.pi * np.asarray(k, dtype=float)
        ll = np.outer(lam, lam)
        norm4 = float(lam @ lam) ** 2
        a = (
            np.einsum("ij,hk->ijhk", coeff, ll)
            + np.einsum("hk,ij->ijhk", coeff, ll)
            - np.einsum("ih,jk->ijhk", coeff, ll)
            - np.einsum("jk,ih->ijhk", coeff, ll)
        ) / norm4
        modes[k] = a
    return Potential(dim=w.dim, modes=modes)


def divdiv(a: Potential) -> FourierField:
    """Double contraction of a potential against its wavevectors.

    Per mode w_ij = sum_hk l_h l_k a_ijhk; the sign convention is fixed
    so that divdiv inverts potential_of exactly in coefficient space.
    The index symmetries make the output symmetric and divergence-free.
    """
    modes = {}
    for k, coeff in a.modes.items():
        if not any(k):
            modes[k] = np.zeros((a.dim, a.dim), dtype=complex)
            continue
        lam = 2.0 * math.pi * np.asarray(k, dtype=float)
        modes[k] = np.einsum("ijhk,h,k->ij", coeff, lam, lam)
    return FourierField(dim=a.dim, modes=modes)


@dataclass(frozen=True)
class QuadraticPotential:
    """Closed-form potential of a constant symmetric field M.

    a(x)_ijhk = (M_ij x_h x_k + M_hk x_i x_j - M_ih x_j x_k
    - M_kj x_h x_i) / (n (n - 1)), with double divergence identically M
    and the pointwise bounds |a|(x) <= 2 |x|^2 |M|, |Da|(x) <= 4 |x| |M|
    and |D^2 a| <= 4 |M|.
    """

    m: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise ValueError("M must be square of dimension at least 2")
        if np.abs(m - m.T).max() > 1e-12 * max(np.abs(m).max(), 1e-300):
            raise ValueError("M must be symmetric")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def dim(self) -> int:
        return self.m.shape[0]

    def _scale(self) -> float:
        n = self.dim
        return 1.0 / (n * (n - 1))

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        m = self.m
        xx = np.outer(x, x)
        a = (
            np.einsum("ij,hk->ijhk", m, xx)
            + np.einsum("hk,ij->ijhk", m, xx)
            - np.einsum("ih,jk->ijhk", m, xx)
            - np.einsum("kj,hi->ijhk", m, xx)
        )
        return self._scale() * a

    def grad(self, x: np.ndarray) -> np.ndarray:
        """Derivative tensor with the derivative index last."""
        x = np.asarray(x, dtype=float)
        m = self.m
        eye = np.eye(self.dim)
        g = (
            np.einsum("ij,hl,k->ijhkl", m, eye, x)
            + np.einsum("ij,h,kl->ijhkl", m, x, eye)
            + np.einsum("hk,il,j->ijhkl", m, eye, x)
            + np.einsum("hk,i,jl->ijhkl", m, x, eye)
            - np.einsum("ih,jl,k->ijhkl", m, eye, x)
            - np.einsum("ih,j,kl->ijhkl", m, x, eye)
            - np.einsum("kj,hl,i->ijhkl", m, eye, x)
            - np.einsum("kj,h,il->ijhkl", m, x, eye)
        )
        return self._scale() * g

    def hess(self) -> np.ndarray:
        """Constant second derivative, derivative indices last."""
        m = self.m
        eye = np.eye(self.dim)
        h = (
            np.einsum("ij,hl,km->ijhklm", m, eye, eye)
            + np.einsum("ij,hm,kl->ijhklm", m, eye, eye)
            + np.einsum("hk,il,jm->ijhklm", m, eye, eye)
            + np.einsum("hk,im,jl->ijhklm", m, eye, eye)
            - np.einsum("ih,jl,km->ijhklm", m, eye, eye)
            - np.einsum("ih,jm,kl->ijhklm", m, eye, eye)
            - np.einsum("kj,hl,im->ijhklm", m, eye, eye)
            - np.einsum("kj,hm,il->ijhklm", m, eye, eye)
        )
        return self._scale() * h

    def divdiv_value(self, x: np.ndarray) -> np.ndarray:
        """Exact double divergence (independent of x)."""
        h = self.hess()
        # sum over the derivative pair contracted against the last two
        # tensor indices: (DivDiv a)_ij = sum_hk d_h d_k a_ijhk
        return np.einsum("ijhkhk->ij", h)


def quadratic_potential(m) -> QuadraticPotential:
    return QuadraticPotential(np.asarray(m, dtype=float))


# ----------------------------------------------------------------------
# candidates and the inequality test


@dataclass(frozen=True)
class Candidate:
    """Function of a symmetric matrix, vectorized over stacks (..., n, n).

    ``coefficient_term`` is the optional per-mode contribution of the
    quadratic-form descriptor: for quadratic candidates the excess of
    the periodic average over the mean value equals the sum of this term
    over the nonzero modes (exactly, by Plancherel).
    """

    name: str
    fn: object
    quadratic: bool = False
    coefficient_term: object = None

    def __call__(self, stacked: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(stacked, dtype=float))


def tartar_candidate(dim: int = 3) -> Candidate:
    def fn(a: np.ndarray) -> np.ndarray:
        tr = np.trace(a, axis1=-2, axis2=-1)
        return (dim - 1) * np.sum(a * a, axis=(-2, -1)) - tr * tr

    def term(w: np.ndarray) -> float:
        tr = np.trace(w)
        return float((dim - 1) * np.sum(np.abs(w) ** 2) - abs(tr) ** 2)

    return Candidate("tartar", fn, quadratic=True, coefficient_term=term)


def frobenius_candidate() -> Candidate:
    def fn(a: np.ndarray) -> np.ndarray:
        return np.sum(a * a, axis=(-2, -1))

    def term(w: np.ndarray) -> float:
        return float(np.sum(np.abs(w) ** 2))

    return Candidate("frobenius-squared", fn, quadratic=True, coefficient_term=term)


def sym_det_candidate() -> Candidate:
    """det of the symmetric part, the planar counterexample candidate."""

    def fn(a: np.ndarray) -> np.ndarray:
        s = 0.5 * (a + np.swapaxes(a, -1, -2))
        return np.linalg.det(s)

    return Candidate("sym-det", fn)


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    violated: bool
    margin: float
    plancherel_error: float | None = None

    def as_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "violated": self.violated,
            "margin": self.margin,
            "plancherel_error": self.plancherel_error,
        }


def test_inequality(
    f,
    field_: FourierField,
    mean: np.ndarray,
    grid: int,
) -> InequalityReport:
    """Jensen-type test of a candidate against one oscillatory field.

    Samples phi = mean + field on the periodic grid and compares
    f(mean) against the grid average of f(phi).  A violation (mean value
    exceeding the average beyond 1e-9 relative slack) certifies that the
    candidate is incompatible with the admissible oscillations the field
    represents; absence of violations is evidence only.

    The grid must resolve the field support: grid >= 2 k_max + 1.
    """
    fn = f if isinstance(f, Candidate) else Candidate("anonymous", f)
    k_max = field_.k_max
    if grid < 2 * k_max + 1:
        raise GridTooCoarseError(
            f"grid {grid} below the Nyquist bound {2 * k_max + 1}"
        )
    mean = np.asarray(mean, dtype=float)
    phi = field_.evaluate(grid) + mean
    vals = np.asarray(fn(phi), dtype=float)
    rhs = float(vals.mean())
    lhs = float(np.asarray(fn(mean[None]))[0])
    scale = max(1.0, abs(lhs), abs(rhs))
    violated = lhs > rhs + 1e-9 * scale

    plancherel_error = None
    if fn.coefficient_term is not None and np.linalg.norm(field_.mean_mode) < 1e-14:
        predicted = sum(
            fn.coefficient_term(w) for k, w in field_.modes.items() if any(k)
        )
        plancherel_error = abs((rhs - lhs) - predicted) / max(1.0, abs(predicted))
    return InequalityReport(
        lhs=lhs, rhs=rhs, violated=bool(violated), margin=rhs - lhs,
        plancherel_error=plancherel_error,
    )


@dataclass(frozen=True)
class ConvexityCheck:
    convex: bool
    witness_lambda: float | None

    def __bool__(self) -> bool:
        return self.convex


def lambda_direction_check(f, a, b, samples: int = 101) -> ConvexityCheck:
    """Convexity of a candidate along one rank-deficient direction.

    Verifies f(l A + (1-l) B) <= l f(A) + (1-l) f(B) on a uniform sample
    of l in [0, 1]; requires det(A - B) = 0 within tolerance, since only
    such directions force convexity.
    """
    fn = f if isinstance(f, Candidate) else Candidate("anonymous", f)
    am = np.asarray(getattr(a, "array", a), dtype=float)
    bm = np.asarray(getattr(b, "array", b), dtype=float)
    d = am - bm
    n = am.shape[0]
    nrm = max(float(np.linalg.norm(d)), 1e-300)
    if abs(float(np.linalg.det(d))) > 1e-9 * nrm**n:
        raise NotRankDeficientError("A - B must be singular")
    lam = np.linspace(0.0, 1.0, samples)
    pts = lam[:, None, None] * am + (1.0 - lam)[:, None, None] * bm
    vals = np.asarray(fn(pts), dtype=float)
    fa = float(np.asarray(fn(am[None]))[0])
    fb = float(np.asarray(fn(bm[None]))[0])
    chord = lam * fa + (1.0 - lam) * fb
    scale = max(1.0, abs(fa), abs(fb), float(np.abs(vals).max()))
    bad = vals > chord + 1e-9 * scale
    if np.any(bad):
        return ConvexityCheck(False, float(lam[int(np.argmax(bad))]))
    return ConvexityCheck(True, None)


# ----------------------------------------------------------------------
# characteristic-cone probes


def random_symmetric(rng, dim: int = 3, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim))
    return scale * (g + g.T) / 2.0


def kernel_projection_rank(w: np.ndarray) -> int:
    """Dimension of {S symmetric : S w = 0} via the projection map.

    The orthogonal projection S -> Q S Q (Q annihilating w) maps the
    symmetric matrices onto that kernel; its rank is the kernel
    dimension, n (n - 1) / 2 for unit w in dimension n.
    """
    w = np.asarray(w, dtype=float)
    n = w.size
    u = w / np.linalg.norm(w)
    q = np.eye(n) - np.outer(u, u)
    basis = []
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = 1.0
            basis.append((q @ e @ q).ravel())
    s = np.linalg.svd(np.asarray(basis), compute_uv=False)
    return int(np.sum(s > 1e-10 * s[0]))


def symbol_matrix(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Symmetric F with F w = v for unit w: v (x) w + w (x) v - (v.w) w (x) w."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    return np.outer(v, w) + np.outer(w, v) - (v @ w) * np.outer(w, w)

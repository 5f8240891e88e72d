import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_sym(rng, dim=3, scale=1.0):
    g = rng.standard_normal((dim, dim))
    return scale * 0.5 * (g + g.T)


def random_rotation(rng, dim=3):
    """Haar-ish rotation via QR of a Gaussian matrix."""
    g = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q

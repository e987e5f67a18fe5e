import numpy as np
import pytest
from scipy.linalg import sqrtm
from scipy.stats import unitary_group

from steershare.states import PAULIS

I2 = np.eye(2)


def random_state(rng, rank=None):
    rank = rank or int(rng.integers(1, 5))
    g = rng.standard_normal((4, rank)) + 1j * rng.standard_normal((4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_local_unitary(rng):
    ua = unitary_group.rvs(2, random_state=rng)
    ub = unitary_group.rvs(2, random_state=rng)
    return np.kron(ua, ub)


def random_triple_values(rng):
    return tuple(float(x) for x in rng.uniform(1e-3, 1.0, size=3))


def oracle_side_channel(rho, lams, bob):
    """Dense Lueders channel using numerical matrix square roots."""
    out = np.zeros((4, 4), dtype=complex)
    for lam, s in zip(lams, PAULIS):
        for sign in (1, -1):
            k = sqrtm((I2 + sign * lam * s) / 2)
            k = np.kron(I2, k) if bob else np.kron(k, I2)
            out += k @ rho @ k.conj().T
    return out / 3


def oracle_correlations(rho):
    return np.array([[np.trace(rho @ np.kron(a, b)).real for b in PAULIS] for a in PAULIS])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

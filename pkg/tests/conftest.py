import numpy as np
import pytest

from reachset import (
    assemble_generator,
    build_permutation_set,
    max_purity_on_ellipsoid,
)


@pytest.fixture(scope="session")
def chloroform_gen():
    return assemble_generator()


@pytest.fixture(scope="session")
def two_qubit_controls():
    return build_permutation_set(2)


@pytest.fixture(scope="session")
def chloroform_bound(chloroform_gen):
    return max_purity_on_ellipsoid(chloroform_gen)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)


def random_density_matrix(rng, n):
    """Full-rank random state: normalized A A^dag."""
    d = 2 ** n
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def haar_unitary(rng, d):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))

import numpy as np
import pytest

from liftsdp.builtins import bipartite3, get_builtin, k23, p333, p_regular


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session")
def p3():
    return get_builtin("p3")


@pytest.fixture(scope="session")
def poly_p333():
    return p333()


@pytest.fixture(scope="session")
def poly_k23():
    return k23()


@pytest.fixture(scope="session")
def poly_bipartite3():
    return bipartite3()


def random_hermitian(rng, n, complex_entries=False):
    m = rng.standard_normal((n, n))
    if complex_entries:
        m = m + 1j * rng.standard_normal((n, n))
    return (m + m.conj().T) / 2

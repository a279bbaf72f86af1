import numpy as np
import pytest

from spatranspose.qmath import haar_random_ket, projector, random_density_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def eq4():
    return np.array([[0.322, 0.352 - 0.307j], [0.352 + 0.307j, 0.678]], dtype=complex)


@pytest.fixture
def random_states(rng):
    return [random_density_matrix(2, rng) for _ in range(20)]


@pytest.fixture
def haar_projectors(rng):
    return [projector(haar_random_ket(2, rng)) for _ in range(100)]

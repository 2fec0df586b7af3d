import numpy as np
import pytest

from syzygy_forge.algebra import PolyRing
from syzygy_forge.bundles import (
    buchsbaum_sum_module,
    example_f1,
    example_f2,
    example_rank5,
    monomial_curve_modules,
    null_correlation_module,
)

STANDARD_SKEW = np.array(
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=np.int64
)


@pytest.fixture(scope="session")
def ring():
    return PolyRing(32003, 3)


@pytest.fixture(scope="session")
def ring2():
    return PolyRing(32003, 2)


@pytest.fixture(scope="session")
def nc(ring):
    return null_correlation_module(ring, STANDARD_SKEW)


@pytest.fixture(scope="session")
def f1(ring):
    return example_f1(ring)


@pytest.fixture(scope="session")
def f2(ring):
    return example_f2(ring)


@pytest.fixture(scope="session")
def rank5(ring):
    return example_rank5(ring)


@pytest.fixture(scope="session")
def omega_sum(ring):
    return buchsbaum_sum_module(ring)


@pytest.fixture(scope="session")
def curves():
    return monomial_curve_modules()

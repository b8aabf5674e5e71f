import numpy as np
import pytest

from varreg import BasisSpec, CoefficientField


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def basis8():
    return BasisSpec(1, 8)


@pytest.fixture
def basis32():
    return BasisSpec(1, 32)


def make_field(basis, coeffs, tag="Y"):
    return CoefficientField(basis, np.asarray(coeffs, dtype=float), tag)

import numpy as np
import pytest

from src.services.coefficient_service import ShiftParameters
from src.services.kernel_service import TranslateNetwork, canonical_witness
from src.services.witness_service import certify

ACCEPTANCE_LAMBDAS = (0.5, 0.7, 0.9, 1.1)


@pytest.fixture(scope="session")
def certificates():
    """Certificates for the acceptance lambdas, built once per session."""
    return {lam: certify(lam) for lam in ACCEPTANCE_LAMBDAS}


@pytest.fixture(scope="session")
def witness_07(certificates):
    cert = certificates[0.7]
    return canonical_witness(ShiftParameters(lam=0.7, n=cert.n)), cert


@pytest.fixture
def single_bump():
    return TranslateNetwork.from_mapping(1.0, {0: 1.0})


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def random_network(rng):
    """Factory for networks with shifts |k| <= reach and coefficients uniform in [-1, 1]."""
    def build(lam: float, reach: int = 20) -> TranslateNetwork:
        shifts = np.arange(-reach, reach + 1)
        return TranslateNetwork(lam, shifts, rng.uniform(-1.0, 1.0, size=len(shifts)))
    return build

import math

import numpy as np
import pytest

from thermosteer.routines.definitions import psi_minus
from thermosteer.routines.machine import (
    AnalyticModel, TwoQubitState, inversion_optimal_g, model_params
)

TELEPORT_OPTIMUM = (3.0 + math.sqrt(5.0)) / 8.0

@pytest.fixture
def rng():
    return np.random.default_rng(1234)

@pytest.fixture
def singlet():
    return TwoQubitState.from_ket(psi_minus)

@pytest.fixture
def teleport_optimal_params():
    g = inversion_optimal_g(1.0)
    return model_params(AnalyticModel.FERMION_INVERSION, g, 1.0)

@pytest.fixture
def small_params():
    """Weak coupling parameters for the numerical generator."""
    def build(model, g = 0.03, gammaA = 0.05, gammaB = 0.07, TA = None):
        return model_params(model, g, gammaB, TA, gammaA = gammaA)
    return build

def random_state(rng: np.random.Generator) -> TwoQubitState:
    G = rng.normal(size = (4, 4)) + 1j * rng.normal(size = (4, 4))
    rho = G @ G.conj().T
    return TwoQubitState(rho / np.trace(rho))

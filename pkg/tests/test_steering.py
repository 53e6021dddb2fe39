import math

import numpy as np
import pytest

from thermosteer.routines.definitions import *
from thermosteer.routines.linalg import partial_trace_A
from thermosteer.routines.machine import (
    AnalyticModel, TwoQubitState, model_params, steady_state_analytic
)
from thermosteer.routines.steering import *

WERNER_TWO_SETTINGS = 1.0 - 1.0 / math.sqrt(2.0)
WERNER_THREE_SETTINGS = 1.0 - 1.0 / math.sqrt(3.0)

# ------------------------------------------------------------------------------
@pytest.mark.parametrize('builder, count', [
    (lambda: pauli_measurements(2), 2),
    (lambda: pauli_measurements(3), 3),
    (icosahedron_measurements, 6),
    (dodecahedron_measurements, 10),
    (geodesic_measurements, 16),
])
def test_measurement_sets(builder, count):
    m = builder()
    assert len(m) == count
    assert np.allclose(np.linalg.norm(m.vectors, axis = 1), 1.0)
    # no repeated or antipodal axes
    overlaps = np.abs(m.vectors @ m.vectors.T) - np.eye(count)
    assert np.max(overlaps) < 1.0 - 1e-6

def test_measurement_set_validation():
    with pytest.raises(InvalidInput):
        MeasurementSet(np.array([[1.0, 1.0, 0.0]]))
    with pytest.raises(InvalidInput):
        pauli_measurements(4)
    m = measurement_set([[2.0, 0.0, 0.0]])
    assert np.allclose(m.vectors, [[1.0, 0.0, 0.0]])

def test_projectors_resolve_identity():
    m = dodecahedron_measurements()
    for x in range(len(m)):
        P0, P1 = m.projector(0, x), m.projector(1, x)
        assert np.allclose(P0 + P1, np.eye(2))
        assert np.allclose(P0 @ P0, P0)

def test_inscribed_radius():
    assert inscribed_radius(pauli_measurements(3)) == pytest.approx(1.0 / math.sqrt(3.0))
    assert inscribed_radius(dodecahedron_measurements()) == pytest.approx(0.7947, abs = 1e-3)
    assert inscribed_radius(icosahedron_measurements()) == pytest.approx(0.7947, abs = 1e-3)

# ------------------------------------------------------------------------------
def test_deterministic_strategies():
    D = deterministic_strategies(3)
    assert D.shape == (8, 3)
    assert np.all(D[0] == 0) and np.all(D[-1] == 1)
    assert len({tuple(row) for row in D}) == 8
    assert deterministic_strategies(2, 3).shape == (9, 2)
    with pytest.raises(SizeExceeded):
        deterministic_strategies(21)

def test_assemblage_of_singlet(singlet):
    asm = assemblage(singlet, pauli_measurements(3))
    assert asm.sigma.shape == (2, 3, 2, 2)
    assert np.allclose(asm.marginal, np.eye(2) / 2)
    # perfectly anticorrelated outcomes
    assert np.allclose(asm.sigma[0, 2], np.diag([0.0, 0.5]))

def test_signalling_assemblage_rejected():
    m = pauli_measurements(2)
    sigma = np.zeros((2, 2, 2, 2), dtype = complex)
    sigma[0, 0] = np.diag([0.5, 0.0])
    sigma[1, 0] = np.diag([0.0, 0.5])
    sigma[0, 1] = np.diag([0.5, 0.0])
    sigma[1, 1] = np.diag([0.5, 0.0])
    with pytest.raises(InvalidInput):
        Assemblage(sigma, m)
    with pytest.raises(DimensionMismatch):
        Assemblage(sigma[:, :1], m)

# ------------------------------------------------------------------------------
def test_product_state_is_feasible():
    psi = np.kron([1.0, 0.0], [math.cos(0.3), math.sin(0.3)])
    state = TwoQubitState.from_ket(psi)
    m = dodecahedron_measurements()
    certificate = lhs_feasibility(assemblage(state, m))
    assert certificate.verdict is LhsVerdict.FEASIBLE
    assert certificate.states.shape == (2**10, 2, 2)
    assert np.allclose(certificate.states.sum(axis = 0), partial_trace_A(state.rho), atol = 1e-5)

def test_singlet_is_infeasible(singlet):
    certificate = lhs_feasibility(assemblage(singlet, pauli_measurements(2)))
    assert certificate.verdict is LhsVerdict.INFEASIBLE
    assert certificate.dual is not None
    assert certificate.margin == pytest.approx(WERNER_TWO_SETTINGS, abs = 1e-3)

def test_werner_thresholds(singlet):
    assert noise_robustness(singlet, pauli_measurements(2)) == pytest.approx(
        WERNER_TWO_SETTINGS, abs = 1e-3
    )
    assert noise_robustness(singlet, pauli_measurements(3)) == pytest.approx(
        WERNER_THREE_SETTINGS, abs = 1e-3
    )

def test_noisy_singlet_beyond_threshold(singlet):
    noisy = singlet.mix_white_noise(WERNER_TWO_SETTINGS + 0.05)
    assert noise_robustness(noisy, pauli_measurements(2)) == 0.0

def test_inversion_golden_value():
    p = model_params(AnalyticModel.FERMION_INVERSION, 0.38, 1.9)
    state = TwoQubitState.from_x(steady_state_analytic(AnalyticModel.FERMION_INVERSION, p))
    assert noise_robustness(state, dodecahedron_measurements()) == pytest.approx(0.109, abs = 5e-3)

# ------------------------------------------------------------------------------
def test_ppt():
    assert is_ppt(TwoQubitState.maximally_mixed())
    assert not is_ppt(TwoQubitState.from_ket(psi_minus))

def test_classify_separable_state():
    result = steerability_classify(TwoQubitState.maximally_mixed())
    assert result.verdict is SteerVerdict.UNSTEERABLE
    assert result.method == 'ppt'

def test_classify_singlet(singlet):
    result = steerability_classify(singlet, budget = 2)
    assert result.verdict is SteerVerdict.STEERABLE
    assert result.measurements == 'pauli2'
    assert result.q_star == pytest.approx(WERNER_TWO_SETTINGS, abs = 1e-3)

def test_robustness_verdict(singlet):
    assert robustness_verdict(singlet, 0.2) is SteerVerdict.STEERABLE
    assert robustness_verdict(TwoQubitState.maximally_mixed(), 0.0) is SteerVerdict.UNSTEERABLE
    assert robustness_verdict(singlet.mix_white_noise(0.5), 0.0) is SteerVerdict.UNDECIDED
    assert robustness_verdict(singlet, None) is SteerVerdict.UNDECIDED

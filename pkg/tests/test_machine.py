import logging
import math

import numpy as np
import pytest

from thermosteer.routines.definitions import *
from thermosteer.routines.linalg import vec
from thermosteer.routines.machine import *
from thermosteer.routines.nonclassicality import singlet_fraction_x

from conftest import TELEPORT_OPTIMUM

ALL_MODELS = [
    (AnalyticModel.BOSON_COLD_B, 1.5),
    (AnalyticModel.FERMION_UNCHARGED_HOT_COLD, None),
    (AnalyticModel.FERMION_CHARGED_COLD_B_UINF, None),
    (AnalyticModel.FERMION_CHARGED_COLD_B_UINF, 0.8),
    (AnalyticModel.FERMION_INVERSION, None),
]

# ------------------------------------------------------------------------------
def test_fermionic_occupation_limits():
    assert occupation(BathKind.FERMIONIC, E, 0.0) == 0.0
    assert occupation(BathKind.FERMIONIC, E, -0.0) == 1.0
    assert occupation(BathKind.FERMIONIC, E, math.inf) == 0.5
    assert occupation(BathKind.FERMIONIC, E, 1.0) == pytest.approx(1.0 / (1.0 + math.e))
    assert occupation(BathKind.FERMIONIC, E, -1.0) == pytest.approx(math.e / (1.0 + math.e))
    # u -> inf transition
    assert occupation(BathKind.FERMIONIC, math.inf, math.inf) == 0.0
    assert occupation(BathKind.FERMIONIC, math.inf, -2.0) == 1.0

def test_bosonic_occupation():
    assert occupation(BathKind.BOSONIC, E, 1.0) == pytest.approx(1.0 / (math.e - 1.0))
    assert occupation(BathKind.BOSONIC, E, 0.0) == 0.0
    with pytest.raises(InvalidTemperature):
        occupation(BathKind.BOSONIC, E, -1.0)

def test_rates():
    assert rates(BathKind.BOSONIC, 2.0, E, 0.0) == (0.0, 2.0)
    plus, minus = rates(BathKind.FERMIONIC, 2.0, E, math.inf)
    assert plus == pytest.approx(1.0) and minus == pytest.approx(1.0)

# ------------------------------------------------------------------------------
def test_params_validation():
    with pytest.raises(InvalidParams):
        MachineParams(g = -0.1)
    with pytest.raises(InvalidParams):
        MachineParams(g = 0.1, gammaB = 0.0)
    with pytest.raises(InvalidParams):
        MachineParams(g = 0.1, limits = {'TA_inf', 'TA_zero_minus'})
    with pytest.raises(InvalidParams):
        MachineParams(g = 0.1, limits = {'TB_hot'})
    with pytest.raises(InvalidParams):
        MachineParams(g = 0.1, u = 1.0, bath = BathKind.BOSONIC)
    with pytest.raises(InvalidTemperature):
        MachineParams(g = 0.1, TB = -1.0)

def test_params_dict():
    p = model_params(AnalyticModel.FERMION_CHARGED_COLD_B_UINF, 0.3, 2.1)
    q = MachineParams.from_dict(p.to_dict())
    assert q == p
    assert q.effective_TA() == math.inf and q.effective_u() == math.inf
    with pytest.raises(InvalidParams):
        MachineParams.from_dict({'gammaA': 1.0})

def test_inversion_limit_is_negative_zero():
    p = model_params(AnalyticModel.FERMION_INVERSION, 0.1, 1.0)
    TA = p.effective_TA()
    assert TA == 0.0 and math.copysign(1.0, TA) < 0

def test_boson_needs_temperature():
    with pytest.raises(InvalidParams):
        model_params(AnalyticModel.BOSON_COLD_B, 0.1, 1.0)

def test_model_mismatch():
    p = model_params(AnalyticModel.FERMION_INVERSION, 0.1, 1.0)
    with pytest.raises(ModelMismatch):
        steady_state_analytic(AnalyticModel.BOSON_COLD_B, p)
    with pytest.raises(ModelMismatch):
        steady_state_analytic(AnalyticModel.FERMION_UNCHARGED_HOT_COLD, p)

# ------------------------------------------------------------------------------
def test_hamiltonian_hermitian():
    p = MachineParams(g = 0.2, u = 3.0, TA = 1.0)
    H = hamiltonian(p)
    assert np.allclose(H, H.conj().T)
    assert H[1, 2] == pytest.approx(0.2)
    assert H[3, 3] == pytest.approx(2.0 + 3.0)

def test_jump_operators_charged():
    p = MachineParams(g = 0.1, u = 2.0, TA = 1.0, limits = {'TB_zero'})
    jumps = jump_operators(p)
    assert len(jumps) == 4
    # bath B at zero temperature never excites
    assert jumps[2][1] == 0.0 and jumps[3][1] == 0.0

def test_liouvillian_preserves_trace():
    p = MachineParams(g = 0.05, gammaA = 0.04, gammaB = 0.06, TA = 2.0, TB = 0.5, u = 1.0)
    L = build_liouvillian(p)
    assert np.allclose(vec(identity4).conj() @ L, 0, atol = 1e-12)

@pytest.mark.parametrize('model, TA', ALL_MODELS)
def test_numeric_matches_analytic(model, TA, small_params):
    p = small_params(model, TA = TA)
    analytic = steady_state_analytic(model, p)
    numeric = canonicalize_x_state(steady_state_numeric(p))
    for name in ('a1', 'a2', 'a3', 'alpha'):
        assert getattr(numeric, name) == pytest.approx(getattr(analytic, name), abs = 1e-8)

def test_steady_state_is_stationary(small_params):
    p = small_params(AnalyticModel.BOSON_COLD_B, TA = 2.0)
    rho = steady_state_numeric(p).rho
    assert np.allclose(build_liouvillian(p) @ vec(rho), 0, atol = 1e-10)

def test_time_evolution_relaxes(small_params):
    p = small_params(AnalyticModel.FERMION_INVERSION)
    decay = np.sort(-np.real(np.linalg.eigvals(build_liouvillian(p))))
    rho = time_evolve(p, TwoQubitState.maximally_mixed(), 40.0 / decay[1])
    x = canonicalize_x_state(rho, tol = 1e-7)
    expected = steady_state_analytic(AnalyticModel.FERMION_INVERSION, p)
    assert x.a3 == pytest.approx(expected.a3, abs = 1e-6)
    assert x.alpha == pytest.approx(expected.alpha, abs = 1e-6)

def test_time_evolution_edges(small_params):
    p = small_params(AnalyticModel.FERMION_INVERSION)
    rho0 = TwoQubitState.maximally_mixed()
    assert time_evolve(p, rho0, 0.0) is rho0
    with pytest.raises(InvalidInput):
        time_evolve(p, rho0, -1.0)
    with pytest.raises(StepSizeUnderflow):
        time_evolve(p, rho0, 1e6, max_steps = 10)

def test_regime_warning(caplog):
    p = model_params(AnalyticModel.FERMION_INVERSION, 0.5, 1.0)
    with caplog.at_level(logging.WARNING):
        steady_state_numeric(p)
    assert 'regime' in caplog.text

# ------------------------------------------------------------------------------
def test_two_qubit_state_validation():
    with pytest.raises(DimensionMismatch):
        TwoQubitState(np.eye(2) / 2)
    with pytest.raises(InvalidInput):
        TwoQubitState(np.eye(4))
    with pytest.raises(InvalidInput):
        TwoQubitState(np.diag([1.5, -0.5, 0.0, 0.0]))
    with pytest.raises(NotHermitian):
        TwoQubitState(np.diag([0.5, 0.5, 0, 0]) + np.diag([0.1, 0, 0], 1))

def test_x_state_validation():
    with pytest.raises(NonXState):
        XState(a1 = 0.5, a2 = 0.25, a3 = 0.25, alpha = 0.3)
    with pytest.raises(NonXState):
        XState(a1 = 0.8, a2 = 0.3, a3 = 0.0, alpha = 0.0)

def test_canonicalize_absorbs_phase():
    rho = np.diag([0.2, 0.4, 0.3, 0.1]).astype(complex)
    rho[1, 2] = 0.2j
    rho[2, 1] = -0.2j
    x = canonicalize_x_state(rho)
    assert x.alpha == pytest.approx(0.2)
    assert x.a4 == pytest.approx(0.1)

def test_canonicalize_rejects_outer_coherence():
    rho = np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)
    rho[0, 3] = rho[3, 0] = 0.5
    with pytest.raises(NonXState):
        canonicalize_x_state(rho)

# ------------------------------------------------------------------------------
def test_inversion_optimum(teleport_optimal_params):
    assert teleport_optimal_params.g == pytest.approx((math.sqrt(5.0) - 1.0) / 4.0)
    x = steady_state_analytic(AnalyticModel.FERMION_INVERSION, teleport_optimal_params)
    assert singlet_fraction_x(x) == pytest.approx(TELEPORT_OPTIMUM, abs = 1e-12)
    assert inversion_singlet_fraction(teleport_optimal_params.g, 1.0, 1.0) == pytest.approx(
        TELEPORT_OPTIMUM, abs = 1e-12
    )

def test_inversion_optimal_g_is_stationary():
    gammaB = 3.0
    g = inversion_optimal_g(gammaB)
    h = 1e-5
    left = inversion_singlet_fraction(g - h, 1.0, gammaB)
    mid = inversion_singlet_fraction(g, 1.0, gammaB)
    right = inversion_singlet_fraction(g + h, 1.0, gammaB)
    assert mid >= left and mid >= right

def test_inversion_scale_invariance():
    a = steady_state_analytic(
        AnalyticModel.FERMION_INVERSION, model_params(AnalyticModel.FERMION_INVERSION, 0.3, 2.0)
    )
    b = steady_state_analytic(
        AnalyticModel.FERMION_INVERSION,
        model_params(AnalyticModel.FERMION_INVERSION, 0.03, 0.2, gammaA = 0.1)
    )
    assert a.alpha == pytest.approx(b.alpha) and a.a3 == pytest.approx(b.a3)

def test_zero_coupling_is_product():
    x = steady_state_analytic(
        AnalyticModel.FERMION_INVERSION, model_params(AnalyticModel.FERMION_INVERSION, 0.0, 1.0)
    )
    assert x.alpha == 0.0
    # A fully inverted, B in its ground state
    assert x.a3 == pytest.approx(1.0)

def test_population_temperatures():
    TA, flags = ta_for_population(1.0)
    assert flags == {'TA_zero_minus'}
    TA, flags = ta_for_population(0.5)
    assert math.isinf(TA) and flags == {'TA_inf'}
    TA, flags = ta_for_population(0.88)
    assert TA < 0
    assert occupation(BathKind.FERMIONIC, E, TA) == pytest.approx(0.88)
    with pytest.raises(InvalidParams):
        ta_for_population(0.0)

def test_charged_bounds():
    bounds = charged_cold_b_bounds()
    assert bounds['alpha'] == pytest.approx(math.sqrt(2.0 - math.sqrt(3.0)) / 4.0)
    x = steady_state_analytic(
        AnalyticModel.FERMION_CHARGED_COLD_B_UINF,
        model_params(AnalyticModel.FERMION_CHARGED_COLD_B_UINF, 0.3, 2.1)
    )
    assert x.alpha <= bounds['alpha']
    assert x.alpha + x.delta / 2.0 <= bounds['singlet_fraction'] + 1e-4

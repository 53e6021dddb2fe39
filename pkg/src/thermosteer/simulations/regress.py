"""
Golden-value regression suite. Every check is a named function returning
a JSON-able record with a ``passed`` flag; :func:`regress` runs them in a
fixed order and :func:`write_summary` serializes the result with sorted
keys so that repeated runs give identical files.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from thermosteer.routines.definitions import *
from thermosteer.routines.filtering import (
    FermionChargedFinite, FilterScope, Objective, herald_x, optimize_tradeoff,
    PURE_FILTER_SLOPE, pure_state_filter_target
)
from thermosteer.routines.machine import (
    AnalyticModel, MachineParams, TwoQubitState, build_liouvillian,
    charged_cold_b_bounds, inversion_optimal_g, inversion_singlet_fraction,
    model_params, steady_state_analytic, steady_state_numeric, time_evolve
)
from thermosteer.routines.nonclassicality import (
    chsh_x, concurrence_x, purity, singlet_fraction_x
)
from thermosteer.routines.prjbuild import readwrite_json
from thermosteer.routines.steering import (
    LhsVerdict, assemblage, dodecahedron_measurements, lhs_feasibility,
    noise_robustness, pauli_measurements
)

__all__ = [
    'CHECKS',
    'regress',
    'write_summary',
]

logger = logging.getLogger(__name__)

TELEPORT_OPTIMUM = (3.0 + math.sqrt(5.0)) / 8.0
FUZZ_SAMPLES = 20000

def _record(passed: bool, **fields) -> dict:
    out = {'passed': bool(passed)}
    for key, value in fields.items():
        out[key] = float(value) if isinstance(value, (float, np.floating)) else value
    return out

# ------------------------------------------------------------------------------
def check_teleport_optimum(seed: int) -> dict:
    g = inversion_optimal_g(1.0)
    x = steady_state_analytic(AnalyticModel.FERMION_INVERSION, model_params(
        AnalyticModel.FERMION_INVERSION, g, 1.0
    ))
    F = singlet_fraction_x(x)
    closed = inversion_singlet_fraction(g, 1.0, 1.0)
    error = max(abs(F - TELEPORT_OPTIMUM), abs(closed - TELEPORT_OPTIMUM))
    return _record(error <= 1e-9, value = F, expected = TELEPORT_OPTIMUM, error = error)

def check_teleport_optimizer(seed: int) -> dict:
    point = optimize_tradeoff(
        AnalyticModel.FERMION_INVERSION, Objective.SINGLET_FRACTION, 1.0, seed = seed
    )
    error = abs(point.value - TELEPORT_OPTIMUM)
    return _record(error <= 1e-4, value = point.value, expected = TELEPORT_OPTIMUM, error = error)

# ------------------------------------------------------------------------------
def _sample_ratios(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    # Log-uniform g/gammaA in [1e-3, 1e2] and gammaB/gammaA in [1e-3, 1e3]
    return 10**rng.uniform(-3, 2, n), 10**rng.uniform(-3, 3, n)

def check_simple_machine_no_go(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst_F = -np.inf
    worst_chsh = -np.inf
    models = [
        AnalyticModel.BOSON_COLD_B,
        AnalyticModel.FERMION_UNCHARGED_HOT_COLD,
        AnalyticModel.FERMION_CHARGED_COLD_B_UINF,
    ]
    for model in models:
        g, gammaB = _sample_ratios(rng, FUZZ_SAMPLES)
        TA = 10**rng.uniform(-1, 2, FUZZ_SAMPLES)
        for i in range(FUZZ_SAMPLES):
            T = None if model is AnalyticModel.FERMION_UNCHARGED_HOT_COLD else TA[i]
            x = steady_state_analytic(model, model_params(model, g[i], gammaB[i], T))
            worst_F = max(worst_F, x.alpha + x.delta / 2.0)
            worst_chsh = max(worst_chsh, chsh_x(x))
    passed = worst_F <= 0.5 + 1e-9 and worst_chsh <= 2.0 + 1e-9
    return _record(passed, max_entangled_overlap = worst_F, max_chsh = worst_chsh)

def check_inversion_chsh_no_go(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    g, gammaB = _sample_ratios(rng, FUZZ_SAMPLES)
    # include the g -> 0 and large g ends
    g[:2] = [1e-9, 1e6]
    worst = -np.inf
    for i in range(FUZZ_SAMPLES):
        x = steady_state_analytic(AnalyticModel.FERMION_INVERSION, model_params(
            AnalyticModel.FERMION_INVERSION, g[i], gammaB[i]
        ))
        worst = max(worst, 8.0 * x.alpha**2 + (2.0 * x.delta - 1.0)**2)
    return _record(worst <= 1.0 + 1e-9, max_S = worst)

def check_charged_bounds(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    bounds = charged_cold_b_bounds()
    g, gammaB = _sample_ratios(rng, FUZZ_SAMPLES)
    worst_alpha = -np.inf
    worst_F = -np.inf
    for i in range(FUZZ_SAMPLES):
        x = steady_state_analytic(AnalyticModel.FERMION_CHARGED_COLD_B_UINF, model_params(
            AnalyticModel.FERMION_CHARGED_COLD_B_UINF, g[i], gammaB[i]
        ))
        worst_alpha = max(worst_alpha, x.alpha)
        worst_F = max(worst_F, x.alpha + x.delta / 2.0)
    passed = (
        worst_alpha <= bounds['alpha'] + 1e-9
        and worst_F <= bounds['singlet_fraction'] + 1e-4
    )
    return _record(passed, max_alpha = worst_alpha, max_entangled_overlap = worst_F)

# ------------------------------------------------------------------------------
STEERING_GOLDEN = [
    ('inversion', AnalyticModel.FERMION_INVERSION, 0.38, 1.9, 0.109, 0.005),
    ('teleport_optimal', AnalyticModel.FERMION_INVERSION, inversion_optimal_g(1.0), 1.0, 0.081, 0.005),
    ('uncharged', AnalyticModel.FERMION_UNCHARGED_HOT_COLD, 0.6, 8.5, 0.0023, 0.001),
    ('charged', AnalyticModel.FERMION_CHARGED_COLD_B_UINF, 0.3, 2.1, 0.0075, 0.002),
]

def check_steering_golden(seed: int) -> dict:
    m = dodecahedron_measurements()
    values = {}
    passed = True
    for name, model, g, gammaB, expected, tol in STEERING_GOLDEN:
        x = steady_state_analytic(model, model_params(model, g, gammaB))
        q = noise_robustness(TwoQubitState.from_x(x), m)
        values[name] = {'q_star': float(q), 'expected': expected, 'tol': tol}
        passed = passed and abs(q - expected) <= tol
    return _record(passed, points = values)

def check_werner_two_settings(seed: int) -> dict:
    singlet = TwoQubitState.from_ket(psi_minus)
    q = noise_robustness(singlet, pauli_measurements(2))
    expected = 1.0 - 1.0 / math.sqrt(2.0)
    return _record(abs(q - expected) <= 1e-3, value = q, expected = expected)

def check_separable_feasible(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    m = dodecahedron_measurements()
    failures = 0
    for _ in range(20):
        rho = np.zeros((4, 4), dtype = complex)
        weights = rng.dirichlet(np.ones(3))
        for w in weights:
            rho = rho + w * np.kron(_random_qubit(rng), _random_qubit(rng))
        verdict = lhs_feasibility(assemblage(TwoQubitState(rho), m)).verdict
        failures += verdict is not LhsVerdict.FEASIBLE
    return _record(failures == 0, failures = failures)

def _random_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size = 3)
    v = rng.uniform() * v / np.linalg.norm(v)
    return 0.5 * (identity2 + v[0] * sigma_x + v[1] * sigma_y + v[2] * sigma_z)

# ------------------------------------------------------------------------------
def _random_oracle_params(rng: np.random.Generator, kind: int) -> Tuple[AnalyticModel, MachineParams]:
    g = rng.uniform(0.01, 0.08)
    gammaA, gammaB = rng.uniform(0.02, 0.1, 2)
    if kind == 0:
        model = AnalyticModel.BOSON_COLD_B
        p = model_params(model, g, gammaB, rng.uniform(0.5, 5.0), gammaA = gammaA)
    elif kind == 1:
        model = AnalyticModel.FERMION_UNCHARGED_HOT_COLD
        p = model_params(model, g, gammaB, gammaA = gammaA)
    elif kind == 2:
        model = AnalyticModel.FERMION_CHARGED_COLD_B_UINF
        TA = None if rng.uniform() < 0.5 else rng.uniform(0.5, 5.0)
        p = model_params(model, g, gammaB, TA, gammaA = gammaA)
    else:
        model = AnalyticModel.FERMION_INVERSION
        p = model_params(model, g, gammaB, gammaA = gammaA).with_(u = rng.uniform(0.0, 5.0))
    return model, p

def check_oracle_equivalence(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(50):
        model, p = _random_oracle_params(rng, i % 4)
        analytic = TwoQubitState.from_x(steady_state_analytic(model, p)).rho
        numeric = steady_state_numeric(p).rho
        # Integrate for 40 relaxation times of the slowest decaying mode
        decay = np.sort(-np.real(np.linalg.eigvals(build_liouvillian(p))))
        evolved = time_evolve(p, TwoQubitState.maximally_mixed(), 40.0 / decay[1]).rho
        # The analytic form has a real negative coherence; align the phase
        numeric = _align_phase(numeric)
        evolved = _align_phase(evolved)
        worst = max(
            worst,
            np.max(np.abs(analytic - numeric)),
            np.max(np.abs(analytic - evolved)),
            np.max(np.abs(numeric - evolved)),
        )
    return _record(worst <= 1e-6, max_deviation = worst)

def _align_phase(rho: np.ndarray) -> np.ndarray:
    c = rho[1, 2]
    if abs(c) == 0:
        return rho
    phase = -c / abs(c)
    U = np.diag([1.0, 1.0, phase, phase])
    return U @ rho @ U.conj().T

# ------------------------------------------------------------------------------
def _inversion_series(g: float) -> Tuple[float, float]:
    gA, gB = 1.0, 2.0
    t = gA + gB
    x = steady_state_analytic(AnalyticModel.FERMION_INVERSION, model_params(
        AnalyticModel.FERMION_INVERSION, g, gB, gammaA = gA
    ))
    P = purity(TwoQubitState.from_x(x))
    C = concurrence_x(x)
    purity_error = abs(P - (1.0 - 8 * g**2 * (gA**2 + gB**2) / (gA * gB * t**2)))
    concurrence_error = abs(C - (4 * g / t - 8 * g**2 / t**2))
    return purity_error, concurrence_error

def check_series_expansions(seed: int) -> dict:
    p2, c2 = _inversion_series(1e-2)
    p3, c3 = _inversion_series(1e-3)
    # Third order remainders shrink a thousandfold; accept a hundredfold
    passed = p3 <= p2 / 100.0 and c3 <= c2 / 100.0
    return _record(passed, purity_ratio = p2 / max(p3, 1e-300), concurrence_ratio = c2 / max(c3, 1e-300))

def check_pure_state_filtering(seed: int) -> dict:
    worst = np.inf
    for ratio in (1e-2, 1e-3):
        x = steady_state_analytic(AnalyticModel.FERMION_INVERSION, model_params(
            AnalyticModel.FERMION_INVERSION, ratio, 1.0
        ))
        heralded, _ = herald_x(x, pure_state_filter_target(x))
        worst = min(worst, singlet_fraction_x(heralded) - (1.0 - PURE_FILTER_SLOPE * ratio))
    return _record(worst > 0, margin = worst)

# ------------------------------------------------------------------------------
def check_asymptotic_entanglement(seed: int) -> dict:
    charged = optimize_tradeoff(
        AnalyticModel.FERMION_CHARGED_COLD_B_UINF, Objective.SINGLET_FRACTION, 1e-3,
        FilterScope.BOTH_QUBITS, seed = seed
    )
    inversion = optimize_tradeoff(
        AnalyticModel.FERMION_INVERSION, Objective.SINGLET_FRACTION, 1e-4,
        FilterScope.BOTH_QUBITS, seed = seed
    )
    passed = charged.value >= 0.99 and inversion.value >= 0.99
    return _record(passed, charged = charged.value, inversion = inversion.value)

HERALD_THRESHOLDS = [
    ('boson_singlet', AnalyticModel.BOSON_COLD_B, Objective.SINGLET_FRACTION, 0.42, FilterScope.BOTH_QUBITS),
    ('charged_singlet', AnalyticModel.FERMION_CHARGED_COLD_B_UINF, Objective.SINGLET_FRACTION, 0.52, FilterScope.BOTH_QUBITS),
    ('charged_chsh', AnalyticModel.FERMION_CHARGED_COLD_B_UINF, Objective.CHSH, 0.005, FilterScope.BOTH_QUBITS),
    ('inversion_chsh', None, Objective.CHSH, 0.17, FilterScope.QUBIT_B_ONLY),
]

def check_heralded_thresholds(seed: int) -> dict:
    values = {}
    passed = True
    for name, model, objective, p_target, scope in HERALD_THRESHOLDS:
        if model is None:
            model = FermionChargedFinite.from_population(u = 20.0, population = 1.0)
        point = optimize_tradeoff(model, objective, p_target, scope, seed = seed)
        values[name] = {'p_suc': p_target, 'value': float(point.value)}
        passed = passed and point.value > objective.threshold
    # Bosons lose the CHSH violation at small efficiencies
    boson = optimize_tradeoff(
        AnalyticModel.BOSON_COLD_B, Objective.CHSH, 0.01, FilterScope.BOTH_QUBITS, seed = seed
    )
    values['boson_chsh'] = {'p_suc': 0.01, 'value': float(boson.value)}
    passed = passed and boson.value <= 2.0 + 1e-9
    return _record(passed, points = values)

# =============================================================================
# name: (check, optimizer-backed)
CHECKS: Dict[str, Tuple[Callable[[int], dict], bool]] = {
    'teleport_optimum': (check_teleport_optimum, False),
    'teleport_optimizer': (check_teleport_optimizer, True),
    'simple_machine_no_go': (check_simple_machine_no_go, False),
    'inversion_chsh_no_go': (check_inversion_chsh_no_go, False),
    'charged_bounds': (check_charged_bounds, False),
    'steering_golden': (check_steering_golden, False),
    'werner_two_settings': (check_werner_two_settings, False),
    'separable_feasible': (check_separable_feasible, False),
    'oracle_equivalence': (check_oracle_equivalence, False),
    'series_expansions': (check_series_expansions, False),
    'pure_state_filtering': (check_pure_state_filtering, False),
    'asymptotic_entanglement': (check_asymptotic_entanglement, True),
    'heralded_thresholds': (check_heralded_thresholds, True),
}

def regress(
        skip_slow: bool = False,
        seed: int = 0,
        only: Optional[List[str]] = None
    ) -> dict:
    """
    Run the suite. A check that raises is recorded as failed with the
    error message.

    :param skip_slow: Skip the optimizer-backed checks.
    :type skip_slow: bool
    :param seed: Seed shared by the sampling and optimizer checks.
    :type seed: int
    :param only: Restrict to these check names.
    :return: ``{'passed': bool, 'seed': int, 'checks': {name: record}}``
    :rtype: dict
    """
    names = list(CHECKS) if only is None else list(only)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise InvalidInput(f'Unknown regression checks {unknown}')
    results = {}
    for name in names:
        check, slow = CHECKS[name]
        if slow and skip_slow:
            results[name] = {'passed': True, 'skipped': True}
            continue
        print(f'Running {name}')
        try:
            results[name] = check(seed)
        except ThermosteerError as e:
            logger.warning(f'Check {name} raised {type(e).__name__}: {e}')
            results[name] = {'passed': False, 'error': f'{type(e).__name__}: {e}'}
        print(f'  {name}: {"pass" if results[name]["passed"] else "FAIL"}')
    return {
        'passed': all(record['passed'] for record in results.values()),
        'seed': seed,
        'checks': results,
    }

def write_summary(summary: dict, jsonfile: str) -> None:
    readwrite_json(jsonfile, summary)

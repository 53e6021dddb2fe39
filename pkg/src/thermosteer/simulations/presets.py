"""
Named parameter sets: single machines for ``analyze``, verdict grids for
``sweep`` and efficiency grids for ``tradeoff``.
"""

from thermosteer.routines.definitions import *
from thermosteer.routines.filtering import FermionChargedFinite, FilterScope, Objective
from thermosteer.routines.machine import AnalyticModel, inversion_optimal_g, model_params

__all__ = [
    'ANALYZE_PRESETS',
    'SWEEP_PRESETS',
    'TRADEOFF_PRESETS',
    'analyze_preset',
    'sweep_preset',
    'tradeoff_preset',
]

# --------------------------------- Analyze ------------------------------------
# name: (model, g, gammaB, TA) with gammaA = 1
ANALYZE_PRESETS = {
    'teleport-optimal': (AnalyticModel.FERMION_INVERSION, inversion_optimal_g(1.0), 1.0, None),
    'g0': (AnalyticModel.FERMION_INVERSION, 0.0, 1.0, None),
    'inversion-steer': (AnalyticModel.FERMION_INVERSION, 0.38, 1.9, None),
    'uncharged-steer': (AnalyticModel.FERMION_UNCHARGED_HOT_COLD, 0.6, 8.5, None),
    'charged-steer': (AnalyticModel.FERMION_CHARGED_COLD_B_UINF, 0.3, 2.1, None),
    'boson-steer': (AnalyticModel.BOSON_COLD_B, 0.5, 19.5551, 1.5),
}

def analyze_preset(name: str):
    """(model, MachineParams) of a named single machine."""
    try:
        model, g, gammaB, TA = ANALYZE_PRESETS[name]
    except KeyError:
        raise InvalidInput(
            f'Unknown analyze preset {name}; choose from {sorted(ANALYZE_PRESETS)}'
        ) from None
    return model, model_params(model, g, gammaB, TA)

# ---------------------------------- Sweep -------------------------------------
SWEEP_PRESETS = {
    'boson-grid': {
        'model': AnalyticModel.BOSON_COLD_B,
        'axes': ['g=0.05:1:20', 'gammaB=1:20:20', 'TA=0.5:5:3:log'],
        'classify': True,
    },
    'uncharged-grid': {
        'model': AnalyticModel.FERMION_UNCHARGED_HOT_COLD,
        'axes': ['g=0.05:1:20', 'gammaB=0.5:20:20'],
        'classify': True,
    },
    'inversion-grid': {
        'model': AnalyticModel.FERMION_INVERSION,
        'axes': ['g=0.05:1:20', 'gammaB=0.5:20:20'],
        'classify': True,
    },
    'charged-grid': {
        'model': AnalyticModel.FERMION_CHARGED_COLD_B_UINF,
        'axes': ['g=0.05:1:20', 'gammaB=0.5:20:20'],
        'classify': True,
    },
}

def sweep_preset(name: str) -> dict:
    try:
        return dict(SWEEP_PRESETS[name])
    except KeyError:
        raise InvalidInput(
            f'Unknown sweep preset {name}; choose from {sorted(SWEEP_PRESETS)}'
        ) from None

# -------------------------------- Trade-off -----------------------------------
def _pgrid(*values):
    return [float(v) for v in values]

TRADEOFF_PRESETS = {
    'boson-singlet': {
        'model': AnalyticModel.BOSON_COLD_B,
        'objective': Objective.SINGLET_FRACTION,
        'pgrid': _pgrid(0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.45, 0.5),
        'scope': FilterScope.BOTH_QUBITS,
    },
    'charged-singlet': {
        'model': AnalyticModel.FERMION_CHARGED_COLD_B_UINF,
        'objective': Objective.SINGLET_FRACTION,
        'pgrid': _pgrid(0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.55, 0.6),
        'scope': FilterScope.BOTH_QUBITS,
    },
    'charged-chsh': {
        'model': AnalyticModel.FERMION_CHARGED_COLD_B_UINF,
        'objective': Objective.CHSH,
        'pgrid': _pgrid(0.005, 0.01, 0.02, 0.03, 0.035, 0.04, 0.05),
        'scope': FilterScope.BOTH_QUBITS,
    },
    'inversion-singlet': {
        'model': AnalyticModel.FERMION_INVERSION,
        'objective': Objective.SINGLET_FRACTION,
        'pgrid': _pgrid(0.001, 0.01, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0),
        'scope': FilterScope.QUBIT_B_ONLY,
        'steering': True,
    },
}
for _population in (1.0, 0.88, 0.75):
    _suffix = '' if _population == 1.0 else f'-{int(round(100 * _population))}'
    TRADEOFF_PRESETS[f'inversion-chsh{_suffix}'] = {
        'model': FermionChargedFinite.from_population(u = 20.0, population = _population),
        'objective': Objective.CHSH,
        'pgrid': _pgrid(0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3),
        'scope': FilterScope.QUBIT_B_ONLY,
    }

def tradeoff_preset(name: str) -> dict:
    try:
        return dict(TRADEOFF_PRESETS[name])
    except KeyError:
        raise InvalidInput(
            f'Unknown trade-off preset {name}; choose from {sorted(TRADEOFF_PRESETS)}'
        ) from None

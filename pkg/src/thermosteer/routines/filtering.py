"""
Local filters in the energy eigenbasis, heralded states and the search for
the best nonclassicality at a fixed heralding efficiency.

A filter on qubit k has the Kraus operator F_k = a_k |0><0| + b_k |1><1|
with a_k, b_k in [0, 1]. The heralded state only depends on the ratios
b_k/a_k; the overall scale of each filter only sets the heralding
efficiency. The optimizer uses this to meet the efficiency target exactly.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.optimize

from thermosteer.routines.definitions import *
from thermosteer.routines.linalg import kron
from thermosteer.routines.machine import (
    AnalyticModel, BathKind, MachineParams, TwoQubitState, XState,
    canonicalize_x_state, model_params, steady_state_analytic, steady_state_numeric,
    ta_for_population
)
from thermosteer.routines.nonclassicality import chsh_x, singlet_fraction_x
from thermosteer.routines.steering import dodecahedron_measurements, noise_robustness

__all__ = [
    'FilterPair',
    'HeraldResult',
    'FilterScope',
    'Objective',
    'FermionChargedFinite',
    'TradeoffPoint',
    'TradeoffCurve',
    'apply_filters',
    'herald_x',
    'pure_state_filter_target',
    'default_scope',
    'model_label',
    'optimize_tradeoff',
    'tradeoff_curve',
    'POPULATION_PRESETS',
    'PURE_FILTER_SLOPE',
]

logger = logging.getLogger(__name__)

HERALD_FLOOR = 1e-12
POPULATION_PRESETS = (1.0, 0.88, 0.75)

# The pure-state filter leaves a singlet deficit 1 - F that is linear in
# g/gammaA on the inverted machine (about 0.99 g at gammaB = gammaA). Heralded
# states are checked against 1 - PURE_FILTER_SLOPE * g/gammaA.
PURE_FILTER_SLOPE = 2.0

# =============================================================================
@dataclass(frozen = True)
class FilterPair:
    """Diagonal Kraus entries (aA, bA) on qubit A and (aB, bB) on qubit B."""
    aA: float = 1.0
    bA: float = 1.0
    aB: float = 1.0
    bB: float = 1.0

    def __post_init__(self):
        for name in ('aA', 'bA', 'aB', 'bB'):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise InvalidInput(f'Filter entry {name} = {value} lies outside [0, 1]')
            object.__setattr__(self, name, value)

    @classmethod
    def identity(cls) -> 'FilterPair':
        return cls(1.0, 1.0, 1.0, 1.0)

    @classmethod
    def from_ratios(cls, rA: float = 1.0, rB: float = 1.0) -> 'FilterPair':
        """Largest filters with b_k/a_k = r_k; the larger entry of each is 1."""
        return cls(
            aA = min(1.0, 1.0 / rA), bA = min(1.0, rA),
            aB = min(1.0, 1.0 / rB), bB = min(1.0, rB),
        )

    def kraus(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.diag([self.aA, self.bA]).astype(complex), np.diag([self.aB, self.bB]).astype(complex)

    def scaled(self, cA: float = 1.0, cB: float = 1.0) -> 'FilterPair':
        return FilterPair(
            min(cA * self.aA, 1.0), min(cA * self.bA, 1.0),
            min(cB * self.aB, 1.0), min(cB * self.bB, 1.0),
        )

    def scaled_to(self, p_from: float, p_to: float, scope: 'FilterScope') -> 'FilterPair':
        """
        Shrink the filter so that a heralding efficiency ``p_from`` becomes
        ``p_to`` <= ``p_from`` without changing the heralded state.
        """
        if not 0 < p_to <= p_from:
            raise InvalidInput(f'Cannot rescale heralding efficiency {p_from} to {p_to}')
        if FilterScope(scope) is FilterScope.QUBIT_B_ONLY:
            return self.scaled(cB = math.sqrt(p_to / p_from))
        c = (p_to / p_from)**0.25
        return self.scaled(c, c)

    def to_dict(self) -> dict:
        return {'aA': self.aA, 'bA': self.bA, 'aB': self.aB, 'bB': self.bB}

@dataclass
class HeraldResult:
    state: TwoQubitState
    p_suc: float

# ------------------------------------------------------------------------------
def apply_filters(state: TwoQubitState, f: FilterPair) -> HeraldResult:
    """
    Heralded state (F_A x F_B) rho (F_A x F_B)^dag / p_suc with the heralding
    efficiency p_suc = Tr((F_A^dag F_A x F_B^dag F_B) rho).

    :param state: Steady state.
    :type state: TwoQubitState
    :param f: Local filters.
    :type f: FilterPair
    :return: Normalized heralded state and p_suc.
    :rtype: HeraldResult
    :raises DegenerateHerald: when p_suc <= 1e-12.
    """
    FA, FB = f.kraus()
    K = kron(FA, FB)
    unnormalized = K @ state.rho @ K.conj().T
    p_suc = float(np.real(np.trace(unnormalized)))
    if p_suc <= HERALD_FLOOR:
        raise DegenerateHerald(f'Filter {f} heralds with probability {p_suc:.3e}')
    return HeraldResult(state = TwoQubitState(unnormalized / p_suc), p_suc = p_suc)

def herald_x(x: XState, f: FilterPair) -> Tuple[XState, float]:
    """
    X-form version of :func:`apply_filters`. Populations pick up the squared
    filter entries of their basis label and the coherence aA bB bA aB.
    """
    w1 = x.a1 * (f.aA * f.aB)**2
    w2 = x.a2 * (f.aA * f.bB)**2
    w3 = x.a3 * (f.bA * f.aB)**2
    w4 = max(x.a4, 0.0) * (f.bA * f.bB)**2
    p_suc = w1 + w2 + w3 + w4
    if p_suc <= HERALD_FLOOR:
        raise DegenerateHerald(f'Filter {f} heralds with probability {p_suc:.3e}')
    coherence = x.alpha * f.aA * f.bA * f.aB * f.bB
    return XState(a1 = w1 / p_suc, a2 = w2 / p_suc, a3 = w3 / p_suc, alpha = coherence / p_suc), p_suc

# ------------------------------------------------------------------------------
def pure_state_filter_target(x: XState, distance: float = 0.1) -> FilterPair:
    """
    Filter that equalizes the |01>, |10> amplitudes of the dominant
    eigenvector, turning a nearly pure entangled X-state into a state close
    to the singlet. The larger amplitude is attenuated on both qubits by the
    square root of the amplitude ratio.

    :param x: Canonical X-form.
    :type x: XState
    :param distance: Largest accepted 1 - lambda_max.
    :type distance: float
    :return: Filter pair.
    :rtype: FilterPair
    :raises NotNearPure: when the state is too mixed or its dominant
        eigenvector is a product state.
    """
    rho = x.to_matrix()
    values, vectors = np.linalg.eigh(rho)
    lam = values[-1]
    if 1.0 - lam > distance:
        raise NotNearPure(f'Largest eigenvalue {lam:.4f} is more than {distance} from one')
    v = vectors[:, -1]
    c01, c10 = abs(v[1]), abs(v[2])
    if 2.0 * c01 * c10 <= 1e-6:
        raise NotNearPure('Dominant eigenvector is not entangled')
    if c01 > c10:
        s = math.sqrt(c10 / c01)
        return FilterPair(aA = s, bA = 1.0, aB = 1.0, bB = s)
    s = math.sqrt(c01 / c10)
    return FilterPair(aA = 1.0, bA = s, aB = s, bB = 1.0)

# =============================================================================
class FilterScope(str, Enum):
    BOTH_QUBITS = 'BothQubits'
    QUBIT_B_ONLY = 'QubitBOnly'

class Objective(str, Enum):
    """
    Figures of merit of the heralded state. ``SteeringRobustness`` searches
    for the best singlet fraction and reports the dodecahedral noise
    robustness of the optimum.
    """
    SINGLET_FRACTION = 'SingletFraction'
    CHSH = 'Chsh'
    STEERING_ROBUSTNESS = 'SteeringRobustness'

    @property
    def threshold(self) -> float:
        return {'SingletFraction': 0.5, 'Chsh': 2.0, 'SteeringRobustness': 0.0}[self.value]

@dataclass(frozen = True)
class FermionChargedFinite:
    """
    Fermionic machine with a finite charge term, cold bath B and a fixed
    temperature of bath A. The steady state is computed numerically.
    """
    u: float = 20.0
    TA: float = 0.0
    limits: frozenset = frozenset({'TA_zero_minus'})

    @classmethod
    def from_population(cls, u: float = 20.0, population: float = 1.0) -> 'FermionChargedFinite':
        TA, flags = ta_for_population(population)
        return cls(u = u, TA = TA, limits = flags)

    @property
    def label(self) -> str:
        return f'FermionChargedFinite(u={self.u:g}, TA={self.params(0.1, 1.0).effective_TA():g})'

    def params(self, g: float, gammaB: float) -> MachineParams:
        return MachineParams(
            g = g, gammaA = 1.0, gammaB = gammaB, TA = self.TA, TB = 0.0, u = self.u,
            bath = BathKind.FERMIONIC, limits = self.limits | {'TB_zero'},
        )

TradeoffModel = Union[AnalyticModel, FermionChargedFinite]

def model_label(model: TradeoffModel) -> str:
    return model.label if isinstance(model, FermionChargedFinite) else AnalyticModel(model).value

def default_scope(model: TradeoffModel) -> FilterScope:
    """Single filter on B for the inverted machines, both filters otherwise."""
    if isinstance(model, FermionChargedFinite) or model is AnalyticModel.FERMION_INVERSION:
        return FilterScope.QUBIT_B_ONLY
    return FilterScope.BOTH_QUBITS

# =============================================================================
@dataclass
class TradeoffPoint:
    p_target: float
    objective: Objective
    value: float
    params: MachineParams
    filters: FilterPair
    p_suc: float
    seed: int
    smoothed: bool = False
    q_star: Optional[float] = None

    def to_row(self) -> dict:
        return {
            'p_target': self.p_target,
            'objective': self.objective.value,
            'value': self.value,
            'g': self.params.g,
            'gammaA': self.params.gammaA,
            'gammaB': self.params.gammaB,
            'TA': self.params.effective_TA(),
            'u': self.params.effective_u(),
            **self.filters.to_dict(),
            'seed': self.seed,
            'p_suc': self.p_suc,
            'smoothed': self.smoothed,
            'q_star': self.q_star,
        }

@dataclass
class TradeoffCurve:
    model: str
    objective: Objective
    scope: FilterScope
    points: List[TradeoffPoint] = field(default_factory = list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([point.to_row() for point in self.points])

    def values(self) -> np.ndarray:
        return np.array([point.value for point in self.points])

    # -------------------------------------------------------------------------
    def smooth(self) -> 'TradeoffCurve':
        """
        Enforce a non-increasing value along increasing p_suc. A point beaten
        by a point at larger p_suc takes over that point's machine and
        filter ratios, with the filters shrunk to its own target, and is
        flagged ``smoothed``.
        """
        best = None
        for i in range(len(self.points) - 1, -1, -1):
            point = self.points[i]
            if best is not None and point.value < best.value:
                logger.warning(
                    f'Trade-off value {point.value:.6f} at p_suc={point.p_target} is below '
                    f'{best.value:.6f} at p_suc={best.p_target}; smoothing'
                )
                self.points[i] = replace(
                    best,
                    p_target = point.p_target,
                    filters = best.filters.scaled_to(best.p_suc, point.p_target, self.scope),
                    p_suc = point.p_target,
                    seed = point.seed,
                    smoothed = True,
                )
            else:
                best = point
        return self

    # -------------------------------------------------------------------------
    def crossing(self, threshold: Optional[float] = None) -> Optional[float]:
        """
        Largest p_suc at which the curve still exceeds ``threshold``, by
        linear interpolation to the first point at or below it. None when
        no point exceeds the threshold.
        """
        if threshold is None:
            threshold = self.objective.threshold
        p = np.array([point.p_target for point in self.points])
        v = self.values()
        above = np.nonzero(v > threshold + THRESHOLD_TOL)[0]
        if above.size == 0:
            return None
        i = above[-1]
        if i == len(p) - 1:
            return float(p[i])
        return float(p[i] + (v[i] - threshold) * (p[i + 1] - p[i]) / (v[i] - v[i + 1]))

# =============================================================================
class _Search:
    """
    Penalized objective over one vector of log-parameters: log g and
    log gammaB (gammaA = 1), log TA for the models with a free bath A, then
    the log filter ratios b/a of the filtered qubits.
    """
    LOG_BOUNDS = {
        'g': (math.log(1e-4), math.log(1e2)),
        'gammaB': (math.log(1e-3), math.log(1e3)),
        'TA': (math.log(0.05), math.log(1e3)),
        'r': (-40.0, 40.0),
    }
    INITIAL = {
        'g': (math.log(0.01), math.log(2.0)),
        'gammaB': (math.log(0.05), math.log(20.0)),
        'TA': (math.log(0.2), math.log(20.0)),
        'r': (-4.0, 4.0),
    }

    def __init__(self, model, objective, p_target, scope, p_tol = P_TARGET_TOL):
        self.model = model
        self.p_tol = p_tol
        self.objective = objective
        self.p_target = p_target
        self.scope = scope
        self.names = ['g', 'gammaB']
        if model in (AnalyticModel.BOSON_COLD_B, AnalyticModel.FERMION_CHARGED_COLD_B_UINF):
            self.names.append('TA')
        self.identity = p_target >= 1.0 - THRESHOLD_TOL
        if not self.identity:
            self.names += ['r'] if scope is FilterScope.QUBIT_B_ONLY else ['r', 'r']
        self.weight = 1e2

    # -------------------------------------------------------------------------
    def initial(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([rng.uniform(*self.INITIAL[name]) for name in self.names])

    def clip(self, theta: np.ndarray) -> np.ndarray:
        lo = [self.LOG_BOUNDS[name][0] for name in self.names]
        hi = [self.LOG_BOUNDS[name][1] for name in self.names]
        return np.clip(theta, lo, hi)

    def machine(self, theta: np.ndarray) -> Tuple[MachineParams, XState]:
        g, gammaB = math.exp(theta[0]), math.exp(theta[1])
        model = self.model
        if isinstance(model, FermionChargedFinite):
            p = model.params(g, gammaB)
            # The steady state depends only on the ratios of g, gammaA and
            # gammaB; solve at a small common scale and report gammaA = 1
            c = 0.1 / max(g, 1.0, gammaB)
            rho = steady_state_numeric(p.scaled(c), check_regime = False)
            return p, canonicalize_x_state(rho)
        TA = math.exp(theta[2]) if 'TA' in self.names else None
        p = model_params(model, g, gammaB, TA)
        return p, steady_state_analytic(model, p)

    def filters(self, theta: np.ndarray) -> FilterPair:
        if self.identity:
            return FilterPair.identity()
        ratios = np.exp(theta[len(self.names) - (1 if self.scope is FilterScope.QUBIT_B_ONLY else 2):])
        if self.scope is FilterScope.QUBIT_B_ONLY:
            return FilterPair.from_ratios(1.0, ratios[0])
        return FilterPair.from_ratios(ratios[0], ratios[1])

    def value(self, x: XState) -> float:
        if self.objective is Objective.CHSH:
            return chsh_x(x)
        return singlet_fraction_x(x)

    # -------------------------------------------------------------------------
    def evaluate(self, theta: np.ndarray):
        """(params, filter at full scale, heralded state, p_max, value)"""
        theta = self.clip(theta)
        p, x = self.machine(theta)
        f = self.filters(theta)
        heralded, p_max = herald_x(x, f)
        return p, f, heralded, p_max, self.value(heralded)

    def penalized(self, theta: np.ndarray) -> float:
        try:
            _, _, _, p_max, value = self.evaluate(theta)
        except (DegenerateHerald, NonXState, NoKernel, DegenerateKernel):
            return 1e6
        shortfall = max(0.0, math.log(self.p_target) - math.log(p_max))
        return -value + self.weight * shortfall**2

    def feasible(self, p_max: float) -> bool:
        return self.p_target - p_max <= self.p_tol

    def finish(self, theta: np.ndarray, seed: int) -> Optional[TradeoffPoint]:
        """Rescale the filter onto the target; None if the target is out of reach."""
        try:
            p, f, heralded, p_max, value = self.evaluate(theta)
        except (DegenerateHerald, NonXState, NoKernel, DegenerateKernel):
            return None
        if not self.feasible(p_max):
            return None
        p_suc = p_max
        if p_max > self.p_target:
            f = f.scaled_to(p_max, self.p_target, self.scope)
            p_suc = self.p_target
        return TradeoffPoint(
            p_target = self.p_target, objective = self.objective, value = value,
            params = p, filters = f, p_suc = p_suc, seed = seed,
        )

# ------------------------------------------------------------------------------
def _restart(search: _Search, seed_sequence: np.random.SeedSequence, seed: int):
    rng = np.random.default_rng(seed_sequence)
    theta = search.initial(rng)
    local = _Search(search.model, search.objective, search.p_target, search.scope, search.p_tol)
    for weight in (1e2, 1e4, 1e6):
        local.weight = weight
        result = scipy.optimize.minimize(
            local.penalized, theta, method = 'Nelder-Mead',
            options = dict(xatol = 1e-9, fatol = 1e-12, maxiter = 400 * len(theta), adaptive = True)
        )
        theta = local.clip(result.x)
    point = local.finish(theta, seed)
    logger.debug(
        f'Restart at p_target={search.p_target}: '
        + ('infeasible' if point is None else f'value {point.value:.6f}')
    )
    return point

def optimize_tradeoff(
        model: TradeoffModel,
        objective: Union[Objective, str],
        p_target: float,
        filter_scope: Union[FilterScope, str, None] = None,
        seed: int = 0,
        restarts: int = 32,
        workers: Optional[int] = None,
        evaluate_steering: bool = False,
        p_tol: float = P_TARGET_TOL,
    ) -> TradeoffPoint:
    """
    Best value of the objective for the heralded state at heralding
    efficiency ``p_target``.

    Each restart runs Nelder-Mead on the log-parameters with a penalty on
    the shortfall of the largest reachable efficiency, under weights 1e2,
    1e4 and 1e6. The filters of the result are then shrunk onto
    ``p_target``. A target of 1 forces the identity filter.

    :param model: Analytic limit or a finite-charge fermionic machine.
    :param objective: Figure of merit.
    :param p_target: Heralding efficiency in (0, 1].
    :type p_target: float
    :param filter_scope: Filtered qubits; defaults per model.
    :param seed: Seed of the restart starting points.
    :type seed: int
    :param restarts: Number of random restarts.
    :type restarts: int
    :param workers: Thread pool size; 1 runs sequentially.
    :param evaluate_steering: Also compute the dodecahedral q* of the optimum.
    :type evaluate_steering: bool
    :return: The best point found.
    :rtype: TradeoffPoint
    :raises InfeasibleTarget: when no restart reaches ``p_target``.
    """
    if not isinstance(model, FermionChargedFinite):
        model = AnalyticModel(model)
    objective = Objective(objective)
    scope = default_scope(model) if filter_scope is None else FilterScope(filter_scope)
    if not 0 < p_target <= 1:
        raise InvalidInput(f'p_target must lie in (0, 1], got {p_target}')
    search = _Search(model, objective, p_target, scope, p_tol)

    children = np.random.SeedSequence(seed).spawn(restarts)
    def wrapper(child):
        return _restart(search, child, seed)

    if workers == 1:
        points = [wrapper(child) for child in children]
    else:
        with ThreadPoolExecutor(max_workers = workers) as executor:
            points = list(executor.map(wrapper, children))

    feasible = [point for point in points if point is not None]
    if not feasible:
        raise InfeasibleTarget(
            f'No restart of {model_label(model)} reached p_suc = {p_target}'
        )
    best = max(feasible, key = lambda point: point.value)

    if evaluate_steering or objective is Objective.STEERING_ROBUSTNESS:
        _, _, heralded, _, _ = search.evaluate(_theta_of(search, best))
        best.q_star = noise_robustness(TwoQubitState.from_x(heralded), dodecahedron_measurements())
        if objective is Objective.STEERING_ROBUSTNESS:
            best.value = best.q_star
    return best

def _theta_of(search: _Search, point: TradeoffPoint) -> np.ndarray:
    # Inverse of the parameter decoding; filter ratios survive the rescaling
    p, f = point.params, point.filters
    theta = [math.log(p.g), math.log(p.gammaB)]
    if 'TA' in search.names:
        theta.append(math.log(p.effective_TA()))
    if not search.identity:
        if search.scope is FilterScope.BOTH_QUBITS:
            theta.append(math.log(f.bA / f.aA))
        theta.append(math.log(f.bB / f.aB))
    return np.array(theta)

# ------------------------------------------------------------------------------
def tradeoff_curve(
        model: TradeoffModel,
        objective: Union[Objective, str],
        p_grid: Sequence[float],
        filter_scope: Union[FilterScope, str, None] = None,
        seed: int = 0,
        restarts: int = 32,
        workers: Optional[int] = None,
        evaluate_steering: bool = False,
        p_tol: float = P_TARGET_TOL,
    ) -> TradeoffCurve:
    """
    One :func:`optimize_tradeoff` point per efficiency in ``p_grid``
    (ascending in (0, 1]), smoothed to a non-increasing curve.
    """
    p_grid = [float(p) for p in p_grid]
    if not p_grid:
        raise InvalidInput('Empty p_suc grid')
    if any(p <= 0 or p > 1 for p in p_grid) or any(b <= a for a, b in zip(p_grid, p_grid[1:])):
        raise InvalidInput(f'p_suc grid must be strictly ascending in (0, 1], got {p_grid}')
    if not isinstance(model, FermionChargedFinite):
        model = AnalyticModel(model)
    objective = Objective(objective)
    scope = default_scope(model) if filter_scope is None else FilterScope(filter_scope)

    curve = TradeoffCurve(model = model_label(model), objective = objective, scope = scope)
    for p_target in p_grid:
        logger.info('%s: optimizing %s at p_suc = %s', curve.model, objective.value, p_target)
        curve.points.append(optimize_tradeoff(
            model, objective, p_target, scope, seed = seed, restarts = restarts,
            workers = workers, evaluate_steering = evaluate_steering, p_tol = p_tol,
        ))
    return curve.smooth()

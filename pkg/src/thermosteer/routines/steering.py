"""
Steering from qubit A to qubit B: assemblages for projective measurement
sets, local hidden state (LHS) feasibility as a conic program, white noise
robustness and a classifier for the measurement-unrestricted question.

The LHS states are written in Pauli coordinates, sigma = (c0 I + c.sigma)/2,
so each 2x2 positivity constraint is the second order cone c0 >= |c|.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import cvxpy as cp
import numpy as np
from scipy.spatial import ConvexHull

from thermosteer.routines.definitions import *
from thermosteer.routines.linalg import (
    allclose, hermitian_eigenvalues, kron, partial_trace_A, partial_transpose_B
)
from thermosteer.routines.machine import TwoQubitState

__all__ = [
    'MeasurementSet',
    'Assemblage',
    'LhsVerdict',
    'LhsCertificate',
    'SteerVerdict',
    'SteeringResult',
    'measurement_set',
    'pauli_measurements',
    'icosahedron_measurements',
    'dodecahedron_measurements',
    'geodesic_measurements',
    'inscribed_radius',
    'assemblage',
    'deterministic_strategies',
    'lhs_feasibility',
    'noise_robustness',
    'is_ppt',
    'steerability_classify',
    'STEER_MARGIN',
    'robustness_verdict',
]

logger = logging.getLogger(__name__)

MAX_STRATEGIES = 2**20
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

# Margin on q* above which an infeasible assemblage counts as steerable
STEER_MARGIN = 1e-6

# =============================================================================
@dataclass(frozen = True)
class MeasurementSet:
    """
    Projective qubit measurements given by unit Bloch vectors v_x, with
    A_{a|x} = (I + (-1)^a v_x.sigma)/2.
    """
    vectors: np.ndarray
    name: str = 'custom'

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.vectors, dtype = float))
        if V.ndim != 2 or V.shape[1] != 3 or V.shape[0] == 0:
            raise InvalidInput(f'Bloch vectors must have shape (N, 3), got {V.shape}')
        norms = np.linalg.norm(V, axis = 1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise InvalidInput('Measurement Bloch vectors must have unit norm')
        V.flags.writeable = False
        object.__setattr__(self, 'vectors', V)

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def projector(self, a: int, x: int) -> np.ndarray:
        v = self.vectors[x]
        vs = v[0] * sigma_x + v[1] * sigma_y + v[2] * sigma_z
        return 0.5 * (identity2 + (-1)**a * vs)

# ------------------------------------------------------------------------------
def measurement_set(vectors, name: str = 'custom') -> MeasurementSet:
    """Normalize the given directions into a measurement set."""
    V = np.atleast_2d(np.asarray(vectors, dtype = float))
    return MeasurementSet(V / np.linalg.norm(V, axis = 1, keepdims = True), name)

def pauli_measurements(n: int = 3) -> MeasurementSet:
    """x and z for n = 2, x, y and z for n = 3."""
    axes = {2: [[1, 0, 0], [0, 0, 1]], 3: [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}
    if n not in axes:
        raise InvalidInput(f'Pauli measurement sets have 2 or 3 settings, got {n}')
    return measurement_set(axes[n], name = f'pauli{n}')

def _one_per_pair(vertices: np.ndarray) -> np.ndarray:
    # Keep one vertex of each antipodal pair, in the order first met
    kept = []
    for v in vertices:
        if not any(np.allclose(v, -w) or np.allclose(v, w) for w in kept):
            kept.append(v)
    return np.array(kept)

def icosahedron_measurements() -> MeasurementSet:
    """Six axes through the antipodal vertex pairs of a regular icosahedron."""
    phi = GOLDEN
    vertices = []
    for s1, s2 in itertools.product((1, -1), repeat = 2):
        vertices += [(0, s1, s2 * phi), (s1, s2 * phi, 0), (s2 * phi, 0, s1)]
    return measurement_set(_one_per_pair(np.array(vertices, dtype = float)), 'icosahedron')

def dodecahedron_measurements() -> MeasurementSet:
    """
    Ten axes through the antipodal vertex pairs of the regular dodecahedron
    with vertices (+-1, +-1, +-1), (0, +-1/phi, +-phi), (+-1/phi, +-phi, 0)
    and (+-phi, 0, +-1/phi).
    """
    phi = GOLDEN
    vertices = [np.array(s, dtype = float) for s in itertools.product((1, -1), repeat = 3)]
    for s1, s2 in itertools.product((1, -1), repeat = 2):
        vertices += [
            np.array([0, s1 / phi, s2 * phi]),
            np.array([s1 / phi, s2 * phi, 0]),
            np.array([s1 * phi, 0, s2 / phi]),
        ]
    return measurement_set(_one_per_pair(np.array(vertices)), 'dodecahedron')

def geodesic_measurements() -> MeasurementSet:
    """The 16 axes of the icosahedron and dodecahedron together."""
    V = np.vstack([icosahedron_measurements().vectors, dodecahedron_measurements().vectors])
    return measurement_set(V, 'geodesic16')

# ------------------------------------------------------------------------------
def inscribed_radius(m: MeasurementSet) -> float:
    """Radius of the largest ball centred at 0 inside conv{+-v_x}."""
    points = np.vstack([m.vectors, -m.vectors])
    hull = ConvexHull(points)
    return float(np.min(-hull.equations[:, -1]))

# =============================================================================
class Assemblage:
    """
    Unnormalized conditional states sigma[a, x] held by B, stored as an
    array of shape (2, N, 2, 2).
    """
    def __init__(self, sigma, measurements: MeasurementSet, tol: float = 1e-10):
        S = np.asarray(sigma, dtype = complex)
        if S.shape != (2, len(measurements), 2, 2):
            raise DimensionMismatch(
                f'Assemblage shape {S.shape} does not match {len(measurements)} settings'
            )
        marginals = S.sum(axis = 0)
        for x in range(1, S.shape[1]):
            if not allclose(marginals[x], marginals[0], tol):
                raise InvalidInput(f'Assemblage signals: setting {x} changes the marginal')
        if abs(np.trace(marginals[0]) - 1.0) > tol:
            raise InvalidInput('Assemblage marginal is not normalized')
        S.flags.writeable = False
        self.sigma = S
        self.measurements = measurements

    @property
    def marginal(self) -> np.ndarray:
        return self.sigma[:, 0].sum(axis = 0)

def assemblage(state: TwoQubitState, m: MeasurementSet) -> Assemblage:
    """sigma_{a|x} = Tr_A((A_{a|x} x I) rho)"""
    sigma = np.empty((2, len(m), 2, 2), dtype = complex)
    for x in range(len(m)):
        for a in range(2):
            sigma[a, x] = partial_trace_A(kron(m.projector(a, x), identity2) @ state.rho)
    return Assemblage(sigma, m)

# ------------------------------------------------------------------------------
def deterministic_strategies(N: int, O: int = 2) -> np.ndarray:
    """
    All deterministic response functions: row lambda lists the outcome
    assigned to each of the N settings, O^N rows in lexicographic order.

    :raises SizeExceeded: when O^N exceeds 2^20.
    """
    if N < 1 or O < 1:
        raise InvalidInput(f'Need N >= 1 settings and O >= 1 outcomes, got {N}, {O}')
    if O**N > MAX_STRATEGIES:
        raise SizeExceeded(f'{O}^{N} deterministic strategies exceed the limit {MAX_STRATEGIES}')
    return np.array(list(itertools.product(range(O), repeat = N)), dtype = int)

# =============================================================================
class LhsVerdict(str, Enum):
    FEASIBLE = 'Feasible'
    INFEASIBLE = 'Infeasible'

@dataclass
class LhsCertificate:
    """
    Outcome of the LHS program. ``states`` holds the hidden states when
    Feasible; ``dual`` holds the multipliers of the reproduction constraints
    when Infeasible, whose functional separates the assemblage from the LHS
    set by ``margin``.
    """
    verdict: LhsVerdict
    q_star: float
    states: Optional[np.ndarray] = None
    dual: Optional[dict] = None
    margin: float = 0.0

class SteerVerdict(str, Enum):
    STEERABLE = 'Steerable'
    UNSTEERABLE = 'Unsteerable'
    UNDECIDED = 'Undecided'

@dataclass
class SteeringResult:
    verdict: SteerVerdict
    method: str = ''
    measurements: Optional[str] = None
    q_star: Optional[float] = None
    radius: Optional[float] = None
    notes: List[str] = field(default_factory = list)

# ------------------------------------------------------------------------------
def _pauli_coordinates(M: np.ndarray) -> np.ndarray:
    """(Tr M, Tr M sx, Tr M sy, Tr M sz) over the trailing 2x2 axes."""
    coords = [np.trace(M, axis1 = -2, axis2 = -1)]
    for s in PAULI:
        coords.append(np.einsum('...ab,ba->...', M, s))
    return np.real(np.stack(coords, axis = -1))

def _hidden_states(X: np.ndarray) -> np.ndarray:
    return 0.5 * (
        X[:, 0, None, None] * identity2
        + np.einsum('lk,kab->lab', X[:, 1:], np.array(PAULI))
    )

def _solve(problem: cp.Problem) -> None:
    if cp.CLARABEL in cp.installed_solvers():
        problem.solve(solver = cp.CLARABEL)
    else:
        problem.solve(solver = cp.SCS, eps = 1e-9, max_iters = 200000)
    logger.debug(f'LHS program status {problem.status}, value {problem.value}')

def _lhs_program(asm: Assemblage, q_fixed: Optional[float] = None):
    """
    Minimal white noise q such that the q-noisy assemblage has an LHS model:
    sum_lambda D(0|x, lambda) sigma_lambda = (1-q) sigma_{0|x} + q I/4 and
    sum_lambda sigma_lambda = (1-q) rho_B + q I/2. The outcome-1 elements
    follow from the marginal.
    """
    strategies = deterministic_strategies(len(asm.measurements), 2)
    D0 = (strategies == 0).astype(float).T
    target = _pauli_coordinates(asm.sigma[0])
    marginal = _pauli_coordinates(asm.marginal)
    noise_setting = np.array([0.5, 0.0, 0.0, 0.0])
    noise_marginal = np.array([1.0, 0.0, 0.0, 0.0])

    X = cp.Variable((strategies.shape[0], 4))
    q = cp.Variable() if q_fixed is None else q_fixed
    reproduce = D0 @ X == (1 - q) * target + q * np.tile(noise_setting, (D0.shape[0], 1))
    normalize = cp.sum(X, axis = 0) == (1 - q) * marginal + q * noise_marginal
    constraints = [cp.SOC(X[:, 0], X[:, 1:], axis = 1), reproduce, normalize]
    if q_fixed is None:
        constraints += [q >= 0, q <= 1]
        problem = cp.Problem(cp.Minimize(q), constraints)
    else:
        problem = cp.Problem(cp.Minimize(0), constraints)
    return problem, X, q, reproduce, normalize

def _accepted(problem: cp.Problem) -> bool:
    if problem.status == cp.OPTIMAL_INACCURATE:
        logger.warning('LHS program solved inaccurately')
    return problem.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)

# ------------------------------------------------------------------------------
def lhs_feasibility(asm: Assemblage, tol: float = FEASIBILITY_TOL) -> LhsCertificate:
    """
    Decide whether the assemblage admits an LHS model.

    The program minimizes the white noise needed for an LHS model; the
    assemblage is Feasible when that noise is at most ``tol``. Otherwise the
    multipliers of the reproduction constraints form the separating witness
    and the minimal noise is its margin.

    :param asm: Assemblage.
    :type asm: Assemblage
    :param tol: Feasibility tolerance on the noise rate.
    :type tol: float
    :return: Certificate.
    :rtype: LhsCertificate
    :raises SolverStalled: when the solver returns no optimal point.
    """
    problem, X, q, reproduce, normalize = _lhs_program(asm)
    _solve(problem)
    if not _accepted(problem):
        raise SolverStalled(f'LHS program ended with status {problem.status}')
    q_star = max(float(q.value), 0.0)
    if q_star <= tol:
        return LhsCertificate(
            verdict = LhsVerdict.FEASIBLE, q_star = q_star, states = _hidden_states(X.value)
        )
    return LhsCertificate(
        verdict = LhsVerdict.INFEASIBLE,
        q_star = q_star,
        dual = {
            'settings': np.asarray(reproduce.dual_value),
            'marginal': np.asarray(normalize.dual_value),
        },
        margin = q_star,
    )

def _feasible_at(asm: Assemblage, q_value: float) -> bool:
    problem = _lhs_program(asm, q_fixed = q_value)[0]
    _solve(problem)
    if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return False
    if not _accepted(problem):
        raise SolverStalled(f'LHS feasibility ended with status {problem.status}')
    return True

# ------------------------------------------------------------------------------
def noise_robustness(
        state: TwoQubitState,
        m: MeasurementSet,
        bisection_tol: float = 1e-4,
        tol: float = FEASIBILITY_TOL,
    ) -> float:
    """
    Critical white noise rate q*: the assemblage of (1-q) rho + q I/4 has an
    LHS model for every q >= q* and is steerable with ``m`` below it. States
    that are already LHS at q = 0 return 0.

    If the joint program stalls, q* is bracketed by bisection on [0, 1] with
    fixed-q feasibility as the oracle.
    """
    asm = assemblage(state, m)
    try:
        certificate = lhs_feasibility(asm, tol)
        return 0.0 if certificate.verdict is LhsVerdict.FEASIBLE else certificate.q_star
    except SolverStalled:
        logger.warning('Noise robustness program stalled; falling back to bisection')
    if _feasible_at(asm, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > bisection_tol:
        mid = 0.5 * (lo + hi)
        if _feasible_at(asm, mid):
            hi = mid
        else:
            lo = mid
    return hi

# ------------------------------------------------------------------------------
def is_ppt(state: TwoQubitState, tol: float = 1e-12) -> bool:
    """Positive partial transpose; for two qubits this is separability."""
    return bool(hermitian_eigenvalues(partial_transpose_B(state.rho))[-1] >= -tol)

def _shrunk_state(state: TwoQubitState, eta: float) -> Optional[TwoQubitState]:
    # rho with state = eta rho + (1 - eta) I/2 x rho_B, if it is a state
    rho_B = partial_trace_A(state.rho)
    rho = (state.rho - (1.0 - eta) * kron(identity2 / 2.0, rho_B)) / eta
    rho = 0.5 * (rho + rho.conj().T)
    if hermitian_eigenvalues(rho)[-1] < -1e-12:
        return None
    return TwoQubitState(rho, tol = 1e-12)

def steerability_classify(state: TwoQubitState, budget: int = 10) -> SteeringResult:
    """
    Steerability under all projective measurements on A.

    Steerable: some measurement set with at most ``budget`` settings gives
    an infeasible LHS program. Unsteerable: the state is PPT, or for a
    symmetric polytope conv{+-v_x} with inscribed radius eta the state
    (rho - (1 - eta) I/2 x rho_B)/eta is valid and LHS for the polytope's
    settings, since every projective measurement on rho is then a noisy
    mixture of the polytope measurements. Undecided otherwise, and when
    both certificates fire within solver tolerance.

    :param state: Two-qubit state.
    :type state: TwoQubitState
    :param budget: Largest number of measurement settings tried.
    :type budget: int
    :return: Verdict with the certificate used.
    :rtype: SteeringResult
    """
    if is_ppt(state):
        return SteeringResult(SteerVerdict.UNSTEERABLE, method = 'ppt')

    candidates = [
        pauli_measurements(2), pauli_measurements(3), icosahedron_measurements(),
        dodecahedron_measurements(), geodesic_measurements(),
    ]
    candidates = [m for m in candidates if len(m) <= budget]
    notes = []

    steerable = None
    for m in candidates:
        try:
            q_star = noise_robustness(state, m)
        except SolverStalled as e:
            notes.append(f'{m.name}: {e}')
            continue
        if q_star > STEER_MARGIN:
            steerable = SteeringResult(
                SteerVerdict.STEERABLE, method = 'finite-set', measurements = m.name,
                q_star = q_star
            )
            break

    unsteerable = None
    for m in candidates:
        if len(m) < 6:
            continue
        eta = inscribed_radius(m)
        shrunk = _shrunk_state(state, eta)
        if shrunk is None:
            continue
        try:
            certificate = lhs_feasibility(assemblage(shrunk, m))
        except SolverStalled as e:
            notes.append(f'{m.name} polytope: {e}')
            continue
        if certificate.verdict is LhsVerdict.FEASIBLE:
            unsteerable = SteeringResult(
                SteerVerdict.UNSTEERABLE, method = 'inner-polytope', measurements = m.name,
                radius = eta
            )
            break

    if steerable and unsteerable:
        logger.warning('Steerable and unsteerable certificates both fired; reporting Undecided')
        return SteeringResult(SteerVerdict.UNDECIDED, method = 'conflict', notes = notes)
    if steerable:
        steerable.notes = notes
        return steerable
    if unsteerable:
        unsteerable.notes = notes
        return unsteerable
    return SteeringResult(SteerVerdict.UNDECIDED, method = 'exhausted', notes = notes)

def robustness_verdict(state: TwoQubitState, q_star: Optional[float]) -> SteerVerdict:
    """
    Verdict from a finite-set noise robustness alone: Steerable when q* is
    positive, Unsteerable for PPT states, Undecided otherwise.
    """
    if q_star is not None and q_star > STEER_MARGIN:
        return SteerVerdict.STEERABLE
    if is_ppt(state):
        return SteerVerdict.UNSTEERABLE
    return SteerVerdict.UNDECIDED

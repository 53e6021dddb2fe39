#!/usr/bin/env python3
#
# Two-qubit autonomous thermal machine: parameters, bath statistics, the
# local Lindblad generator, steady states (numeric and closed form) and the
# canonical X-form of the steady state.
#
# -----------------------------------------------------------------------------

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import FrozenSet, List, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from thermosteer.routines.definitions import *
from thermosteer.routines.linalg import (
    as_matrix, devec, hermitian_eigenvalues, is_hermitian, kernel, kron, vec
)

__all__ = [
    'BathKind',
    'AnalyticModel',
    'MachineParams',
    'TwoQubitState',
    'XState',
    'occupation',
    'rates',
    'hamiltonian',
    'jump_operators',
    'build_liouvillian',
    'steady_state_numeric',
    'time_evolve',
    'steady_state_analytic',
    'model_params',
    'canonicalize_x_state',
    'ta_for_population',
    'inversion_optimal_g',
    'inversion_singlet_fraction',
    'CHARGED_ALPHA_BOUND',
    'CHARGED_SINGLET_BOUND',
    'charged_cold_b_bounds',
]

logger = logging.getLogger(__name__)

# Bounds on the steady state of the charged machine with a cold bath B
CHARGED_ALPHA_BOUND = math.sqrt(2.0 - math.sqrt(3.0)) / 4.0
CHARGED_SINGLET_BOUND = 0.3788

# =============================================================================
class BathKind(str, Enum):
    BOSONIC = 'bosonic'
    FERMIONIC = 'fermionic'

class AnalyticModel(str, Enum):
    """Limits in which the steady state is known in closed form."""
    BOSON_COLD_B = 'BosonColdB'
    FERMION_UNCHARGED_HOT_COLD = 'FermionUnchargedHotColdLimit'
    FERMION_CHARGED_COLD_B_UINF = 'FermionChargedColdB_uInf'
    FERMION_INVERSION = 'FermionInversion'

# =============================================================================
@dataclass(frozen = True)
class MachineParams:
    """
    Physical configuration of the machine. Energies, rates and temperatures
    are in units of E = 1.

    Limits are carried as flags rather than large numbers: ``TA_inf``
    (TA -> +inf), ``TB_zero`` (TB -> 0+), ``TA_zero_minus`` (TA -> 0-, full
    inversion of a fermionic bath) and ``u_inf`` (u -> inf). When a flag is
    set the corresponding numeric field is ignored.
    """
    g: float
    gammaA: float = 1.0
    gammaB: float = 1.0
    TA: float = 1.0
    TB: float = 0.0
    u: float = 0.0
    bath: BathKind = BathKind.FERMIONIC
    limits: FrozenSet[str] = field(default_factory = frozenset)

    def __post_init__(self):
        object.__setattr__(self, 'bath', BathKind(self.bath))
        object.__setattr__(self, 'limits', frozenset(self.limits))
        for name in ('g', 'gammaA', 'gammaB', 'TA', 'TB', 'u'):
            object.__setattr__(self, name, float(getattr(self, name)))
        self.parameter_check()

    # -------------------------------------------------------------------------
    def parameter_check(self) -> None:
        unknown = self.limits - LIMIT_FLAGS
        if unknown:
            raise InvalidParams(f'Unknown limit flags {sorted(unknown)}')
        if {'TA_inf', 'TA_zero_minus'} <= self.limits:
            raise InvalidParams('TA_inf and TA_zero_minus are mutually exclusive')
        if not (self.g >= 0 and math.isfinite(self.g)):
            raise InvalidParams(f'g must be finite and non-negative, got {self.g}')
        if not (self.gammaA > 0 and self.gammaB > 0):
            raise InvalidParams('gammaA and gammaB must be positive')
        if not (math.isfinite(self.gammaA) and math.isfinite(self.gammaB)):
            raise InvalidParams('gammaA and gammaB must be finite')
        if 'u_inf' not in self.limits and not (self.u >= 0 and math.isfinite(self.u)):
            raise InvalidParams(f'u must be finite and non-negative, got {self.u}')

        TA = self.effective_TA()
        TB = self.effective_TB()
        if math.isnan(TA) or math.isnan(TB):
            raise InvalidTemperature('Temperatures must not be NaN')
        if TB < 0 or math.copysign(1.0, TB) < 0:
            raise InvalidTemperature(f'TB must be non-negative, got {TB}')
        if self.bath is BathKind.BOSONIC:
            if self.is_charged():
                raise InvalidParams('Bosonic baths are only treated with u = 0')
            if TA < 0 or math.copysign(1.0, TA) < 0:
                raise InvalidTemperature('Bosonic baths cannot have negative temperature')

    # -------------------------------------------------------------------------
    def effective_TA(self) -> float:
        if 'TA_inf' in self.limits:
            return math.inf
        if 'TA_zero_minus' in self.limits:
            return -0.0
        return self.TA

    def effective_TB(self) -> float:
        if 'TB_zero' in self.limits:
            return 0.0
        return self.TB

    def effective_u(self) -> float:
        return math.inf if 'u_inf' in self.limits else self.u

    def is_charged(self) -> bool:
        return 'u_inf' in self.limits or self.u > 0

    def is_regime_valid(self) -> bool:
        """
        g <= max(gammaA, gammaB) and max(g, gammaA, gammaB) <= 0.1 min(E, u)
        """
        u_eff = self.effective_u() if self.is_charged() else math.inf
        largest = max(self.g, self.gammaA, self.gammaB)
        return (
            self.g <= max(self.gammaA, self.gammaB)
            and largest <= 0.1 * min(E, u_eff)
        )

    def scaled(self, c: float) -> 'MachineParams':
        """Multiply (g, gammaA, gammaB) by c > 0."""
        return replace(
            self, g = c * self.g, gammaA = c * self.gammaA, gammaB = c * self.gammaB
        )

    def with_(self, **changes) -> 'MachineParams':
        return replace(self, **changes)

    # -------------------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            'bath': self.bath.value,
            'g': self.g,
            'u': self.u,
            'gammaA': self.gammaA,
            'gammaB': self.gammaB,
            'TA': self.TA,
            'TB': self.TB,
            'limits': sorted(self.limits),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'MachineParams':
        """
        Build from the flat JSON object {bath, g, u, gammaA, gammaB, TA, TB,
        limits}. Temperatures may be null when a limit flag replaces them.
        """
        try:
            kwargs = {
                'g': data['g'],
                'gammaA': data.get('gammaA', 1.0),
                'gammaB': data.get('gammaB', 1.0),
                'bath': data.get('bath', BathKind.FERMIONIC.value),
                'limits': frozenset(data.get('limits') or ()),
            }
        except (KeyError, TypeError) as e:
            raise InvalidParams(f'Malformed machine parameters: {e}') from e
        for key, default in (('TA', 1.0), ('TB', 0.0), ('u', 0.0)):
            value = data.get(key, default)
            kwargs[key] = default if value is None else value
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as e:
            if isinstance(e, ThermosteerError):
                raise
            raise InvalidParams(str(e)) from e

# =============================================================================
class TwoQubitState:
    """
    A validated two-qubit density matrix in the |00>, |01>, |10>, |11>
    ordering. The matrix is stored read-only.
    """
    def __init__(self, rho, tol: float = PSD_TOL):
        R = as_matrix(rho, square = True)
        if R.shape != (4, 4):
            raise DimensionMismatch(f'Two-qubit state must be 4x4, got {R.shape}')
        if not is_hermitian(R, HERMITIAN_TOL):
            raise NotHermitian('Density matrix is not Hermitian')
        if abs(np.trace(R) - 1.0) > max(TRACE_TOL, tol):
            raise InvalidInput(f'Density matrix has trace {np.trace(R).real:.12f}')
        R = 0.5 * (R + R.conj().T)
        eigenvalues = hermitian_eigenvalues(R)
        if eigenvalues[-1] < -tol:
            raise InvalidInput(
                f'Density matrix has negative eigenvalue {eigenvalues[-1]:.3e}'
            )
        R.flags.writeable = False
        self.rho = R

    def __repr__(self):
        return f'TwoQubitState({np.array2string(self.rho, precision = 4)})'

    @classmethod
    def from_x(cls, x: 'XState') -> 'TwoQubitState':
        return cls(x.to_matrix())

    @classmethod
    def from_ket(cls, psi) -> 'TwoQubitState':
        psi = np.asarray(psi, dtype = complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls) -> 'TwoQubitState':
        return cls(identity4 / 4.0)

    def mix_white_noise(self, q: float) -> 'TwoQubitState':
        """(1 - q) rho + q I/4"""
        return TwoQubitState((1.0 - q) * self.rho + q * identity4 / 4.0)

# =============================================================================
@dataclass(frozen = True)
class XState:
    """
    Canonical X-form: populations a1, a2, a3 of |00>, |01>, |10> and the
    coherence magnitude alpha, with rho[|01>, |10>] = -alpha.
    """
    a1: float
    a2: float
    a3: float
    alpha: float

    def __post_init__(self):
        for name in ('a1', 'a2', 'a3', 'alpha'):
            object.__setattr__(self, name, float(getattr(self, name)))
        tol = 1e-10
        if min(self.a1, self.a2, self.a3, self.alpha) < -tol:
            raise NonXState(f'Negative X-form entry in {self}')
        if self.a1 + self.a2 + self.a3 > 1.0 + tol:
            raise NonXState(f'Populations exceed one in {self}')
        if self.alpha > math.sqrt(max(self.a2 * self.a3, 0.0)) + tol:
            raise NonXState(f'Coherence violates positivity in {self}')

    @property
    def a4(self) -> float:
        return 1.0 - self.a1 - self.a2 - self.a3

    @property
    def delta(self) -> float:
        return self.a2 + self.a3

    def to_matrix(self) -> np.ndarray:
        rho = np.diag([self.a1, self.a2, self.a3, max(self.a4, 0.0)]).astype(complex)
        rho[1, 2] = -self.alpha
        rho[2, 1] = -self.alpha
        return rho

# ------------------------------------------------------------------------------
def occupation(bath: BathKind, eps: float, T: float) -> float:
    """
    Mean occupation of a bath mode at energy ``eps``.

    Bose-Einstein n = 1/(exp(eps/T) - 1) needs T > 0; T = +0 gives 0.
    Fermi-Dirac n = 1/(1 + exp(eps/T)) with the limits T -> 0+ (0),
    T -> 0- (1, written as -0.0) and T -> +-inf (1/2). An infinite ``eps``
    is the u -> inf transition and gives 0 for T > 0 (including +inf) and 1
    for T < 0.

    :param bath: Bath statistics.
    :type bath: BathKind
    :param eps: Transition energy, > 0.
    :type eps: float
    :param T: Temperature; the sign of zero selects the one-sided limit.
    :type T: float
    :return: Occupation number.
    :rtype: float
    """
    bath = BathKind(bath)
    eps = float(eps)
    T = float(T)
    if not eps > 0:
        raise InvalidParams(f'Transition energy must be positive, got {eps}')
    if math.isnan(T):
        raise InvalidTemperature('Temperature is NaN')
    negative = math.copysign(1.0, T) < 0

    if bath is BathKind.BOSONIC:
        if negative:
            raise InvalidTemperature(f'Bosonic bath requires T > 0, got {T}')
        if T == 0 or math.isinf(eps):
            return 0.0
        if math.isinf(T):
            raise InvalidTemperature('Bosonic occupation diverges at infinite temperature')
        with np.errstate(over = 'ignore'):
            return float(1.0 / np.expm1(eps / T))

    if math.isinf(eps) or T == 0:
        return 1.0 if negative else 0.0
    if math.isinf(T):
        return 0.5
    return float(expit(-eps / T))

# ------------------------------------------------------------------------------
def rates(bath: BathKind, gamma: float, eps: float, T: float) -> Tuple[float, float]:
    """
    Rates (Gamma+, Gamma-) of receiving and losing an excitation. Bosonic:
    (gamma n, gamma (1 + n)); fermionic: (gamma n, gamma (1 - n)).
    """
    if not gamma > 0:
        raise InvalidParams(f'gamma must be positive, got {gamma}')
    n = occupation(bath, eps, T)
    if BathKind(bath) is BathKind.BOSONIC:
        return gamma * n, gamma * (1.0 + n)
    return gamma * n, gamma * (1.0 - n)

# ------------------------------------------------------------------------------
def _ket_bra(row: str, col: str) -> np.ndarray:
    return np.outer(basis_ket(row), basis_ket(col).conj())

def hamiltonian(p: MachineParams) -> np.ndarray:
    """H_A + H_B + g(|01><10| + |10><01|) + u|11><11|"""
    H = E * kron(projector1, identity2) + E * kron(identity2, projector1)
    H = H + p.g * (_ket_bra('01', '10') + _ket_bra('10', '01'))
    if p.is_charged():
        u = U_PROXY if 'u_inf' in p.limits else p.u
        H = H + u * _ket_bra('11', '11')
    return H

# ------------------------------------------------------------------------------
def jump_operators(p: MachineParams) -> List[Tuple[np.ndarray, float, float]]:
    """
    Raising jump operators with their (Gamma+, Gamma-) rates. The lowering
    operator of each entry is its adjoint.

    Uncharged: J_A = |1><0| x I and J_B = I x |1><0| at energy E. Charged:
    J_A0 = |10><00|, J_A1 = |11><01|, J_B0 = |01><00|, J_B1 = |11><10| at
    energies E, E + u, E, E + u.
    """
    TA = p.effective_TA()
    TB = p.effective_TB()
    if not p.is_charged():
        return [
            (kron(raising, identity2), *rates(p.bath, p.gammaA, E, TA)),
            (kron(identity2, raising), *rates(p.bath, p.gammaB, E, TB)),
        ]
    Eu = E + p.effective_u()
    return [
        (_ket_bra('10', '00'), *rates(p.bath, p.gammaA, E, TA)),
        (_ket_bra('11', '01'), *rates(p.bath, p.gammaA, Eu, TA)),
        (_ket_bra('01', '00'), *rates(p.bath, p.gammaB, E, TB)),
        (_ket_bra('11', '10'), *rates(p.bath, p.gammaB, Eu, TB)),
    ]

# ------------------------------------------------------------------------------
def _dissipator(J: np.ndarray) -> np.ndarray:
    JdJ = J.conj().T @ J
    return (
        kron(J.conj(), J)
        - 0.5 * kron(identity4, JdJ)
        - 0.5 * kron(JdJ.T, identity4)
    )

def build_liouvillian(p: MachineParams) -> np.ndarray:
    """
    Superoperator L with vec(d rho/dt) = L vec(rho) for the column-stacked
    density matrix, d rho/dt = i[rho, H] + sum Gamma+ D[J] + Gamma- D[J^dag].

    :param p: Machine parameters.
    :type p: MachineParams
    :return: 16x16 complex matrix.
    :rtype: np.ndarray
    """
    H = hamiltonian(p)
    L = -1j * (kron(identity4, H) - kron(H.T, identity4))
    for J, gamma_plus, gamma_minus in jump_operators(p):
        if gamma_plus > 0:
            L = L + gamma_plus * _dissipator(J)
        if gamma_minus > 0:
            L = L + gamma_minus * _dissipator(J.conj().T)
    return L

# ------------------------------------------------------------------------------
def _warn_regime(p: MachineParams) -> None:
    if not p.is_regime_valid():
        logger.warning(
            f'Parameters outside the local master equation regime: g={p.g}, '
            f'gammaA={p.gammaA}, gammaB={p.gammaB}, u={p.effective_u()}'
        )

def steady_state_numeric(
        p: MachineParams,
        rtol: float = KERNEL_RANK_TOL,
        check_regime: bool = True,
    ) -> TwoQubitState:
    """
    Trace-normalized kernel of the Liouvillian. With ``check_regime`` a
    warning is logged for parameters outside the weak coupling regime.

    :raises NoKernel: the generator has full numerical rank.
    :raises DegenerateKernel: more than one steady state.
    """
    if check_regime:
        _warn_regime(p)
    basis = kernel(build_liouvillian(p), rtol)
    if basis.shape[1] == 0:
        raise NoKernel(f'Liouvillian has no kernel for {p}')
    if basis.shape[1] > 1:
        raise DegenerateKernel(
            f'Liouvillian kernel has dimension {basis.shape[1]} for {p}'
        )
    rho = devec(basis[:, 0])
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return TwoQubitState(rho)

# ------------------------------------------------------------------------------
def time_evolve(
        p: MachineParams,
        rho0: TwoQubitState,
        t: float,
        max_steps: int = 10**12,
    ) -> TwoQubitState:
    """
    Fixed-step fourth order Runge-Kutta integration of vec(rho') = L vec(rho)
    with step h <= 0.01/||L||. For a linear generator one RK4 step is the
    matrix polynomial P = I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24, so the n
    steps are applied as P^n by repeated squaring.

    :param p: Machine parameters.
    :type p: MachineParams
    :param rho0: Initial state.
    :type rho0: TwoQubitState
    :param t: Duration, >= 0.
    :type t: float
    :param max_steps: Largest number of steps accepted.
    :type max_steps: int
    :return: State at time t.
    :rtype: TwoQubitState
    """
    if t < 0:
        raise InvalidInput(f'Duration must be non-negative, got {t}')
    if t == 0:
        return rho0
    L = build_liouvillian(p)
    h_max = 0.01 / np.linalg.norm(L, 2)
    nsteps = int(math.ceil(t / h_max))
    if nsteps > max_steps or t / nsteps < np.finfo(float).eps * t:
        raise StepSizeUnderflow(
            f'Integration to t={t} needs {nsteps} steps of size {t / nsteps:.3e}'
        )
    hL = (t / nsteps) * L
    eye = np.eye(16, dtype = complex)
    P = eye + hL @ (eye + hL @ (eye / 2 + hL @ (eye / 6 + hL / 24)))
    v = np.linalg.matrix_power(P, nsteps) @ vec(rho0.rho)
    rho = devec(v)
    rho = 0.5 * (rho + rho.conj().T)
    return TwoQubitState(rho, tol = 1e-7)

# ------------------------------------------------------------------------------
def _is_zero_temperature(T: float) -> bool:
    return T == 0 and math.copysign(1.0, T) > 0

def _check_model(model: AnalyticModel, p: MachineParams) -> None:
    TA = p.effective_TA()
    TB = p.effective_TB()
    problems = []
    if model is AnalyticModel.BOSON_COLD_B:
        if p.bath is not BathKind.BOSONIC:
            problems.append('requires a bosonic bath')
        if not _is_zero_temperature(TB):
            problems.append('requires TB -> 0')
        if not (TA > 0 and math.isfinite(TA)):
            problems.append('requires a finite TA > 0')
    elif model is AnalyticModel.FERMION_UNCHARGED_HOT_COLD:
        if p.bath is not BathKind.FERMIONIC or p.is_charged():
            problems.append('requires uncharged fermions')
        if not (math.isinf(TA) and TA > 0):
            problems.append('requires TA -> inf')
        if not _is_zero_temperature(TB):
            problems.append('requires TB -> 0')
    elif model is AnalyticModel.FERMION_CHARGED_COLD_B_UINF:
        if p.bath is not BathKind.FERMIONIC or 'u_inf' not in p.limits:
            problems.append('requires fermions with u -> inf')
        if not _is_zero_temperature(TB):
            problems.append('requires TB -> 0')
        if not TA > 0:
            problems.append('requires TA > 0')
    elif model is AnalyticModel.FERMION_INVERSION:
        if p.bath is not BathKind.FERMIONIC:
            problems.append('requires a fermionic bath')
    if problems:
        raise ModelMismatch(f'{model.value} ' + ', '.join(problems) + f'; got {p}')

def _inversion(g, gA, gB) -> XState:
    t = gA + gB
    N = t**2 * (4 * g**2 + gA * gB)
    return XState(
        a1 = 4 * g**2 * gB**2 / N,
        a2 = 4 * g**2 * gA * gB / N,
        a3 = gA * gB * (4 * g**2 + t**2) / N,
        alpha = 2 * t * g * gA * gB / N,
    )

def _uncharged_hot_cold(g, gA, gB) -> XState:
    t = gA + gB
    s = gA + 2 * gB
    N2 = 2 * t**2 * (4 * g**2 + gA * gB)
    return XState(
        a1 = (gA * gB * t**2 + 2 * g**2 * s**2) / N2,
        a2 = 2 * g**2 * gA * s / N2,
        a3 = gA * (gB * t**2 + 2 * g**2 * s) / N2,
        alpha = 2 * g * t * gA * gB / N2,
    )

def _charged_cold_b(g, gA, gB, TA) -> XState:
    # Written with w = exp(-1/TA) in (0, 1] so that cold baths do not overflow
    t = gA + gB
    w = 1.0 if math.isinf(TA) else math.exp(-1.0 / TA)
    D = 4 * g**2 * (gA * (2 * w + 1) + gB * (w + 1)) + gA * gB * (gB * w + t)
    a1 = (4 * g**2 * (1 + w) + gA * gB) * (gB * w + t) / ((1 + w) * D)
    a2 = 4 * g**2 * gA * w / D
    return XState(
        a1 = a1,
        a2 = a2,
        a3 = 1.0 - a1 - a2,
        alpha = 2 * g * gA * gB * w / D,
    )

def _boson_cold_b(g, gA, gB, TA) -> XState:
    # Written with the occupation n of bath A. The closed form labels the
    # doubly excited population first; it is mapped to |00>,...,|11> here.
    n = occupation(BathKind.BOSONIC, E, TA)
    t = gA + gB
    s = gA + 2 * gB
    K = 4 * g**2 + gA * gB * (1 + 2 * n)
    R = t + 2 * gA * n
    p11 = 4 * g**2 * gA**2 * n**2 / (R**2 * K)
    numerator = (
        (4 * g**2 + (gA - gB)**2) * gB * n**2
        + t * (n + 1)**2 * (4 * g**2 + gB * t)
        - 2 * n * (n + 1) * (-gA**2 * gB + gB**3 + 2 * g**2 * s)
    )
    p10 = gA * numerator * n / (K * R**2)
    p01 = 4 * g**2 * gA * n * (t + gA * n) / (K * R**2)
    return XState(
        a1 = 1.0 - p01 - p10 - p11,
        a2 = p01,
        a3 = p10,
        alpha = 2 * g * gA * gB * n / (K * R),
    )

def steady_state_analytic(
        model: Union[AnalyticModel, str],
        p: MachineParams
    ) -> XState:
    """
    Closed-form canonical steady state in one of the analytic limits.

    - ``BosonColdB``: bosonic baths, TB -> 0, finite TA > 0.
    - ``FermionUnchargedHotColdLimit``: u = 0, TA -> inf, TB -> 0.
    - ``FermionChargedColdB_uInf``: u -> inf, TB -> 0, TA > 0 (may be inf).
    - ``FermionInversion``: TA -> 0-, TB -> 0+; temperatures and u ignored.

    :param model: Analytic limit.
    :param p: Machine parameters consistent with the limit.
    :type p: MachineParams
    :return: Canonical X-form.
    :rtype: XState
    :raises ModelMismatch: when ``p`` is not in the model's limit.
    """
    model = AnalyticModel(model)
    _check_model(model, p)
    g, gA, gB = p.g, p.gammaA, p.gammaB
    if model is AnalyticModel.FERMION_INVERSION:
        return _inversion(g, gA, gB)
    if model is AnalyticModel.FERMION_UNCHARGED_HOT_COLD:
        return _uncharged_hot_cold(g, gA, gB)
    if model is AnalyticModel.FERMION_CHARGED_COLD_B_UINF:
        return _charged_cold_b(g, gA, gB, p.effective_TA())
    return _boson_cold_b(g, gA, gB, p.effective_TA())

# ------------------------------------------------------------------------------
def canonicalize_x_state(
        state: Union[TwoQubitState, np.ndarray],
        tol: float = X_SUPPORT_TOL
    ) -> XState:
    """
    Read off (a1, a2, a3, |alpha|). The phase of the |01>,|10> coherence is
    absorbed by U = |0><0| + exp(i phi)|1><1| on qubit A, which leaves every
    nonclassicality functional unchanged.

    :raises NonXState: when an entry outside the X support exceeds ``tol``.
    """
    rho = state.rho if isinstance(state, TwoQubitState) else as_matrix(state, square = True)
    mask = np.ones((4, 4), dtype = bool)
    np.fill_diagonal(mask, False)
    mask[1, 2] = mask[2, 1] = False
    worst = np.max(np.abs(rho[mask]))
    if worst > tol:
        raise NonXState(f'Entry outside the X support has magnitude {worst:.3e}')
    a = np.real(np.diag(rho))
    alpha = abs(rho[1, 2])
    # Numerical kernels can leave alpha a hair above sqrt(a2 a3)
    alpha = min(alpha, math.sqrt(max(a[1] * a[2], 0.0)))
    return XState(
        a1 = max(a[0], 0.0), a2 = max(a[1], 0.0), a3 = max(a[2], 0.0), alpha = alpha
    )

# ------------------------------------------------------------------------------
def ta_for_population(population: float) -> Tuple[float, FrozenSet[str]]:
    """
    Temperature of a fermionic bath whose excited level at E holds the given
    population, n_FD(E, TA) = population. Returns (TA, limit flags); a full
    population maps to the TA -> 0- flag and one half to TA -> inf.
    """
    if not 0 < population <= 1:
        raise InvalidParams(f'Population must lie in (0, 1], got {population}')
    if population == 1.0:
        return 0.0, frozenset({'TA_zero_minus'})
    if population == 0.5:
        return math.inf, frozenset({'TA_inf'})
    return E / math.log((1.0 - population) / population), frozenset()

# ------------------------------------------------------------------------------
def inversion_optimal_g(gammaB: float, gammaA: float = 1.0) -> float:
    """
    Coupling maximizing the singlet fraction of the inverted machine at fixed
    rates. With r = gammaB/gammaA,
    g*/gammaA = (sqrt(1 + 4r + 10r^2 + 4r^3 + r^4) - 1 - r^2) / (4(1 + r)).
    """
    r = gammaB / gammaA
    root = math.sqrt(1 + 4 * r + 10 * r**2 + 4 * r**3 + r**4)
    return gammaA * (root - 1 - r**2) / (4 * (1 + r))

def inversion_singlet_fraction(g: float, gammaA: float, gammaB: float) -> float:
    """F = gA gB (8g^2 + 4gt + t^2) / (2 t^2 (4g^2 + gA gB))"""
    t = gammaA + gammaB
    return gammaA * gammaB * (8 * g**2 + 4 * g * t + t**2) / (
        2 * t**2 * (4 * g**2 + gammaA * gammaB)
    )

def charged_cold_b_bounds() -> dict:
    """Upper bounds on alpha and the singlet fraction for FermionChargedColdB_uInf."""
    return {'alpha': CHARGED_ALPHA_BOUND, 'singlet_fraction': CHARGED_SINGLET_BOUND}

# ------------------------------------------------------------------------------
def model_params(
        model: Union[AnalyticModel, str],
        g: float,
        gammaB: float,
        TA: Optional[float] = None,
        gammaA: float = 1.0,
    ) -> MachineParams:
    """
    Parameters in the limit of an analytic model. ``TA`` is required for
    BosonColdB; for FermionChargedColdB_uInf None means TA -> inf. The other
    models fix their temperatures and ignore it.
    """
    model = AnalyticModel(model)
    if model is AnalyticModel.FERMION_INVERSION:
        return MachineParams(g = g, gammaA = gammaA, gammaB = gammaB,
                             limits = {'TA_zero_minus', 'TB_zero'})
    if model is AnalyticModel.FERMION_UNCHARGED_HOT_COLD:
        return MachineParams(g = g, gammaA = gammaA, gammaB = gammaB,
                             limits = {'TA_inf', 'TB_zero'})
    if model is AnalyticModel.FERMION_CHARGED_COLD_B_UINF:
        if TA is None or math.isinf(TA):
            return MachineParams(g = g, gammaA = gammaA, gammaB = gammaB,
                                 limits = {'TA_inf', 'u_inf', 'TB_zero'})
        return MachineParams(g = g, gammaA = gammaA, gammaB = gammaB, TA = TA,
                             limits = {'u_inf', 'TB_zero'})
    if TA is None:
        raise InvalidParams('BosonColdB needs a finite temperature TA')
    return MachineParams(g = g, gammaA = gammaA, gammaB = gammaB, TA = TA,
                         bath = BathKind.BOSONIC, limits = {'TB_zero'})

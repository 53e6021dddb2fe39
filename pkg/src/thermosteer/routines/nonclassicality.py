import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional

import numpy as np
import scipy.optimize

from thermosteer.routines.definitions import *
from thermosteer.routines.linalg import hermitian_eigenvalues, kron
from thermosteer.routines.machine import TwoQubitState, XState, canonicalize_x_state

__all__ = [
    'NonclassicalityReport',
    'correlation_matrix',
    'singlet_fraction_x',
    'singlet_fraction_general',
    'teleportation_fidelity',
    'chsh_x',
    'chsh_max',
    'no_go_predicates',
    'concurrence_x',
    'concurrence',
    'purity',
    'report',
    'random_x_state',
]

logger = logging.getLogger(__name__)

TSIRELSON = 2.0 * math.sqrt(2.0)

# ------------------------------------------------------------------------------
def correlation_matrix(state: TwoQubitState) -> np.ndarray:
    """T_ij = Tr(rho sigma_i x sigma_j) with i, j running over x, y, z."""
    T = np.empty((3, 3))
    for i, si in enumerate(PAULI):
        for j, sj in enumerate(PAULI):
            T[i, j] = np.real(np.trace(state.rho @ kron(si, sj)))
    return T

# ------------------------------------------------------------------------------
def singlet_fraction_x(x: XState) -> float:
    """
    Singlet fraction of a canonical X-state with Delta = a2 + a3:
    alpha + Delta/2 when 1 + 2 alpha - 2 Delta <= 0, otherwise
    max(alpha + Delta/2, (1 - Delta)/2).
    """
    delta = x.delta
    entangled = x.alpha + delta / 2.0
    if 1.0 + 2.0 * x.alpha - 2.0 * delta <= 0:
        return entangled
    return max(entangled, (1.0 - delta) / 2.0)

# ------------------------------------------------------------------------------
def _unitaries(mu, theta, phi) -> np.ndarray:
    """U = cos(mu) I + i sin(mu) n.sigma, broadcast over the angle arrays."""
    mu, theta, phi = np.broadcast_arrays(mu, theta, phi)
    n = np.stack([
        np.sin(theta) * np.cos(phi),
        np.sin(theta) * np.sin(phi),
        np.cos(theta)
    ], axis = -1)
    ns = np.einsum('...k,kab->...ab', n, np.array(PAULI))
    return (
        np.cos(mu)[..., None, None] * identity2
        + 1j * np.sin(mu)[..., None, None] * ns
    )

def _singlet_overlaps(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    # <psi-|(I x U) rho (I x U^dag)|psi-> = w^dag rho w with w = (I x U^dag)|psi->
    Psi = psi_minus.reshape(2, 2)
    W = np.einsum('ab,...bc->...ac', Psi, U.conj()).reshape(U.shape[:-2] + (4,))
    return np.real(np.einsum('...i,ij,...j->...', W.conj(), rho, W))

def singlet_fraction_general(
        state: TwoQubitState,
        grid: tuple = (40, 20, 20),
        refine: int = 3,
    ) -> float:
    """
    Maximal singlet overlap over local unitaries on qubit B, found by a
    coarse grid over (mu, theta, phi) followed by Nelder-Mead refinement of
    the best grid points.

    :param state: Two-qubit state.
    :type state: TwoQubitState
    :param grid: Grid resolution over mu in [0, pi], theta in [0, pi] and
        phi in [0, 2 pi].
    :type grid: tuple
    :param refine: Number of grid points polished locally.
    :type refine: int
    :return: Singlet fraction.
    :rtype: float
    """
    rho = state.rho
    mu, theta, phi = np.meshgrid(
        np.linspace(0, np.pi, grid[0]),
        np.linspace(0, np.pi, grid[1]),
        np.linspace(0, 2 * np.pi, grid[2]),
        indexing = 'ij'
    )
    angles = np.stack([mu.ravel(), theta.ravel(), phi.ravel()], axis = 1)
    values = _singlet_overlaps(rho, _unitaries(*angles.T))
    best = float(np.max(values))

    def objective(v):
        return -float(_singlet_overlaps(rho, _unitaries(*v)))

    for index in np.argsort(values)[::-1][:refine]:
        result = scipy.optimize.minimize(
            objective, angles[index], method = 'Nelder-Mead',
            options = dict(xatol = 1e-10, fatol = 1e-14, maxiter = 4000)
        )
        best = max(best, -float(result.fun))
    return min(best, 1.0)

# ------------------------------------------------------------------------------
def teleportation_fidelity(F: float) -> float:
    """Average teleportation fidelity f = (1 + 2F)/3."""
    return (1.0 + 2.0 * F) / 3.0

# ------------------------------------------------------------------------------
def chsh_x(x: XState) -> float:
    """2 sqrt(8 alpha^2 + (2 Delta - 1)^2 - min(4 alpha^2, (2 Delta - 1)^2))"""
    a2 = 4.0 * x.alpha**2
    d2 = (2.0 * x.delta - 1.0)**2
    return 2.0 * math.sqrt(max(2.0 * a2 + d2 - min(a2, d2), 0.0))

def chsh_max(state: TwoQubitState) -> float:
    """
    Largest CHSH value, 2 sqrt(l1 + l2) with l1 >= l2 the two largest
    eigenvalues of T^T T.
    """
    T = correlation_matrix(state)
    lam = hermitian_eigenvalues(T.T @ T)
    return 2.0 * math.sqrt(max(lam[0] + lam[1], 0.0))

# ------------------------------------------------------------------------------
def no_go_predicates(x: XState) -> Dict[str, bool]:
    """
    Sufficient conditions for classical behaviour of a canonical X-state.

    - ``telecond2``: alpha + Delta/2 <= 1/2, no teleportation advantage.
    - ``telecond``: Delta <= 1/2, implies telecond2.
    - ``chshcond``: 8 alpha^2 + (2 Delta - 1)^2 <= 1, no CHSH violation.
    - ``chshcond2``: Delta <= 1/2, implies chshcond.
    """
    delta = x.delta
    weak = delta <= 0.5 + THRESHOLD_TOL
    return {
        'telecond2': bool(x.alpha + delta / 2.0 <= 0.5 + THRESHOLD_TOL),
        'telecond': bool(weak),
        'chshcond': bool(8.0 * x.alpha**2 + (2.0 * delta - 1.0)**2 <= 1.0 + THRESHOLD_TOL),
        'chshcond2': bool(weak),
    }

# ------------------------------------------------------------------------------
def concurrence_x(x: XState) -> float:
    return max(0.0, 2.0 * (x.alpha - math.sqrt(max(x.a1 * x.a4, 0.0))))

def concurrence(state: TwoQubitState) -> float:
    """Wootters concurrence of a general two-qubit state."""
    rho = state.rho
    yy = kron(sigma_y, sigma_y)
    R = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.real(np.linalg.eigvals(R)))[::-1], 0.0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))

# ------------------------------------------------------------------------------
def purity(state: TwoQubitState) -> float:
    return float(np.real(np.trace(state.rho @ state.rho)))

# =============================================================================
@dataclass
class NonclassicalityReport:
    singlet_fraction: float
    teleport_useful: bool
    chsh: float
    chsh_violating: bool
    concurrence: float
    purity: float
    fidelity: float
    q_star: Optional[float] = None
    steering_verdict: Optional[str] = None
    p_suc: float = 1.0
    no_go: Dict[str, bool] = field(default_factory = dict)
    params: Dict = field(default_factory = dict)

    def to_dict(self) -> dict:
        return asdict(self)

def report(
        state: TwoQubitState,
        params: Optional[dict] = None,
        q_star: Optional[float] = None,
        steering_verdict: Optional[str] = None,
        p_suc: float = 1.0,
        tol: float = X_SUPPORT_TOL,
    ) -> NonclassicalityReport:
    """
    Collect the nonclassicality functionals of a state. States within
    ``tol`` of X-form use the closed forms; anything else the general
    routines.
    """
    try:
        x = canonicalize_x_state(state, tol)
    except NonXState:
        x = None
    if x is not None:
        F = singlet_fraction_x(x)
        chsh = chsh_x(x)
        C = concurrence_x(x)
        no_go = no_go_predicates(x)
    else:
        F = singlet_fraction_general(state)
        chsh = chsh_max(state)
        C = concurrence(state)
        no_go = {}
    if chsh > TSIRELSON + 1e-9:
        logger.warning(f'CHSH value {chsh} exceeds the Tsirelson bound')
    return NonclassicalityReport(
        singlet_fraction = float(F),
        teleport_useful = bool(F > 0.5 + THRESHOLD_TOL),
        chsh = float(chsh),
        chsh_violating = bool(chsh > 2.0 + THRESHOLD_TOL),
        concurrence = float(C),
        purity = purity(state),
        fidelity = float(teleportation_fidelity(F)),
        q_star = None if q_star is None else float(q_star),
        steering_verdict = steering_verdict,
        p_suc = p_suc,
        no_go = no_go,
        params = dict(params or {}),
    )

# ------------------------------------------------------------------------------
def random_x_state(rng: np.random.Generator) -> XState:
    """Populations uniform on the simplex, coherence uniform up to positivity."""
    a = rng.dirichlet(np.ones(4))
    alpha = rng.uniform(0.0, math.sqrt(a[1] * a[2]))
    return XState(a1 = a[0], a2 = a[1], a3 = a[2], alpha = alpha)

import numpy as np

__all__ = [
    'E', 'U_PROXY',
    'HERMITIAN_TOL', 'TRACE_TOL', 'PSD_TOL', 'KERNEL_RANK_TOL',
    'X_SUPPORT_TOL', 'THRESHOLD_TOL', 'FEASIBILITY_TOL', 'P_TARGET_TOL',
    'LIMIT_FLAGS',
    'identity2', 'identity4', 'sigma_x', 'sigma_y', 'sigma_z', 'PAULI',
    'ket0', 'ket1', 'raising', 'projector1', 'basis_ket', 'psi_minus',
    'ThermosteerError', 'InvalidInput', 'InvalidParams', 'InvalidTemperature',
    'DimensionMismatch', 'NotHermitian', 'NoKernel', 'DegenerateKernel',
    'NonXState', 'ModelMismatch', 'StepSizeUnderflow', 'SizeExceeded',
    'SolverStalled', 'DegenerateHerald', 'NotNearPure', 'InfeasibleTarget',
    'RegressionFailure',
]

# --------------------------------- Globals ------------------------------------
# Energies and temperatures are in units of the qubit gap E with hbar = k_B = 1
E = 1.0

# Finite stand-in for the charge energy when u is flagged infinite. Only the
# phase of coherences involving |11> depends on it and those vanish in the
# steady state.
U_PROXY = 1.0e3

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
KERNEL_RANK_TOL = 1e-8
X_SUPPORT_TOL = 1e-8
THRESHOLD_TOL = 1e-12
FEASIBILITY_TOL = 1e-7
P_TARGET_TOL = 1e-3

LIMIT_FLAGS = frozenset({'TA_inf', 'TB_zero', 'TA_zero_minus', 'u_inf'})

# ------------------------------ Pauli and basis -------------------------------
identity2 = np.eye(2, dtype=complex)
identity4 = np.eye(4, dtype=complex)
sigma_x = np.array([[0, 1], [1, 0]], dtype=complex)
sigma_y = np.array([[0, -1j], [1j, 0]], dtype=complex)
sigma_z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (sigma_x, sigma_y, sigma_z)

ket0 = np.array([1, 0], dtype=complex)
ket1 = np.array([0, 1], dtype=complex)

# |1><0| and |1><1| on a single qubit
raising = np.outer(ket1, ket0.conj())
projector1 = np.outer(ket1, ket1.conj())

def basis_ket(label: str) -> np.ndarray:
    """
    Product basis vector for a two-qubit label such as '01'. The ordering is
    |00>, |01>, |10>, |11> with the first character belonging to qubit A.
    """
    index = int(label, 2)
    ket = np.zeros(4, dtype=complex)
    ket[index] = 1.0
    return ket

# (|01> - |10>)/sqrt(2)
psi_minus = (basis_ket('01') - basis_ket('10')) / np.sqrt(2)

# ---------------------------------- Errors ------------------------------------
class ThermosteerError(Exception):
    """Base class for every error raised by the package."""

class InvalidInput(ThermosteerError, ValueError):
    """Malformed user input: configuration files, grids, presets."""

class InvalidParams(InvalidInput):
    """Machine parameters outside their type invariants."""

class InvalidTemperature(InvalidParams):
    pass

class DimensionMismatch(ThermosteerError, ValueError):
    pass

class NotHermitian(ThermosteerError, ValueError):
    pass

class NoKernel(ThermosteerError):
    """The matrix has no numerical null space."""

class DegenerateKernel(ThermosteerError):
    """More than one steady state; the parameters left the modeled regime."""

class NonXState(ThermosteerError, ValueError):
    pass

class ModelMismatch(InvalidInput):
    """The parameters do not describe the limit an analytic model assumes."""

class StepSizeUnderflow(ThermosteerError):
    pass

class SizeExceeded(ThermosteerError):
    pass

class SolverStalled(ThermosteerError):
    """The conic solver stopped without an optimal certificate."""

class DegenerateHerald(ThermosteerError):
    """The filter annihilates the state."""

class NotNearPure(ThermosteerError, ValueError):
    pass

class InfeasibleTarget(ThermosteerError):
    """No restart reached the requested heralding efficiency."""

class RegressionFailure(ThermosteerError):
    pass

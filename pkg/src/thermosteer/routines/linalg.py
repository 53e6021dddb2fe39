"""
Dense complex linear algebra for the 2x2, 4x4 and 16x16 problems of the
package. Everything operates on numpy arrays; nothing here keeps state.
"""

import logging

import numpy as np
import scipy.linalg

from thermosteer.routines.definitions import *

__all__ = [
    'as_matrix',
    'allclose',
    'is_hermitian',
    'kron',
    'partial_trace_A',
    'partial_transpose_B',
    'hermitian_eigenvalues',
    'kernel',
    'kernel_vector',
    'vec',
    'devec',
]

logger = logging.getLogger(__name__)

# ------------------------------------------------------------------------------
def as_matrix(M, square: bool = False) -> np.ndarray:
    """
    Coerce ``M`` to a two dimensional complex array.

    :param M: Array-like input.
    :param square: Require rows == cols.
    :type square: bool
    :return: The complex matrix.
    :rtype: np.ndarray
    """
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2:
        raise DimensionMismatch(f'Expected a matrix, got an array with shape {A.shape}')
    if square and A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f'Expected a square matrix, got shape {A.shape}')
    return A

# ------------------------------------------------------------------------------
def allclose(A, B, tol: float = 1e-10) -> bool:
    """Max-abs-entry comparison with an explicit tolerance."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        return False
    return bool(np.max(np.abs(A - B), initial = 0.0) <= tol)

# ------------------------------------------------------------------------------
def is_hermitian(M, tol: float = HERMITIAN_TOL) -> bool:
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        return False
    return allclose(A, A.conj().T, tol)

# ------------------------------------------------------------------------------
def kron(A, B) -> np.ndarray:
    """
    Kronecker product with the standard block ordering,
    kron(A, B)[i*p + k, j*q + l] = A[i, j] * B[k, l].
    """
    return np.kron(as_matrix(A), as_matrix(B))

# ------------------------------------------------------------------------------
def partial_trace_A(rho) -> np.ndarray:
    """
    Trace out the first qubit of a two-qubit operator.

    :param rho: 4x4 operator in the |00>, |01>, |10>, |11> ordering.
    :return: 2x2 operator on qubit B.
    :rtype: np.ndarray
    """
    R = as_matrix(rho, square = True)
    if R.shape != (4, 4):
        raise DimensionMismatch(f'partial_trace_A expects a 4x4 matrix, got {R.shape}')
    return np.einsum('abad->bd', R.reshape(2, 2, 2, 2))

# ------------------------------------------------------------------------------
def partial_transpose_B(rho) -> np.ndarray:
    R = as_matrix(rho, square = True)
    if R.shape != (4, 4):
        raise DimensionMismatch(f'partial_transpose_B expects a 4x4 matrix, got {R.shape}')
    return R.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)

# ------------------------------------------------------------------------------
def hermitian_eigenvalues(M, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """
    Real eigenvalues of a Hermitian matrix in descending order.

    :param M: Hermitian matrix, checked to ``tol`` in the max-abs metric.
    :param tol: Hermiticity tolerance.
    :type tol: float
    :return: Eigenvalues sorted from largest to smallest.
    :rtype: np.ndarray
    """
    A = as_matrix(M, square = True)
    if not is_hermitian(A, tol):
        raise NotHermitian(
            f'Matrix deviates from its adjoint by {np.max(np.abs(A - A.conj().T)):.3e}'
        )
    A = 0.5 * (A + A.conj().T)
    return np.linalg.eigvalsh(A)[::-1]

# ------------------------------------------------------------------------------
def kernel(M, rtol: float = KERNEL_RANK_TOL) -> np.ndarray:
    """
    Orthonormal basis of the numerical null space of a square matrix. A
    singular direction belongs to the kernel when its singular value is below
    ``rtol`` times the largest one.

    :return: Array with one kernel vector per column (possibly zero columns).
    :rtype: np.ndarray
    """
    A = as_matrix(M, square = True)
    _, s, vh = scipy.linalg.svd(A)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(A.shape[0], dtype = complex)
    null = s < rtol * smax
    logger.debug(
        f'kernel: smallest singular value {s[-1]:.3e}, largest {smax:.3e}, '
        f'null dimension {int(np.sum(null))}'
    )
    return vh[null].conj().T

# ------------------------------------------------------------------------------
def kernel_vector(M, rtol: float = KERNEL_RANK_TOL) -> np.ndarray:
    """
    A unit-norm vector v with ||M v|| <= rtol ||M||. Raises NoKernel for a
    full-rank matrix.
    """
    basis = kernel(M, rtol)
    if basis.shape[1] == 0:
        raise NoKernel('Matrix has full numerical rank')
    return basis[:, 0]

# ------------------------------------------------------------------------------
def vec(M) -> np.ndarray:
    """Column-stacking vectorization, vec(A X B) = (B^T kron A) vec(X)."""
    return as_matrix(M).reshape(-1, order = 'F')

def devec(v, n: int = 4) -> np.ndarray:
    return np.asarray(v, dtype = complex).reshape((n, n), order = 'F')

import numpy as np
import pytest

from thermosteer.routines.definitions import *
from thermosteer.routines.linalg import (
    allclose, as_matrix, devec, hermitian_eigenvalues, is_hermitian, kernel,
    kernel_vector, kron, partial_trace_A, partial_transpose_B,
    vec
)

def test_as_matrix_rejects_vectors():
    with pytest.raises(DimensionMismatch):
        as_matrix(np.ones(4))
    with pytest.raises(DimensionMismatch):
        as_matrix(np.ones((2, 3)), square = True)

def test_partial_trace_of_product():
    a = np.array([[0.7, 0.1j], [-0.1j, 0.3]])
    b = np.array([[0.2, 0.3], [0.3, 0.8]])
    assert allclose(partial_trace_A(kron(a, b)), b)
    assert allclose(partial_trace_A(kron(2.5 * a, b)), 2.5 * b)

def test_partial_trace_of_singlet_is_mixed():
    rho = np.outer(psi_minus, psi_minus.conj())
    assert allclose(partial_trace_A(rho), identity2 / 2)

def test_partial_transpose_of_singlet():
    rho = np.outer(psi_minus, psi_minus.conj())
    lam = hermitian_eigenvalues(partial_transpose_B(rho))
    assert np.allclose(lam, [0.5, 0.5, 0.5, -0.5])

def test_partial_transpose_is_involution(rng):
    M = rng.normal(size = (4, 4)) + 1j * rng.normal(size = (4, 4))
    assert allclose(partial_transpose_B(partial_transpose_B(M)), M)

def test_hermitian_eigenvalues_descending():
    lam = hermitian_eigenvalues(np.diag([0.1, 3.0, -2.0, 1.0]))
    assert np.allclose(lam, [3.0, 1.0, 0.1, -2.0])

def test_hermitian_eigenvalues_rejects_non_hermitian():
    assert not is_hermitian([[0, 1], [0, 0]])
    with pytest.raises(NotHermitian):
        hermitian_eigenvalues([[0, 1], [0, 0]])

def test_kernel_dimension():
    basis = kernel(np.diag([1.0, 0.0, 2.0, 0.0]))
    assert basis.shape == (4, 2)
    assert np.allclose(np.diag([1.0, 0.0, 2.0, 0.0]) @ basis, 0)

def test_kernel_vector_full_rank():
    with pytest.raises(NoKernel):
        kernel_vector(np.eye(3))

def test_vec_column_stacking(rng):
    A, X, B = (rng.normal(size = (4, 4)) + 1j * rng.normal(size = (4, 4)) for _ in range(3))
    assert allclose(vec(A @ X @ B), kron(B.T, A) @ vec(X), 1e-9)
    assert allclose(devec(vec(X)), X)

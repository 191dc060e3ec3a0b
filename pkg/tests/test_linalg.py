import numpy as np
import pytest
import scipy.linalg
from hypothesis import given

from qfreeze.errors import DimensionMismatch, NegativeEigenvalue, NonHermitianInput
from qfreeze.linalg import (
    I2, I4, SX, SY, SZ,
    bloch_operator, check_hermitian, dagger, eig_hermitian, eigvalsh, hermiticity_residual,
    jacobi_eigh, mat_func_psd, partial_trace_a, partial_trace_b, qubit_state, random_unitary,
    tensor2, trace_norm,
)
from qfreeze.states import random_density

from strategies import densities, seeds


def _random_hermitian(seed, n=4):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g + dagger(g)


def test_pauli_algebra():
    assert np.allclose(SX @ SY, 1j * SZ)
    for s in (SX, SY, SZ):
        assert np.allclose(s @ s, I2)


@given(seeds)
def test_jacobi_matches_lapack(seed):
    a = _random_hermitian(seed)
    w, v = jacobi_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ dagger(v), a, atol=1e-11)
    assert np.allclose(dagger(v) @ v, I4, atol=1e-12)


def test_jacobi_degenerate_spectrum():
    u = random_unitary(np.random.default_rng(3))
    a = u @ np.diag([1.0, 1.0, 1.0, -2.0]) @ dagger(u)
    w, _ = jacobi_eigh(a)
    assert np.allclose(w, [-2, 1, 1, 1], atol=1e-12)


def test_jacobi_diagonal_input_is_fixed_point():
    w, v = jacobi_eigh(np.diag([3.0, -1.0, 2.0, 0.0]).astype(complex))
    assert np.allclose(w, [-1, 0, 2, 3])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_eig_hermitian_methods(method):
    a = _random_hermitian(9)
    dec = eig_hermitian(a, method=method)
    assert np.allclose(dec.eigenvectors @ np.diag(dec.eigenvalues) @ dagger(dec.eigenvectors), a)


def test_eig_hermitian_bad_method():
    with pytest.raises(ValueError):
        eig_hermitian(I4, method="qr")


def test_non_hermitian_rejected():
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    assert hermiticity_residual(a) == pytest.approx(1.0)
    with pytest.raises(NonHermitianInput):
        check_hermitian(a)
    with pytest.raises(NonHermitianInput):
        eig_hermitian(a)


def test_non_square_rejected():
    with pytest.raises(DimensionMismatch):
        check_hermitian(np.zeros((2, 3)))


@given(densities())
def test_sqrt_squares_back(rho):
    r = mat_func_psd(rho, "sqrt")
    assert np.allclose(r @ r, rho, atol=1e-10)
    assert np.allclose(r, scipy.linalg.sqrtm(rho), atol=1e-6)


@given(densities(full_rank=True))
def test_log_matches_scipy(rho):
    assert np.allclose(mat_func_psd(rho, "log"), scipy.linalg.logm(rho), atol=1e-8)


def test_log_of_singular_refused():
    with pytest.raises(NegativeEigenvalue):
        mat_func_psd(np.diag([1.0, 0, 0, 0]).astype(complex), "log")


def test_negative_eigenvalue_refused():
    with pytest.raises(NegativeEigenvalue):
        mat_func_psd(np.diag([1.0, -1e-3, 0, 0]).astype(complex), "sqrt")


def test_small_negative_noise_clamped():
    r = mat_func_psd(np.diag([1.0, -1e-12, 0, 0]).astype(complex), "sqrt")
    assert np.all(np.isfinite(r))
    assert r[1, 1] == 0


def test_trace_norm_of_pauli():
    assert trace_norm(SZ) == pytest.approx(2.0)
    assert trace_norm(tensor2(SX, SY)) == pytest.approx(4.0)


def test_tensor2_shape_check():
    with pytest.raises(DimensionMismatch):
        tensor2(I4, I2)


def test_tensor2_kron():
    assert np.allclose(tensor2(SX, SZ), np.kron(SX, SZ))


@given(seeds)
def test_partial_traces(seed):
    rng = np.random.default_rng(seed)
    a = qubit_state(rng.uniform(-0.5, 0.5, 3))
    b = qubit_state(rng.uniform(-0.5, 0.5, 3))
    rho = tensor2(a, b)
    assert np.allclose(partial_trace_b(rho), a)
    assert np.allclose(partial_trace_a(rho), b)


def test_bloch_operator():
    assert np.allclose(bloch_operator([0, 0, 1]), SZ)
    assert np.allclose(qubit_state([0, 0, 0]), I2 / 2)


@given(seeds)
def test_random_unitary_is_unitary(seed):
    u = random_unitary(np.random.default_rng(seed))
    assert np.allclose(dagger(u) @ u, I4, atol=1e-12)


@given(densities())
def test_eigvalsh_sum_is_trace(rho):
    assert eigvalsh(rho).sum() == pytest.approx(1.0)


def test_batched_sqrt():
    stack = np.stack([random_density(i) for i in range(5)])
    r = mat_func_psd(stack, "sqrt")
    assert np.allclose(r @ r, stack, atol=1e-10)

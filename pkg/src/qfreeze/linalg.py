"""Small dense Hermitian linear algebra for one- and two-qubit operators.

Matrices are plain complex ``numpy`` arrays. Most functions accept stacks of
shape ``(..., n, n)`` so that grid sweeps can be evaluated in one call.
"""

from typing import NamedTuple

import numpy as np

from qfreeze.errors import DimensionMismatch, NegativeEigenvalue, NonHermitianInput

HERMITIAN_TOL = 1e-12
CLAMP_TOL = 1e-10
JACOBI_TOL = 1e-14

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)
I4 = np.eye(4, dtype=complex)


class EigDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def hermiticity_residual(a):
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - dagger(a))))


def check_hermitian(a, tol=HERMITIAN_TOL):
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {a.shape}")
    res = hermiticity_residual(a)
    if res > tol:
        raise NonHermitianInput(f"Hermiticity residual {res:.3g} exceeds {tol:g}")
    return a


def jacobi_eigh(a, tol=JACOBI_TOL, max_sweeps=100):
    """Cyclic complex Jacobi eigensolver for a single Hermitian matrix.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary, then annihilates it with a real Givens rotation.
    Iterates until the off-diagonal Frobenius mass drops below ``tol``
    (scaled by the matrix norm when that exceeds one).
    """
    a = np.array(check_hermitian(a), dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch("jacobi_eigh works on a single matrix")
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a - np.diag(np.diag(a))) ** 2))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b < 1e-300:
                    continue
                g = np.eye(n, dtype=complex)
                g[q, q] = np.conj(apq) / b
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * b)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                r = np.eye(n, dtype=complex)
                r[p, p] = c
                r[q, q] = c
                r[p, q] = s
                r[q, p] = -s
                g = g @ r
                a = dagger(g) @ a @ g
                a[p, q] = a[q, p] = 0.0
                v = v @ g
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return EigDecomposition(w[order], v[:, order])


def eig_hermitian(a, method="lapack"):
    """Spectral decomposition with eigenvalues in ascending order.

    ``method="lapack"`` delegates to :func:`numpy.linalg.eigh` and accepts
    stacks; ``method="jacobi"`` runs :func:`jacobi_eigh` on a single matrix.
    """
    a = check_hermitian(a)
    if method == "jacobi":
        return jacobi_eigh(a)
    if method != "lapack":
        raise ValueError(f"unknown eigensolver {method!r}")
    w, v = np.linalg.eigh(a)
    return EigDecomposition(w, v)


def _clamped_spectrum(a):
    w, v = eig_hermitian(a)
    if np.any(w < -CLAMP_TOL):
        raise NegativeEigenvalue(f"eigenvalue {float(np.min(w)):.3g} below -{CLAMP_TOL:g}")
    return np.clip(w, 0.0, None), v


def mat_func_psd(a, f="sqrt"):
    """Apply ``sqrt`` or ``log`` to a positive semidefinite matrix spectrally.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero first. The logarithm
    of a singular matrix is refused rather than returned with infinities;
    relative entropy handles zero eigenvalues on its own.
    """
    w, v = _clamped_spectrum(a)
    if f == "sqrt":
        fw = np.sqrt(w)
    elif f == "log":
        if np.any(w == 0.0):
            raise NegativeEigenvalue("matrix logarithm of a singular matrix")
        fw = np.log(w)
    else:
        raise ValueError(f"unsupported matrix function {f!r}")
    return (v * fw[..., None, :]) @ dagger(v)


def eigvalsh(a):
    return np.linalg.eigvalsh(check_hermitian(a))


def trace_norm(a):
    """Schatten 1-norm of a Hermitian matrix (or stack)."""
    return np.sum(np.abs(eigvalsh(a)), axis=-1)


def tensor2(a, b):
    """Kronecker product of two single-qubit operators, ``a`` acting on A."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != (2, 2) or b.shape[-2:] != (2, 2):
        raise DimensionMismatch(f"tensor2 needs 2x2 factors, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def bloch_operator(vec):
    """``vec . sigma`` for a real 3-vector."""
    x, y, z = vec
    return x * SX + y * SY + z * SZ


def qubit_state(vec):
    """Single-qubit density matrix with Bloch vector ``vec``."""
    return 0.5 * (I2 + bloch_operator(vec))


def partial_trace_b(rho):
    return np.trace(np.asarray(rho).reshape(2, 2, 2, 2), axis1=1, axis2=3)


def partial_trace_a(rho):
    return np.trace(np.asarray(rho).reshape(2, 2, 2, 2), axis1=0, axis2=2)


def random_unitary(rng, n=4):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))

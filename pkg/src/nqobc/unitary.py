"""Small-n unitary group utilities: Haar sampling, elementary frame mixings,
and the exponential retraction used by the frame optimizer.

Frames are plain complex ``(n, n)`` arrays whose columns are the frame
vectors. Frame indices are zero-based.
"""

import numpy as np
from scipy.linalg import expm

UNITARY_TOL = 1e-10


def unitarity_residual(U) -> float:
    """Max-norm of ``U^H U - I``."""
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[-1]))))


def check_unitary(U, n=None, tol=UNITARY_TOL):
    U = np.asarray(U, dtype=np.complex128)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"frame must be a square matrix, got shape {U.shape}")
    if n is not None and U.shape[0] != n:
        raise ValueError(f"frame has size {U.shape[0]}, expected {n}")
    res = unitarity_residual(U)
    if res > tol:
        raise ValueError(f"frame is not unitary (residual {res:.3g})")
    return U


def haar_batch(n, size, rng):
    """``size`` independent Haar-distributed unitaries, shape ``(size, n, n)``.

    QR of a complex Ginibre matrix, with each column of Q multiplied by the
    phase of the matching diagonal entry of R. Without that correction the
    law of Q depends on the QR routine's sign convention and is not Haar.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    Z = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[:, None, :]


def haar_sample(n, rng):
    """One Haar-distributed element of U(n), drawn from ``rng``."""
    return haar_batch(n, 1, rng)[0]


def _check_pair(i, j, n):
    if i == j:
        raise ValueError("i and j must differ")
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"indices ({i}, {j}) out of range for n={n}")


def _embed(i, j, n, block):
    E = np.eye(n, dtype=np.complex128)
    E[np.ix_([i, j], [i, j])] = block
    return E


def u0(i, j, n):
    """Mixing with new vectors ``h_i = (1+i)/2 f_i + (1-i)/2 f_j``,
    ``h_j = (1-i)/2 f_i + (1+i)/2 f_j``; other vectors unchanged."""
    _check_pair(i, j, n)
    a, b = (1 + 1j) / 2, (1 - 1j) / 2
    return _embed(i, j, n, [[a, b], [b, a]])


def v0(i, j, n):
    """Mixing with ``h_i = (f_i + f_j)/sqrt(2)`` and ``h_j = (f_i - f_j)/sqrt(2)``."""
    _check_pair(i, j, n)
    s = 1 / np.sqrt(2)
    return _embed(i, j, n, [[s, s], [s, -s]])


def w0(i, j, n):
    """Transposition of frame vectors ``i`` and ``j``."""
    _check_pair(i, j, n)
    return _embed(i, j, n, [[0, 1], [1, 0]])


def frame_act(U, E):
    """Apply the elementary mixing ``E`` to the frame ``U``.

    New vector ``a`` is ``sum_b E[b, a] * (old vector b)``, which in matrix
    form is the right product ``U @ E``.
    """
    U = np.asarray(U)
    E = np.asarray(E)
    if U.shape != E.shape:
        raise ValueError(f"shape mismatch {U.shape} vs {E.shape}")
    return U @ E


def retract(U, X, t=1.0):
    """Exponential retraction ``U @ expm(t X)`` for skew-Hermitian ``X``."""
    X = np.asarray(X, dtype=np.complex128)
    if np.max(np.abs(X + X.conj().T), initial=0.0) > UNITARY_TOL:
        raise ValueError("X is not skew-Hermitian")
    return np.asarray(U) @ expm(t * X)


def skew_hermitian_basis(n):
    """Orthonormal (Frobenius) real basis of the skew-Hermitian ``n x n`` matrices.

    Returns an array of shape ``(n * n, n, n)``.
    """
    basis = []
    for k in range(n):
        E = np.zeros((n, n), dtype=np.complex128)
        E[k, k] = 1j
        basis.append(E)
    s = 1 / np.sqrt(2)
    for k in range(n):
        for l in range(k + 1, n):
            E = np.zeros((n, n), dtype=np.complex128)
            E[k, l], E[l, k] = s, -s
            basis.append(E)
            E = np.zeros((n, n), dtype=np.complex128)
            E[k, l], E[l, k] = 1j * s, 1j * s
            basis.append(E)
    return np.array(basis)

"""Kähler algebraic curvature tensors at a point.

A tensor is stored densely as a complex ``(n, n, n, n)`` array ``R`` with
``R[i, j, k, l]`` holding the component :math:`R_{i\\bar j k\\bar l}` in a fixed
unitary reference frame (indices are zero-based). The Kähler symmetries are

* ``R[i, j, k, l] == R[k, j, i, l]``             (first pair symmetry)
* ``R[i, j, k, l] == R[i, l, k, j]``             (second pair symmetry)
* ``conj(R[i, j, k, l]) == R[j, i, l, k]``       (Hermitian reality)

A frame is a unitary matrix ``U`` whose columns are the frame vectors written
in the reference frame, i.e. ``f_a = sum_j U[j, a] e_j``.

Scalar curvature is ``sum_{i,j} R[i, i, j, j]``; no Riemannian factor-of-two
conversion is applied anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ._rng import stream
from .unitary import UNITARY_TOL, check_unitary

SYMMETRY_TOL = 1e-12


class SymmetryError(ValueError):
    """Raised when tensor data violates the Kähler symmetries."""


class Violation(NamedTuple):
    identity: str
    index: tuple
    residual: float


@dataclass(frozen=True, eq=False)
class CurvatureTensor:
    """Immutable Kähler curvature tensor at a point.

    Parameters
    ----------
    components : array_like, shape (n, n, n, n)
        ``components[i, j, k, l]`` is :math:`R_{i\\bar j k\\bar l}`.
    """

    components: np.ndarray

    def __post_init__(self):
        arr = np.array(self.components, dtype=np.complex128, copy=True)
        if arr.ndim != 4 or len(set(arr.shape)) != 1:
            raise ValueError(f"components must have shape (n, n, n, n), got {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("dimension must be at least 1")
        arr.flags.writeable = False
        object.__setattr__(self, "components", arr)

    @property
    def n(self) -> int:
        return self.components.shape[0]

    @property
    def norm(self) -> float:
        """Largest component modulus."""
        return float(np.max(np.abs(self.components)))

    def allclose(self, other: CurvatureTensor, atol: float = 1e-10) -> bool:
        return self.n == other.n and np.allclose(self.components, other.components, rtol=0.0, atol=atol)

    def __repr__(self):
        return f"CurvatureTensor(n={self.n}, norm={self.norm:.6g})"


def _as_tensor(T) -> CurvatureTensor:
    return T if isinstance(T, CurvatureTensor) else CurvatureTensor(T)


# ---------------------------------------------------------------------------
# symmetry checks
# ---------------------------------------------------------------------------

def _symmetry_residuals(R):
    return {
        "pair_symmetry_1": np.abs(R - R.transpose(2, 1, 0, 3)),
        "pair_symmetry_2": np.abs(R - R.transpose(0, 3, 2, 1)),
        "hermitian_reality": np.abs(R.conj() - R.transpose(1, 0, 3, 2)),
    }


def validate(T, tol: float = SYMMETRY_TOL) -> list[Violation]:
    """List the Kähler symmetries that ``T`` violates.

    The tolerance is absolute for tensors with entries of order one and is
    scaled by the largest component modulus otherwise. Each violated identity
    appears once, with its worst index tuple and residual; an empty list
    means the tensor is a valid Kähler curvature tensor.
    """
    R = _as_tensor(T).components
    atol = tol * max(1.0, float(np.max(np.abs(R))))
    out = []
    for name, res in _symmetry_residuals(R).items():
        worst = np.unravel_index(np.argmax(res), res.shape)
        if res[worst] > atol:
            out.append(Violation(name, tuple(int(i) for i in worst), float(res[worst])))
    return out


# ---------------------------------------------------------------------------
# model tensors
# ---------------------------------------------------------------------------

def flat(n: int) -> CurvatureTensor:
    if n < 1:
        raise ValueError("dimension must be at least 1")
    return CurvatureTensor(np.zeros((n, n, n, n)))


def constant_hsc(n: int, c: float) -> CurvatureTensor:
    """Model tensor of constant holomorphic sectional curvature ``c``.

    ``R[i, j, k, l] = (c / 2) * (delta_ij delta_kl + delta_il delta_kj)``,
    so ``R(V, V̄, V, V̄) = c`` for every unit vector ``V``.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    eye = np.eye(n)
    R = 0.5 * c * (np.einsum("ij,kl->ijkl", eye, eye) + np.einsum("il,kj->ijkl", eye, eye))
    return CurvatureTensor(R)


def surface(h: float) -> CurvatureTensor:
    """One-dimensional factor whose single component ``R[0, 0, 0, 0]`` is ``h``.

    ``h`` is the holomorphic sectional curvature of the factor in this
    package's normalization. No claim is made about how ``h`` relates to a
    Gaussian curvature under any particular Riemannian convention.
    """
    return CurvatureTensor(np.full((1, 1, 1, 1), h, dtype=np.complex128))


def product(*factors) -> CurvatureTensor:
    """Curvature of a Riemannian product: block diagonal, zero across factors."""
    if not factors:
        raise ValueError("product needs at least one factor")
    factors = [_as_tensor(F) for F in factors]
    n = sum(F.n for F in factors)
    R = np.zeros((n, n, n, n), dtype=np.complex128)
    start = 0
    for F in factors:
        s = slice(start, start + F.n)
        R[s, s, s, s] = F.components
        start += F.n
    return CurvatureTensor(R)


def symmetrize(X) -> np.ndarray:
    """Project an arbitrary complex ``(n, n, n, n)`` array onto Kähler tensors.

    Averages over the two pair swaps and then over Hermitian conjugation.
    This is the orthogonal projection onto the real subspace of Kähler
    curvature tensors, so it is onto and fixes every valid tensor.
    """
    X = np.asarray(X, dtype=np.complex128)
    Y = 0.25 * (X + X.transpose(2, 1, 0, 3) + X.transpose(0, 3, 2, 1) + X.transpose(2, 3, 0, 1))
    return 0.5 * (Y + Y.transpose(1, 0, 3, 2).conj())


def random_kahler(n: int, seed: int, scale: float = 1.0) -> CurvatureTensor:
    """Random Kähler curvature tensor, deterministic in ``seed``.

    A complex Gaussian array with entries of size ``scale`` is projected with
    :func:`symmetrize`; the resulting law has full support on the
    ``n**2 (n + 1)**2 / 4`` dimensional space of Kähler tensors.
    """
    if n < 1:
        raise ValueError("dimension must be at least 1")
    if not scale > 0:
        raise ValueError("scale must be positive")
    rng = stream(seed)
    shape = (n, n, n, n)
    X = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return CurvatureTensor(scale * symmetrize(X))


# ---------------------------------------------------------------------------
# frame changes and curvature evaluations
# ---------------------------------------------------------------------------

def transform(T, U) -> CurvatureTensor:
    """Components of ``T`` in the frame ``f_a = sum_j U[j, a] e_j``."""
    R = _as_tensor(T).components
    U = check_unitary(U, n=R.shape[0])
    Uc = U.conj()
    out = np.einsum("pqrs,pa,qb,rc,sd->abcd", R, U, Uc, U, Uc, optimize=True)
    return CurvatureTensor(out)


def frame_projectors(U) -> np.ndarray:
    """Flattened rank-one projectors of the frame columns.

    For frames of shape ``(..., n, n)`` returns ``P`` of shape
    ``(..., n, n * n)`` with ``P[..., a, p * n + q] = U[p, a] * conj(U[q, a])``.
    """
    U = np.asarray(U)
    n = U.shape[-1]
    P = np.einsum("...pa,...qa->...apq", U, U.conj())
    return P.reshape(U.shape[:-2] + (n, n * n))


def bisectional_batch(T, frames) -> np.ndarray:
    """Bisectional matrices for a stack of frames, shape ``(..., n, n)``.

    No unitarity check is made; this is the vectorized kernel behind
    :func:`bisectional_matrix` and the Monte Carlo estimators.
    """
    R = _as_tensor(T).components
    n = R.shape[0]
    P = frame_projectors(frames)
    A = (P @ R.reshape(n * n, n * n) @ np.swapaxes(P, -1, -2)).real
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def bisectional_matrix(T, U) -> np.ndarray:
    """Real symmetric matrix ``A[a, b] = R(f_a, f̄_a, f_b, f̄_b)``.

    The diagonal holds the holomorphic sectional curvatures of the frame
    vectors; off-diagonal entries are orthogonal bisectional curvatures.
    Costs ``O(n**6)`` without forming the transformed tensor.
    """
    T = _as_tensor(T)
    U = check_unitary(U, n=T.n)
    return bisectional_batch(T, U)


def scalar(T) -> float:
    R = _as_tensor(T).components
    return float(np.einsum("iijj->", R).real)


def ricci(T) -> np.ndarray:
    """Hermitian Ricci matrix ``Ric[i, j] = sum_k R[i, j, k, k]``."""
    R = _as_tensor(T).components
    Ric = np.einsum("ijkk->ij", R)
    return 0.5 * (Ric + Ric.conj().T)


def _unit(V, n, name):
    V = np.asarray(V, dtype=np.complex128)
    if V.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {V.shape}")
    if abs(np.linalg.norm(V) - 1.0) > UNITARY_TOL:
        raise ValueError(f"{name} is not a unit vector")
    return V


def _rvvww(R, V, W):
    return float(np.einsum("ijkl,i,j,k,l->", R, V, V.conj(), W, W.conj()).real)


def hsc(T, V) -> float:
    """Holomorphic sectional curvature ``R(V, V̄, V, V̄)`` of a unit vector."""
    T = _as_tensor(T)
    V = _unit(V, T.n, "V")
    return _rvvww(T.components, V, V)


def obc(T, V, W) -> float:
    """Orthogonal bisectional curvature ``R(V, V̄, W, W̄)`` of a unitary pair."""
    T = _as_tensor(T)
    V = _unit(V, T.n, "V")
    W = _unit(W, T.n, "W")
    if abs(np.vdot(V, W)) > UNITARY_TOL:
        raise ValueError("V and W are not orthogonal")
    return _rvvww(T.components, V, W)


# ---------------------------------------------------------------------------
# JSON files
# ---------------------------------------------------------------------------

def to_dict(T) -> dict:
    R = _as_tensor(T).components
    flat_ = R.reshape(-1)
    return {"n": int(R.shape[0]), "components": [[float(z.real), float(z.imag)] for z in flat_]}


def from_dict(data: dict, tol: float = SYMMETRY_TOL) -> CurvatureTensor:
    """Build a tensor from its JSON mapping, rejecting symmetry violations."""
    try:
        n = int(data["n"])
        pairs = np.asarray(data["components"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed tensor data: {exc}") from exc
    if n < 1 or pairs.shape != (n**4, 2):
        raise ValueError(f"expected {n}**4 [re, im] pairs, got array of shape {pairs.shape}")
    T = CurvatureTensor((pairs[:, 0] + 1j * pairs[:, 1]).reshape(n, n, n, n))
    bad = validate(T, tol)
    if bad:
        desc = "; ".join(f"{v.identity} at {v.index} (residual {v.residual:.3g})" for v in bad)
        raise SymmetryError(f"tensor violates Kähler symmetries: {desc}")
    return T


def save_tensor(T, path) -> None:
    # Python's float repr is the shortest string that round-trips exactly.
    Path(path).write_text(json.dumps(to_dict(T)) + "\n")


def load_tensor(path, tol: float = SYMMETRY_TOL) -> CurvatureTensor:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return from_dict(data, tol)

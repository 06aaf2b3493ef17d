"""Quadratic orthogonal bisectional curvature: evaluation and certification.

For a frame ``U`` with bisectional matrix ``A`` the quadratic form

    Q(U, xi) = sum_{i,j} A[i, j] * (xi[i] - xi[j])**2

equals ``2 xi^T L xi`` with the curvature Laplacian ``L = diag(A @ 1) - A``.
Since ``L @ 1 = 0``, the form is nonnegative at ``U`` exactly when the
smallest eigenvalue of ``L`` on the complement of the constants is
nonnegative. :func:`certify_nqobc` minimizes that eigenvalue over U(n).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm, null_space

from ._rng import normalize_seed, stream
from .tensor import _as_tensor, bisectional_batch, bisectional_matrix
from .unitary import haar_batch, skew_hermitian_basis

VIOLATION_FOUND = "ViolationFound"
NO_VIOLATION_FOUND = "NoViolationFound"

CROSSING_GAP = 1e-8
FD_STEP = 1e-6


def _require_n2(T):
    T = _as_tensor(T)
    if T.n < 2:
        raise ValueError("the QOBC condition needs complex dimension n >= 2")
    return T


def qobc_form(T, U, xi) -> float:
    """Value of ``sum_{i,j} R(f_i, f̄_i, f_j, f̄_j) (xi_i - xi_j)**2`` at frame ``U``."""
    T = _require_n2(T)
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (T.n,):
        raise ValueError(f"xi must have shape ({T.n},)")
    A = bisectional_matrix(T, U)
    diff = xi[:, None] - xi[None, :]
    return float(np.sum(A * diff**2))


def laplacian(A) -> np.ndarray:
    """``diag(row sums) - A`` for a (stack of) symmetric matrices."""
    A = np.asarray(A, dtype=np.float64)
    r = A.sum(axis=-1)
    return r[..., :, None] * np.eye(A.shape[-1]) - A


def curvature_laplacian(T, U) -> np.ndarray:
    T = _require_n2(T)
    return laplacian(bisectional_matrix(T, U))


@lru_cache(maxsize=None)
def _complement_basis(n):
    # orthonormal columns spanning the vectors with zero coordinate sum
    Q = null_space(np.ones((1, n)))
    Q.flags.writeable = False
    return Q


def _projected_spectrum(A):
    """Eigen-decomposition of the Laplacian restricted to sum-zero vectors."""
    Q = _complement_basis(A.shape[-1])
    M = Q.T @ laplacian(A) @ Q
    return np.linalg.eigh(0.5 * (M + np.swapaxes(M, -1, -2)))


def frame_min(T, U):
    """Smallest Laplacian eigenvalue orthogonal to the constants at frame ``U``.

    Returns
    -------
    lam : float
        The form is nonnegative at ``U`` for every ``xi`` iff ``lam >= 0``.
    xi : ndarray, shape (n,)
        Unit eigenvector with zero coordinate sum; ``qobc_form(T, U, xi) == 2 * lam``.
    """
    T = _require_n2(T)
    w, v = _projected_spectrum(bisectional_matrix(T, U))
    xi = _complement_basis(T.n) @ v[:, 0]
    return float(w[0]), xi


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CertifyConfig:
    restarts: int = 100
    max_iters: int = 200
    violation_tolerance: float = 1e-8
    seed: int = 0
    method: str = "descent"
    threads: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not self.violation_tolerance >= 0:
            raise ValueError("violation_tolerance must be nonnegative")
        if self.method not in ("descent", "random"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        object.__setattr__(self, "seed", normalize_seed(self.seed))


@dataclass(frozen=True)
class Witness:
    frame: np.ndarray
    xi: np.ndarray
    value: float

    def to_dict(self):
        return {
            "n": int(self.frame.shape[0]),
            "frame": [[float(z.real), float(z.imag)] for z in self.frame.reshape(-1)],
            "xi": [float(x) for x in self.xi],
            "value": float(self.value),
        }

    @classmethod
    def from_dict(cls, data):
        n = int(data["n"])
        pairs = np.asarray(data["frame"], dtype=np.float64)
        frame = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(n, n)
        return cls(frame, np.asarray(data["xi"], dtype=np.float64), float(data["value"]))


@dataclass
class Certificate:
    """Outcome of a frame search.

    ``NoViolationFound`` is a heuristic verdict: the search examined
    ``restarts`` local searches and never went below ``min_lambda``.
    """

    status: str
    witness: Optional[Witness]
    restarts: int
    min_lambda: float
    seed: int
    elapsed_ms: float
    config: CertifyConfig = field(default_factory=CertifyConfig)

    def __post_init__(self):
        if self.status == VIOLATION_FOUND:
            if self.witness is None or not self.witness.value < -self.config.violation_tolerance:
                raise ValueError("a violation certificate needs a witness below -violation_tolerance")
        elif self.status != NO_VIOLATION_FOUND:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def violation(self) -> bool:
        return self.status == VIOLATION_FOUND

    def to_dict(self, timing=True):
        out = {
            "status": self.status,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "restarts": self.restarts,
            "min_lambda": self.min_lambda,
            "seed": self.seed,
            "heuristic": self.status == NO_VIOLATION_FOUND,
            "config": asdict(self.config),
        }
        if timing:
            out["elapsed_ms"] = self.elapsed_ms
        return out


# ---------------------------------------------------------------------------
# frame search
# ---------------------------------------------------------------------------

class _Run(NamedTuple):
    lam: float
    frame: np.ndarray


class _Objective:
    """Projected smallest eigenvalue, vectorized over stacks of frames."""

    def __init__(self, T):
        self.T = T
        self.n = T.n
        self.basis = skew_hermitian_basis(self.n)
        # exp(+-h B_k) for the central-difference stencil
        self.stencil = np.array([expm(s * FD_STEP * B) for s in (1, -1) for B in self.basis])

    def eval(self, frames):
        w, _ = _projected_spectrum(bisectional_batch(self.T, frames))
        return w

    def gradient(self, U):
        w = self.eval(U @ self.stencil)[:, 0]
        m = len(self.basis)
        return (w[:m] - w[m:]) / (2 * FD_STEP)


def _descend(obj, U, cfg, rng):
    w = obj.eval(U[None])[0]
    f = w[0]
    step = 0.5
    failed_probes = 0
    for _ in range(cfg.max_iters):
        if len(w) > 1 and w[1] - w[0] < CROSSING_GAP:
            # gradient is ambiguous at an eigenvalue crossing: try a random tangent direction
            X = np.tensordot(rng.standard_normal(len(obj.basis)), obj.basis, axes=1)
            X /= np.linalg.norm(X)
            trials = np.array([U @ expm(t * X) for t in step * 0.5 ** np.arange(6)])
            vals = obj.eval(trials)
            k = int(np.argmin(vals[:, 0]))
            if vals[k, 0] < f:
                U, w, f = trials[k], vals[k], vals[k, 0]
                failed_probes = 0
            else:
                failed_probes += 1
                if failed_probes >= 5:
                    break
            continue
        g = obj.gradient(U)
        gg = float(g @ g)
        if gg < 1e-20:
            break
        X = -np.tensordot(g, obj.basis, axes=1)
        t = step
        while t > 1e-10:
            Un = U @ expm(t * X)
            wn = obj.eval(Un[None])[0]
            if wn[0] <= f - 1e-4 * t * gg:
                break
            t *= 0.5
        else:
            break
        improvement = f - wn[0]
        U, w, f = Un, wn, wn[0]
        step = min(2 * t, 4.0)
        if improvement < 1e-14 * max(1.0, abs(f)):
            break
    return _Run(float(f), U)


def _restart(T, obj, cfg, r):
    n = T.n
    rng = stream(cfg.seed, r)
    if cfg.method == "random":
        frames = haar_batch(n, max(cfg.max_iters, 1), rng)
        if r == 0:
            frames[0] = np.eye(n)
        lam = obj.eval(frames)[:, 0]
        k = int(np.argmin(lam))
        return _Run(float(lam[k]), frames[k])
    start = np.eye(n, dtype=np.complex128) if r == 0 else haar_batch(n, 1, rng)[0]
    return _descend(obj, start, cfg, rng)


def _witness(T, U, tol):
    # remove retraction drift before the unitarity check in qobc_form
    Q, R = np.linalg.qr(U)
    d = np.diagonal(R)
    U = Q * (d / np.abs(d))
    lam, xi = frame_min(T, U)
    # rescale xi to range [0, 1]; the value stays <= lam < 0
    xi = (xi - xi.min()) / (xi.max() - xi.min())
    value = qobc_form(T, U, xi)
    if value < -tol:
        return Witness(U, xi, value)
    return None


def certify_nqobc(T, config: CertifyConfig | None = None, **overrides) -> Certificate:
    """Search U(n) for a frame where the QOBC form takes a negative value.

    Restart 0 starts from the identity frame; restart ``r > 0`` starts from a
    Haar frame drawn from stream ``(seed, r)``. Restarts are processed in
    index order and the search stops at the first restart whose frame yields
    a witness below ``-violation_tolerance`` (re-checked by direct summation
    of the form). The result depends only on the tensor and the config, not
    on ``threads``.

    Keyword overrides are applied on top of ``config``.
    """
    t0 = time.perf_counter()
    T = _require_n2(T)
    cfg = config or CertifyConfig()
    if overrides:
        cfg = CertifyConfig(**{**asdict(cfg), **overrides})
    obj = _Objective(T)
    tol = cfg.violation_tolerance

    min_lam = np.inf
    used = 0
    witness = None
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        for chunk_start in range(0, cfg.restarts, cfg.threads):
            idx = range(chunk_start, min(chunk_start + cfg.threads, cfg.restarts))
            if pool is None:
                runs = [_restart(T, obj, cfg, r) for r in idx]
            else:
                runs = list(pool.map(lambda r: _restart(T, obj, cfg, r), idx))
            for r, run in zip(idx, runs):
                used = r + 1
                min_lam = min(min_lam, run.lam)
                if run.lam < -tol:
                    witness = _witness(T, run.frame, tol)
                    if witness is not None:
                        break
            if witness is not None:
                break
    finally:
        if pool is not None:
            pool.shutdown()

    return Certificate(
        status=VIOLATION_FOUND if witness is not None else NO_VIOLATION_FOUND,
        witness=witness,
        restarts=used,
        min_lambda=float(min_lam),
        seed=cfg.seed,
        elapsed_ms=1e3 * (time.perf_counter() - t0),
        config=cfg,
    )


# ---------------------------------------------------------------------------
# products with a one-dimensional first factor
# ---------------------------------------------------------------------------

class Lemma43Result(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def split_first_factor(T, tol=1e-12) -> bool:
    """True if ``T`` is a product whose first factor is one-dimensional."""
    R = _as_tensor(T).components
    n = R.shape[0]
    inside = np.zeros((n,) * 4, dtype=bool)
    inside[0, 0, 0, 0] = True
    inside[1:, 1:, 1:, 1:] = True
    return bool(np.all(np.abs(R[~inside]) <= tol))


def lemma43_check(T) -> Lemma43Result:
    """Compare ``sum_{j>=1} R(e_1, ē_1, e_j, ē_j)`` with ``-R(e_0, ē_0, e_0, ē_0)``.

    ``T`` must be a product whose first factor (index 0) is one-dimensional;
    the frame is the product frame. The sum starts with the holomorphic
    sectional curvature ``R[1, 1, 1, 1]``. An NQOBC tensor always satisfies
    ``lhs >= rhs``; ``holds`` applies a 1e-10 slack.
    """
    T = _require_n2(T)
    if not split_first_factor(T):
        raise ValueError("first factor of T is not one-dimensional")
    R = T.components
    lhs = float(sum(R[1, 1, j, j].real for j in range(1, T.n)))
    rhs = float(-R[0, 0, 0, 0].real) + 0.0
    return Lemma43Result(lhs, rhs, lhs >= rhs - 1e-10)


def certificate_from_dict(data) -> Certificate:
    cfg = CertifyConfig(**data.get("config", {}))
    w = data.get("witness")
    return Certificate(
        status=data["status"],
        witness=None if w is None else Witness.from_dict(w),
        restarts=int(data["restarts"]),
        min_lambda=float(data["min_lambda"]),
        seed=int(data["seed"]),
        elapsed_ms=float(data.get("elapsed_ms", 0.0)),
        config=cfg,
    )


__all__ = [
    "CertifyConfig",
    "Certificate",
    "Lemma43Result",
    "NO_VIOLATION_FOUND",
    "VIOLATION_FOUND",
    "Witness",
    "certificate_from_dict",
    "certify_nqobc",
    "curvature_laplacian",
    "frame_min",
    "laplacian",
    "lemma43_check",
    "qobc_form",
    "split_first_factor",
]

"""Haar averages of bisectional curvatures over U(n).

With ``F_ij(U)`` the off-diagonal and ``G_k(U)`` the diagonal entries of the
bisectional matrix at frame ``U``, every Kähler tensor satisfies

* ``2 E[F_ij] = E[G_k] = K``  for all ``i != j`` and all ``k``,
* ``S = n (n + 1) / 2 * K``  (``S`` the scalar curvature),
* ``E[sum_ij a_ij A_ij] = K / 2 * (sum_{i != j} a_ij + 2 sum_i a_ii)``,

where ``E`` is the Haar expectation. The first is checked by Monte Carlo,
together with the exact frame identity behind it (:func:`verify_uv_identity`).

All estimates in one call share the same Haar frames, so paired differences
have much smaller variance than the estimates themselves. Frames are drawn
in fixed-size shards, shard ``s`` from stream ``(seed, s)``; the result is
independent of the thread count.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import normalize_seed, stream
from .tensor import _as_tensor, bisectional_batch, bisectional_matrix, scalar
from .unitary import check_unitary, frame_act, haar_batch, u0, v0

SHARD = 1 << 14
DEFAULT_SAMPLES = 200_000
SIGMA = 5.0
ATOL = 1e-9


@dataclass(frozen=True)
class HaarEstimate:
    mean: float
    stderr: float
    samples: int

    @classmethod
    def from_samples(cls, x):
        x = np.asarray(x, dtype=np.float64)
        if x.size < 2:
            raise ValueError("need at least two samples")
        return cls(float(x.mean()), float(x.std(ddof=1) / np.sqrt(x.size)), int(x.size))

    def to_dict(self):
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples}


def _agrees(diff: HaarEstimate, sigma=SIGMA, atol=ATOL):
    return abs(diff.mean) <= sigma * diff.stderr + atol


def _zscore(diff: HaarEstimate, atol=ATOL):
    # differences at rounding level count as exact agreement
    if abs(diff.mean) <= atol:
        return 0.0
    if diff.stderr > 0:
        return diff.mean / diff.stderr
    return float(np.copysign(np.inf, diff.mean))


def bisectional_samples(T, N, seed, threads=1):
    """Bisectional matrices at ``N`` Haar frames, shape ``(N, n, n)``."""
    T = _as_tensor(T)
    if N < 2:
        raise ValueError("need at least two samples")
    seed = normalize_seed(seed)
    sizes = [min(SHARD, N - s) for s in range(0, N, SHARD)]

    def shard(s):
        return bisectional_batch(T, haar_batch(T.n, sizes[s], stream(seed, s)))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(shard, range(len(sizes))))
    else:
        parts = [shard(s) for s in range(len(sizes))]
    return np.concatenate(parts)


def _check_index(k, n):
    if not 0 <= k < n:
        raise ValueError(f"index {k} out of range for n={n}")


def estimate_F(T, i, j, N=DEFAULT_SAMPLES, seed=0) -> HaarEstimate:
    """Haar mean of the orthogonal bisectional curvature ``F_ij``."""
    T = _as_tensor(T)
    _check_index(i, T.n)
    _check_index(j, T.n)
    if i == j:
        raise ValueError("F needs i != j")
    if N < 100:
        raise ValueError("N must be at least 100")
    return HaarEstimate.from_samples(bisectional_samples(T, N, seed)[:, i, j])


def estimate_G(T, k, N=DEFAULT_SAMPLES, seed=0) -> HaarEstimate:
    """Haar mean of the holomorphic sectional curvature ``G_k``."""
    T = _as_tensor(T)
    _check_index(k, T.n)
    if N < 100:
        raise ValueError("N must be at least 100")
    return HaarEstimate.from_samples(bisectional_samples(T, N, seed)[:, k, k])


def _pooled_k(A):
    # per-frame average of the holomorphic sectional curvatures
    return np.einsum("...kk->...", A) / A.shape[-1]


@dataclass(frozen=True)
class Check:
    """One paired Monte Carlo comparison ``lhs - rhs``."""

    name: str
    lhs: HaarEstimate
    rhs: HaarEstimate
    diff: HaarEstimate

    @property
    def z(self):
        return _zscore(self.diff)

    @property
    def passed(self):
        return _agrees(self.diff)

    def to_row(self):
        return {
            "check": self.name,
            "lhs_mean": self.lhs.mean,
            "lhs_stderr": self.lhs.stderr,
            "rhs_mean": self.rhs.mean,
            "rhs_stderr": self.rhs.stderr,
            "diff_mean": self.diff.mean,
            "diff_stderr": self.diff.stderr,
            "z": self.z,
            "pass": self.passed,
        }


def _paired(name, x, y):
    return Check(name, HaarEstimate.from_samples(x), HaarEstimate.from_samples(y), HaarEstimate.from_samples(x - y))


@dataclass
class HaarReport:
    identity: str
    n: int
    samples: int
    seed: int
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def max_abs_z(self):
        return max((abs(c.z) for c in self.checks), default=0.0)

    def to_dict(self):
        return {
            "identity": self.identity,
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "passed": self.passed,
            "max_abs_z": self.max_abs_z,
            "values": {k: (v.to_dict() if isinstance(v, HaarEstimate) else v) for k, v in self.values.items()},
            "checks": [c.to_row() for c in self.checks],
        }

    def to_csv(self):
        buf = io.StringIO()
        rows = [{"identity": self.identity, "n": self.n, "samples": self.samples, "seed": self.seed, **c.to_row()} for c in self.checks]
        fields = ["identity", "n", "samples", "seed", "check", "lhs_mean", "lhs_stderr", "rhs_mean", "rhs_stderr",
                  "diff_mean", "diff_stderr", "z", "pass"]
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()


def _require_n2(T):
    T = _as_tensor(T)
    if T.n < 2:
        raise ValueError("needs complex dimension n >= 2")
    return T


def claim_checks(A):
    """Paired checks of ``2 F_ij`` against ``G_k`` and against the pooled K."""
    n = A.shape[-1]
    K = _pooled_k(A)
    checks = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                checks.append(_paired(f"2F({i},{j}) - G({k})", 2 * A[:, i, j], A[:, k, k]))
    for i in range(n):
        for j in range(i + 1, n):
            checks.append(_paired(f"2F({i},{j}) - K", 2 * A[:, i, j], K))
    for k in range(n):
        checks.append(_paired(f"G({k}) - K", A[:, k, k], K))
    return checks


def _frames(T, N, seed, threads, samples):
    if samples is None:
        return bisectional_samples(T, N, seed, threads)
    A = np.asarray(samples, dtype=np.float64)
    if A.ndim != 3 or A.shape[1:] != (T.n, T.n) or A.shape[0] < 2:
        raise ValueError(f"samples must have shape (N, {T.n}, {T.n}) with N >= 2")
    return A


def verify_claim(T, N=DEFAULT_SAMPLES, seed=0, threads=1, samples=None) -> HaarReport:
    """Check that ``2 E[F_ij]`` and ``E[G_k]`` all agree on one constant K.

    Every (i < j, k) pair is compared at 5 standard errors of the paired
    difference, as is each estimator against the pooled estimate
    ``K_hat = E[mean_k G_k]``.

    ``samples`` may carry precomputed bisectional matrices (from
    :func:`bisectional_samples`) so several identities share one set of
    frames; ``N`` and ``seed`` are then only recorded.
    """
    T = _require_n2(T)
    A = _frames(T, N, seed, threads, samples)
    rep = HaarReport("claim", T.n, len(A), normalize_seed(seed), claim_checks(A))
    rep.values["K"] = HaarEstimate.from_samples(_pooled_k(A))
    return rep


def verify_scalar_identity(T, N=DEFAULT_SAMPLES, seed=0, threads=1, samples=None) -> HaarReport:
    """Check ``S = n (n + 1) / 2 * K_hat`` at 5 standard errors of the right side."""
    T = _require_n2(T)
    n = T.n
    A = _frames(T, N, seed, threads, samples)
    m = n * (n + 1) / 2
    S = scalar(T)
    K = _pooled_k(A)
    rep = HaarReport("scalar", n, len(A), normalize_seed(seed))
    rep.checks.append(_paired("n(n+1)/2 K - S", m * K, np.full(len(A), S)))
    rep.values["S"] = S
    rep.values["K"] = HaarEstimate.from_samples(K)
    return rep


def weight_total(a):
    """``sum_{i != j} a_ij + 2 sum_i a_ii``; sign conclusions need it positive.

    Accepts one matrix or a stack of them.
    """
    a = np.asarray(a, dtype=np.float64)
    total = a.sum(axis=(-2, -1)) + np.trace(a, axis1=-2, axis2=-1)
    return float(total) if a.ndim == 2 else total


def verify_weighted_identity(T, a, N=DEFAULT_SAMPLES, seed=0, threads=1, samples=None) -> HaarReport:
    """Check ``E[sum_ij a_ij A_ij] = K / 2 * weight_total(a)``.

    Diagonal terms of the integrand are ``a_ii G_i``, which is the diagonal
    of the bisectional matrix, so the integrand is simply ``sum(a * A)``.
    ``a`` may be a stack of weight matrices, giving one check per matrix on
    the same frames.
    """
    T = _require_n2(T)
    a = np.asarray(a, dtype=np.float64)
    stack = a[None] if a.ndim == 2 else a
    if stack.ndim != 3 or stack.shape[1:] != (T.n, T.n):
        raise ValueError(f"weights must have shape ({T.n}, {T.n}) or (m, {T.n}, {T.n})")
    A = _frames(T, N, seed, threads, samples)
    K = _pooled_k(A)
    rep = HaarReport("weighted", T.n, len(A), normalize_seed(seed))
    totals = weight_total(stack)
    for w, (aw, total) in enumerate(zip(stack, np.atleast_1d(totals))):
        lhs = np.einsum("ij,sij->s", aw, A)
        rep.checks.append(_paired(f"sum a_ij A_ij - K/2 W [{w}]", lhs, 0.5 * total * K))
    rep.values["weight_total"] = [float(t) for t in np.atleast_1d(totals)]
    rep.values["K"] = HaarEstimate.from_samples(K)
    return rep


def verify_uv_identity(T, U, i, j) -> float:
    """Residual of the exact frame identity

        F_ij(U) + F_ij(U u0) = (G_i(U v0) + G_j(U v0)) / 2

    with ``u0 = u0(i, j, n)`` and ``v0 = v0(i, j, n)`` acting on the frame.
    """
    T = _as_tensor(T)
    if i == j:
        raise ValueError("i and j must differ")
    U = check_unitary(U, n=T.n)
    A = bisectional_matrix(T, U)
    Au = bisectional_matrix(T, frame_act(U, u0(i, j, T.n)))
    Av = bisectional_matrix(T, frame_act(U, v0(i, j, T.n)))
    return float(abs(A[i, j] + Au[i, j] - 0.5 * (Av[i, i] + Av[j, j])))

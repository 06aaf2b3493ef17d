import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nqobc._rng import derive_seed, stream
from nqobc.haar import (
    HaarEstimate,
    bisectional_samples,
    estimate_F,
    estimate_G,
    verify_claim,
    verify_scalar_identity,
    verify_uv_identity,
    verify_weighted_identity,
    weight_total,
)
from nqobc.tensor import constant_hsc, flat, product, random_kahler, scalar, surface
from nqobc.unitary import haar_sample

N = 40_000


class TestEstimates:
    def test_csc_zero_variance(self):
        c = 2.0
        f = estimate_F(constant_hsc(3, c), 0, 2, N=1000, seed=1)
        g = estimate_G(constant_hsc(3, c), 1, N=1000, seed=1)
        assert f.mean == pytest.approx(c / 2, abs=1e-14)
        assert g.mean == pytest.approx(c, abs=1e-14)
        assert f.stderr < 1e-14 and g.stderr < 1e-14

    def test_flat(self):
        assert estimate_G(flat(2), 0, N=200).mean == 0

    def test_sigma_cp1_g_mean(self):
        # K = 2S/(n(n+1)) = 0 for the zero-scalar product
        g = estimate_G(product(surface(-1), surface(1)), 0, N=N, seed=3)
        assert abs(g.mean) <= 5 * g.stderr

    def test_errors(self):
        T = constant_hsc(3, 1.0)
        with pytest.raises(ValueError):
            estimate_F(T, 1, 1)
        with pytest.raises(ValueError):
            estimate_F(T, 0, 3)
        with pytest.raises(ValueError):
            estimate_G(T, 0, N=50)

    def test_from_samples(self):
        e = HaarEstimate.from_samples([1.0, 3.0])
        assert (e.mean, e.samples) == (2.0, 2)
        assert e.stderr == pytest.approx(1.0)
        with pytest.raises(ValueError):
            HaarEstimate.from_samples([1.0])


class TestSamples:
    def test_shape_and_determinism(self):
        T = random_kahler(3, 1)
        a = bisectional_samples(T, 20_000, seed=5)
        assert a.shape == (20_000, 3, 3)
        assert a.tobytes() == bisectional_samples(T, 20_000, seed=5).tobytes()

    def test_thread_independent(self):
        T = random_kahler(2, 2)
        a = bisectional_samples(T, 50_000, seed=8, threads=1)
        b = bisectional_samples(T, 50_000, seed=8, threads=3)
        assert a.tobytes() == b.tobytes()

    def test_symmetric(self):
        A = bisectional_samples(random_kahler(4, 3), 500, seed=0)
        np.testing.assert_allclose(A, A.transpose(0, 2, 1), atol=0)


class TestClaim:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_random(self, n):
        rep = verify_claim(random_kahler(n, derive_seed(77, n)), N=N, seed=n)
        assert rep.passed, rep.to_dict()
        pairs = n * (n - 1) // 2
        assert len(rep.checks) == pairs * n + pairs + n

    def test_csc(self):
        rep = verify_claim(constant_hsc(3, 2.0), N=1000)
        assert rep.values["K"].mean == pytest.approx(2.0, abs=1e-14)
        assert rep.max_abs_z == 0
        assert rep.passed

    def test_detects_mismatch(self):
        # samples that are not Haar-distributed break the claim
        T = random_kahler(3, 4)
        A = bisectional_samples(T, 5000, seed=0)
        A[:, 0, 0] += 1.0
        assert not verify_claim(T, samples=A).passed

    def test_bad_samples(self):
        with pytest.raises(ValueError):
            verify_claim(random_kahler(3, 0), samples=np.zeros((10, 2, 2)))

    def test_n1_rejected(self):
        with pytest.raises(ValueError):
            verify_claim(surface(1.0), N=100)


class TestScalar:
    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_random(self, n):
        T = random_kahler(n, derive_seed(78, n))
        rep = verify_scalar_identity(T, N=N, seed=n)
        assert rep.passed
        assert rep.values["S"] == scalar(T)

    @pytest.mark.parametrize("n,c", [(2, -1.0), (3, 2.0), (5, 0.7)])
    def test_csc_exact(self, n, c):
        rep = verify_scalar_identity(constant_hsc(n, c), N=1000, seed=1)
        K = rep.values["K"]
        assert n * (n + 1) / 2 * K.mean == pytest.approx(c * n * (n + 1) / 2, abs=1e-12)
        assert K.stderr < 1e-14
        assert rep.passed

    def test_detects_wrong_scalar(self):
        T = random_kahler(3, 9)
        A = bisectional_samples(T, 5000, seed=0)
        assert not verify_scalar_identity(T, samples=A + 0.5).passed


class TestWeighted:
    def test_weight_total(self):
        assert weight_total(np.ones((2, 2))) == 6.0
        np.testing.assert_array_equal(weight_total(np.stack([np.eye(3), np.zeros((3, 3))])), [6.0, 0.0])

    @pytest.mark.parametrize("n", [2, 3])
    def test_random(self, n):
        T = random_kahler(n, derive_seed(79, n))
        a = stream(1, n).uniform(-1, 1, size=(5, n, n))
        rep = verify_weighted_identity(T, a, N=N, seed=n)
        assert len(rep.checks) == 5
        assert rep.passed

    def test_csc_exact(self):
        n, c = 3, 1.5
        a = np.arange(9.0).reshape(3, 3)
        rep = verify_weighted_identity(constant_hsc(n, c), a, N=500)
        # off-diagonal entries are c/2 and diagonal entries c at every frame
        expected = c / 2 * (a.sum() - np.trace(a)) + c * np.trace(a)
        assert rep.checks[0].lhs.mean == pytest.approx(expected, abs=1e-12)
        assert rep.checks[0].rhs.mean == pytest.approx(c / 2 * weight_total(a), abs=1e-12)
        assert rep.passed

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            verify_weighted_identity(constant_hsc(3, 1.0), np.ones((2, 2)), N=200)


class TestUV:
    def test_flat(self, haar):
        assert verify_uv_identity(flat(3), haar(3), 0, 2) == 0

    def test_csc(self, haar):
        assert verify_uv_identity(constant_hsc(4, -2.0), haar(4), 1, 3) < 1e-13

    def test_rejects_equal(self, haar):
        with pytest.raises(ValueError):
            verify_uv_identity(constant_hsc(2, 1.0), haar(2), 1, 1)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            verify_uv_identity(constant_hsc(2, 1.0), 2 * np.eye(2), 0, 1)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 6), tseed=st.integers(0, 2**63), useed=st.integers(0, 2**63), data=st.data())
def test_uv_identity_property(n, tseed, useed, data):
    i = data.draw(st.integers(0, n - 1))
    j = data.draw(st.integers(0, n - 1).filter(lambda x: x != i))
    T = random_kahler(n, tseed)
    assert verify_uv_identity(T, haar_sample(n, stream(useed)), i, j) < 1e-9 * max(1.0, T.norm)


class TestReport:
    def test_csv(self):
        rep = verify_claim(random_kahler(2, 5), N=2000, seed=4)
        rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
        assert len(rows) == len(rep.checks)
        assert rows[0]["identity"] == "claim"
        assert rows[0]["seed"] == "4"
        assert {r["pass"] for r in rows} <= {"True", "False"}

    def test_dict(self):
        d = verify_scalar_identity(constant_hsc(2, 1.0), N=200, seed=6).to_dict()
        assert d["seed"] == 6 and d["samples"] == 200 and d["passed"]
        assert d["values"]["S"] == 3.0

    def test_deterministic(self):
        T = random_kahler(3, 6)
        assert verify_claim(T, N=5000, seed=2).to_dict() == verify_claim(T, N=5000, seed=2).to_dict()

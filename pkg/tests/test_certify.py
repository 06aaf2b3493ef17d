import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nqobc._rng import derive_seed, stream
from nqobc.certify import (
    NO_VIOLATION_FOUND,
    VIOLATION_FOUND,
    Certificate,
    CertifyConfig,
    Witness,
    certificate_from_dict,
    certify_nqobc,
    curvature_laplacian,
    frame_min,
    lemma43_check,
    qobc_form,
    split_first_factor,
)
from nqobc.experiments import lemma43_rotation_residuals
from nqobc.tensor import bisectional_matrix, constant_hsc, flat, product, random_kahler, surface
from nqobc.unitary import haar_sample

import oracles

seeds = st.integers(min_value=0, max_value=2**63)


class TestForm:
    def test_flat(self, haar):
        assert qobc_form(flat(3), haar(3), [0.3, -1.2, 4.0]) == 0

    def test_csc(self):
        c = 1.7
        assert qobc_form(constant_hsc(2, c), np.eye(2), [1.0, 0.0]) == pytest.approx(c, abs=1e-15)

    def test_against_loops(self, haar):
        T = random_kahler(3, 21)
        U = haar(3, 21)
        xi = [0.2, -1.0, 0.7]
        expected = oracles.form_loops(oracles.bisectional_loops(T.components, U), xi)
        assert qobc_form(T, U, xi) == pytest.approx(expected, abs=1e-12)

    def test_requires_n2(self):
        with pytest.raises(ValueError, match="n >= 2"):
            qobc_form(surface(1.0), np.eye(1), [0.0])

    def test_shape(self):
        with pytest.raises(ValueError):
            qobc_form(flat(2), np.eye(2), [1.0, 2.0, 3.0])


class TestLaplacian:
    @pytest.mark.parametrize("n,c", [(2, 1.0), (3, -1.0), (4, 2.5)])
    def test_csc(self, n, c):
        L = curvature_laplacian(constant_hsc(n, c), np.eye(n))
        np.testing.assert_allclose(L, 0.5 * c * (n * np.eye(n) - np.ones((n, n))), atol=1e-14)
        w = np.sort(np.linalg.eigvalsh(L))
        expected = np.sort(np.r_[0.0, np.full(n - 1, c * n / 2)])
        np.testing.assert_allclose(w, expected, atol=1e-13)

    def test_kernel(self, haar):
        for key in range(10):
            L = curvature_laplacian(random_kahler(4, key), haar(4, key))
            np.testing.assert_allclose(L @ np.ones(4), 0, atol=1e-10)
            np.testing.assert_array_equal(L, L.T)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 5), tseed=seeds, useed=seeds, scale=st.floats(-5, 5), shift=st.floats(-10, 10))
def test_form_laws(n, tseed, useed, scale, shift):
    T = random_kahler(n, tseed)
    rng = stream(useed)
    U = haar_sample(n, rng)
    xi = rng.standard_normal(n)
    q = qobc_form(T, U, xi)
    L = curvature_laplacian(T, U)
    assert abs(q - 2 * xi @ L @ xi) < 1e-10
    assert abs(qobc_form(T, U, xi + shift) - q) < 1e-10 * max(1.0, shift**2)
    assert abs(qobc_form(T, U, scale * xi) - scale**2 * q) < 1e-10 * max(1.0, scale**2)


class TestFrameMin:
    def test_csc_negative(self):
        lam, xi = frame_min(constant_hsc(3, -1.0), np.eye(3))
        assert lam == pytest.approx(-1.5, abs=1e-12)
        assert np.linalg.norm(xi) == pytest.approx(1.0)
        assert abs(xi.sum()) < 1e-12

    def test_flat(self, haar):
        assert frame_min(flat(4), haar(4))[0] == 0

    def test_sigma_cp1(self, haar):
        T = product(surface(-1), surface(1))
        for key in range(20):
            assert abs(frame_min(T, haar(2, key))[0]) < 1e-10

    def test_eigenvector_value(self, haar):
        T = random_kahler(4, 3)
        U = haar(4, 3)
        lam, xi = frame_min(T, U)
        assert qobc_form(T, U, xi) == pytest.approx(2 * lam, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_against_sweep(self, n, haar):
        T = random_kahler(n, 40 + n)
        U = haar(n, n)
        A = bisectional_matrix(T, U)
        assert frame_min(T, U)[0] == pytest.approx(oracles.min_form_on_sphere(A), abs=1e-6)


class TestCertify:
    def test_csc_positive(self):
        cert = certify_nqobc(constant_hsc(3, 1.0), restarts=10)
        assert cert.status == NO_VIOLATION_FOUND
        assert cert.min_lambda >= -1e-9
        assert cert.restarts == 10

    def test_csc_negative_first_frame(self):
        cert = certify_nqobc(constant_hsc(2, -1.0))
        assert cert.status == VIOLATION_FOUND
        assert cert.restarts == 1
        np.testing.assert_allclose(cert.witness.frame, np.eye(2), atol=1e-15)
        assert sorted(cert.witness.xi) == [0.0, 1.0]
        assert cert.witness.value == pytest.approx(-1.0, abs=1e-12)

    def test_sigma_cp1(self):
        cert = certify_nqobc(product(surface(-1), surface(1)), restarts=30)
        assert cert.status == NO_VIOLATION_FOUND
        assert cert.min_lambda >= -1e-9

    def test_flat(self):
        cert = certify_nqobc(flat(2), restarts=3)
        assert cert.status == NO_VIOLATION_FOUND
        assert cert.min_lambda == 0

    def test_witness_sound(self):
        for k in range(10):
            T = random_kahler(3, derive_seed(5, k))
            cert = certify_nqobc(T, restarts=5, seed=k)
            if cert.violation:
                w = cert.witness
                assert qobc_form(T, w.frame, w.xi) < -1e-8
                assert w.value == qobc_form(T, w.frame, w.xi)
                assert w.xi.min() == 0 and w.xi.max() == 1

    def test_deterministic(self):
        T = product(surface(-3), surface(1))
        a = certify_nqobc(T, restarts=20, seed=7)
        b = certify_nqobc(T, restarts=20, seed=7)
        assert a.to_dict(timing=False) == b.to_dict(timing=False)

    def test_thread_independent(self):
        T = product(surface(-3), surface(1), flat(1))
        a = certify_nqobc(T, restarts=12, seed=3, threads=1)
        b = certify_nqobc(T, restarts=12, seed=3, threads=4)
        da, db = a.to_dict(timing=False), b.to_dict(timing=False)
        da["config"].pop("threads")
        db["config"].pop("threads")
        assert da == db

    def test_random_method(self):
        cert = certify_nqobc(product(surface(-3), surface(1)), method="random", restarts=20, max_iters=50)
        assert cert.violation

    def test_errors(self):
        with pytest.raises(ValueError):
            certify_nqobc(surface(-1))
        with pytest.raises(ValueError):
            certify_nqobc(flat(2), restarts=0)
        with pytest.raises(ValueError):
            CertifyConfig(method="annealing")

    def test_certificate_invariant(self):
        w = Witness(np.eye(2), np.array([0.0, 1.0]), -1e-12)
        with pytest.raises(ValueError):
            Certificate(VIOLATION_FOUND, w, 1, -1.0, 0, 0.0)
        with pytest.raises(ValueError):
            Certificate("maybe", None, 1, 0.0, 0, 0.0)

    def test_json(self):
        cert = certify_nqobc(constant_hsc(2, -1.0), seed=11)
        data = json.loads(json.dumps(cert.to_dict()))
        assert set(data) >= {"status", "witness", "restarts", "min_lambda", "seed", "elapsed_ms"}
        assert data["witness"]["frame"][0] == [1.0, 0.0]
        back = certificate_from_dict(data)
        assert back.status == cert.status
        np.testing.assert_array_equal(back.witness.frame, cert.witness.frame)
        assert back.seed == 11


class TestLemma43:
    def test_equality(self):
        r = lemma43_check(product(surface(-1), surface(1)))
        assert (r.lhs, r.rhs, r.holds) == (1.0, 1.0, True)

    def test_margin(self):
        r = lemma43_check(product(surface(0), constant_hsc(2, 1.0)))
        assert r.lhs == pytest.approx(1.5)
        assert r.rhs == 0
        assert r.holds

    def test_failing_case_is_violated(self):
        T = product(surface(-3), surface(1))
        r = lemma43_check(T)
        assert (r.lhs, r.rhs, r.holds) == (1.0, 3.0, False)
        assert certify_nqobc(T, restarts=20).violation

    def test_rejects_non_product(self):
        with pytest.raises(ValueError, match="one-dimensional"):
            lemma43_check(random_kahler(3, 1))
        assert not split_first_factor(product(constant_hsc(2, 1.0), surface(1)))
        assert split_first_factor(product(surface(2), random_kahler(2, 1)))

    @pytest.mark.parametrize("n2", [1, 2, 3])
    def test_rotation_identities(self, n2):
        for key in range(5):
            T = product(surface(float(key) - 2), random_kahler(n2, derive_seed(9, key)))
            assert lemma43_rotation_residuals(T).max() < 1e-10

    def test_rotated_form_matches_proof(self):
        # with xi = (1, -1, 0, ...) the form at the rotated frame is twice
        # R_0000 + R_1111 + sum_{j>=2} R_11jj
        T = product(surface(-0.4), random_kahler(3, 2))
        n = T.n
        s = 1 / np.sqrt(2)
        U = np.eye(n, dtype=complex)
        U[:2, :2] = [[s, s], [s, -s]]
        xi = np.zeros(n)
        xi[:2] = [1, -1]
        R = T.components.real
        expected = R[0, 0, 0, 0] + R[1, 1, 1, 1] + sum(R[1, 1, j, j] for j in range(2, n))
        assert qobc_form(T, U, xi) == pytest.approx(2 * expected, abs=1e-12)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from koopctl.errors import ConfigurationError, RejectedSampleError
from koopctl.ident import (RegressorSample, RlsEstimator, batch_least_squares,
                           regularized_least_squares, rls_step)

from oracles import naive_rls


def data(seed, n, d, q, scale=1.0):
    r = np.random.default_rng(seed)
    return r.normal(scale=scale, size=(n, d)), r.normal(size=(n, q))


def reference_with_resets(Z, Y, P0, p0, p1, rho=1.0):
    """Per-step exact eigenvalue check, the unscreened rule."""
    d = Z.shape[1]
    theta = np.zeros((d, Y.shape[1]))
    P = P0 * np.eye(d)
    resets = []
    for k, (z, y) in enumerate(zip(Z, Y)):
        Pz = P @ z
        m2 = rho + z @ Pz
        theta = theta - np.outer(Pz, z @ theta - y) / m2
        P = P - np.outer(Pz, Pz) / m2
        if np.linalg.eigvalsh(0.5 * (P + P.T))[0] <= p1:
            P = p0 * np.eye(d)
            resets.append(k)
    return theta, resets


def test_matches_textbook_recursion(backend):
    Z, Y = data(0, 80, 12, 3)
    est = RlsEstimator(12, 3, P0=100.0, p1=None, backend=backend)
    est.fit(Z, Y)
    theta, P = naive_rls(np.zeros((12, 3)), 100.0 * np.eye(12), Z, Y)
    np.testing.assert_allclose(est.theta, theta, atol=1e-10)
    np.testing.assert_allclose(est.P, P, atol=1e-10)


@given(seed=st.integers(0, 2**31), d=st.integers(1, 15), rho=st.floats(0.1, 10.0),
       P0=st.floats(0.1, 1e3))
def test_matches_prior_weighted_closed_form(seed, d, rho, P0):
    Z, Y = data(seed, 30, d, 2)
    theta0 = np.random.default_rng(seed + 1).normal(size=(d, 2))
    est = RlsEstimator(d, 2, rho=rho, P0=P0, p1=None, theta0=theta0)
    est.fit(Z, Y)
    expect = regularized_least_squares((Z, Y), P0, theta0, rho)
    scale = max(1.0, np.max(np.abs(expect)))
    np.testing.assert_allclose(est.theta, expect, atol=1e-8 * scale)


@given(seed=st.integers(0, 2**31), rho=st.floats(0.01, 100.0), scale=st.floats(0.01, 30.0))
def test_a_posteriori_identity(seed, rho, scale):
    Z, Y = data(seed, 40, 8, 3, scale)
    est = RlsEstimator(8, 3, rho=rho)
    log = est.fit(Z, Y)
    ratio = (rho / log.m2)[:, None]
    err = np.abs(log.eps_a - ratio * log.eps)
    assert np.max(err / np.maximum(1.0, np.abs(log.eps))) <= 1e-12
    assert np.all(np.abs(log.eps_a) <= np.abs(log.eps) * (1 + 1e-12) + 1e-15)
    assert np.all(log.m2 >= rho)


def test_gain_laws_each_step(backend):
    Z, Y = data(3, 300, 10, 2, scale=20.0)
    est = RlsEstimator(10, 2, P0=1e4, p0=1e4, p1=1e-3, backend=backend)
    for k, (z, y) in enumerate(zip(Z, Y)):
        before = z @ est.P @ z
        res = est.update(z, y)
        P = est.P
        assert np.max(np.abs(P - P.T)) <= 1e-12 * max(1.0, np.max(np.abs(P)))
        assert est.lambda_min() > 0
        if not res.reset:
            assert z @ P @ z <= before * (1 + 1e-12)
    assert est.resets, "data was chosen to trigger resets"


def test_reset_restores_scaled_identity():
    Z, Y = data(4, 50, 5, 1, scale=100.0)
    est = RlsEstimator(5, 1, P0=1.0, p0=7.0, p1=1e-3)
    log = est.fit(Z, Y)
    k = log.reset_steps[0]
    est2 = RlsEstimator(5, 1, P0=1.0, p0=7.0, p1=1e-3)
    est2.fit(Z[:k + 1], Y[:k + 1])
    np.testing.assert_array_equal(est2.P, 7.0 * np.eye(5))


@pytest.mark.parametrize("scale", [1.0, 30.0, 300.0])
def test_screened_resets_match_exact_rule(backend, scale):
    Z, Y = data(5, 400, 8, 2, scale)
    est = RlsEstimator(8, 2, P0=1e4, p0=1e4, p1=1e-4, backend=backend)
    est.fit(Z, Y)
    theta, resets = reference_with_resets(Z, Y, 1e4, 1e4, 1e-4)
    assert est.resets == resets
    np.testing.assert_allclose(est.theta, theta, rtol=1e-7, atol=1e-9)


def test_resets_disabled():
    Z, Y = data(6, 200, 4, 1, scale=100.0)
    est = RlsEstimator(4, 1, p1=None)
    est.fit(Z, Y)
    assert est.resets == []


def test_projection_clips(backend):
    Z, Y = data(7, 60, 6, 2, scale=5.0)
    est = RlsEstimator(6, 2, projection=(-0.1, 0.2), backend=backend)
    log = est.fit(Z, Y)
    assert est.theta.min() >= -0.1 and est.theta.max() <= 0.2
    # the a-posteriori error uses the projected estimate
    np.testing.assert_allclose(log.eps_a[-1], Z[-1] @ est.theta - Y[-1])


def test_rejected_sample_leaves_state():
    est = RlsEstimator(3, 1)
    est.update(np.ones(3), [1.0])
    theta, P = est.theta.copy(), est.P.copy()
    with pytest.raises(RejectedSampleError):
        est.update([np.nan, 0, 0], [1.0])
    np.testing.assert_array_equal(est.theta, theta)
    np.testing.assert_array_equal(est.P, P)


def test_fit_marks_rejected_rows(backend):
    Z, Y = data(8, 10, 3, 1)
    Z[4, 1] = np.inf
    est = RlsEstimator(3, 1, backend=backend)
    log = est.fit(Z, Y)
    assert log.rejected.tolist() == [k == 4 for k in range(10)]
    assert np.all(np.isfinite(est.theta))
    ref = RlsEstimator(3, 1, backend=backend)
    ref.fit(np.delete(Z, 4, 0), np.delete(Y, 4, 0))
    np.testing.assert_allclose(est.theta, ref.theta, rtol=1e-12)


def test_backends_agree_at_bilinear_size():
    from koopctl import kernels
    if kernels.BACKEND != "cython":
        pytest.skip("compiled kernel not built")
    Z, Y = data(9, 150, 682, 18)
    a = RlsEstimator(682, 18, backend="python")
    b = RlsEstimator(682, 18, backend="cython")
    la, lb = a.fit(Z, Y), b.fit(Z, Y)
    np.testing.assert_allclose(a.theta, b.theta, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(la.m2, lb.m2, rtol=1e-12)
    assert a.resets == b.resets


def test_rls_step_tuple():
    est = RlsEstimator(2, 1, P0=1.0, p1=None)
    out = rls_step(est, RegressorSample(np.array([1.0, 0.0]), np.array([2.0])))
    assert out[0] is est
    np.testing.assert_allclose(out[1], [-2.0])
    assert out[3] == pytest.approx(np.sqrt(2.0))
    np.testing.assert_allclose(out[2], [-1.0])


def test_copy_is_independent():
    est = RlsEstimator(2, 1)
    other = est.copy()
    other.update([1.0, 1.0], [1.0])
    assert np.all(est.theta == 0) and est.n_steps == 0


@pytest.mark.parametrize("kwargs", [dict(rho=0.0), dict(p0=1.0, p1=2.0), dict(P0=-1.0),
                                    dict(projection=(1.0, 0.0))])
def test_bad_settings(kwargs):
    with pytest.raises(ConfigurationError):
        RlsEstimator(3, 1, **kwargs)


def test_fit_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        RlsEstimator(3, 1).fit(np.zeros((2, 4)), np.zeros((2, 1)))


def test_batch_minimum_norm(rng):
    # rank-deficient: the third regressor column repeats the first
    Z = rng.normal(size=(40, 3))
    Z[:, 2] = Z[:, 0]
    Y = rng.normal(size=(40, 2))
    theta = batch_least_squares((Z, Y))
    np.testing.assert_allclose(theta, np.linalg.pinv(Z) @ Y, atol=1e-12)
    np.testing.assert_allclose(Z.T @ Z @ theta, Z.T @ Y, atol=1e-10)
    np.testing.assert_allclose(theta[0], theta[2], atol=1e-12)


def test_batch_accepts_samples(rng):
    Z, Y = rng.normal(size=(10, 3)), rng.normal(size=(10, 1))
    samples = [RegressorSample(z, y) for z, y in zip(Z, Y)]
    np.testing.assert_allclose(batch_least_squares(samples), batch_least_squares((Z, Y)))
    with pytest.raises(ConfigurationError):
        batch_least_squares([])


def test_large_prior_approaches_batch(rng):
    Z, Y = rng.normal(size=(50, 4)), rng.normal(size=(50, 2))
    np.testing.assert_allclose(regularized_least_squares((Z, Y), 1e12),
                               batch_least_squares((Z, Y)), atol=1e-9)


def test_pure_python_switch():
    import os
    import subprocess
    import sys
    env = dict(os.environ, KOOPCTL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import koopctl; print(koopctl.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout
    assert out.strip() == "python"

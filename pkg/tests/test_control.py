import numpy as np
import pytest
from hypothesis import given, strategies as st

from koopctl.control import (ControlProblem, affine_form, box_lp_value, closed_loop_run,
                             effective_gain, optimal_control, solve_box_lp)
from koopctl.errors import ConfigurationError
from koopctl.ident import BilinearKoopmanModel, LinearKoopmanModel, OperatingPoint, RlsEstimator
from koopctl.observables import ObservableSet, linear_observables
from koopctl.robots import RobotSystem

from oracles import corner_argmax, direct_bilinear, random_blocks

objectives = st.integers(2, 6).flatmap(
    lambda m: st.lists(st.floats(-10, 10, allow_nan=False), min_size=m, max_size=m))


@given(c=objectives)
def test_box_lp_matches_corners(c):
    c = np.array(c)
    U = solve_box_lp(c, -4, 3)
    _, best = corner_argmax(c, -4.0, 3.0)
    assert float(c @ U) == best
    assert box_lp_value(c, -4, 3) == pytest.approx(best)


@given(c=objectives)
def test_bang_bang(c):
    c = np.array(c)
    U = solve_box_lp(c, -4, 3)
    at_bound = (U == -4) | (U == 3)
    assert np.all(at_bound | (c == 0))


def test_zero_coefficient_tie_rule():
    np.testing.assert_array_equal(solve_box_lp([0.0, 1.0, -1.0], -4, 3), [0.0, 3.0, -4.0])
    # zero infeasible: nearest bound
    np.testing.assert_array_equal(solve_box_lp([0.0, 0.0], [1.0, -5.0], [2.0, -2.0]), [1.0, -2.0])


@given(c=objectives, alpha=st.floats(1e-3, 1e3))
def test_scale_covariance(c, alpha):
    c = np.array(c)
    np.testing.assert_array_equal(solve_box_lp(alpha * c), solve_box_lp(c))
    assert box_lp_value(alpha * c) == pytest.approx(alpha * box_lp_value(c), rel=1e-12, abs=1e-12)


def test_lp_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_box_lp([np.nan, 1.0])
    with pytest.raises(ConfigurationError):
        solve_box_lp([1.0], 3.0, -4.0)


def bilinear(rng, n1=4, n2=5, m=3):
    b = random_blocks(rng, n1, n2, m)
    x0 = OperatingPoint(rng.normal(size=n1), rng.normal(size=n2))
    return BilinearKoopmanModel.from_blocks(x0=x0, **b), b, x0


def test_effective_gain_central_differences(rng):
    model, b, x0 = bilinear(rng)
    for _ in range(20):
        z1, z2, U = rng.normal(size=4), rng.normal(size=5), rng.uniform(-4, 3, size=3)
        h = 1e-5
        fd = np.column_stack([
            (direct_bilinear(b, z1, z2, U + h * e, x0.z1, x0.lifted)
             - direct_bilinear(b, z1, z2, U - h * e, x0.z1, x0.lifted)) / (2 * h)
            for e in np.eye(3)])
        np.testing.assert_allclose(effective_gain(model, z1, z2), fd, atol=1e-6)


def test_prediction_affine_in_input(rng):
    model, _, _ = bilinear(rng)
    w = rng.normal(size=5)
    z1, z2, U = rng.normal(size=4), rng.normal(size=5), rng.normal(size=3)
    form = affine_form(model, w, z1, z2)
    assert form.offset + form.c @ U == pytest.approx(w @ model.predict(z1, z2, U))


def test_linear_gain_is_B2(rng):
    model = LinearKoopmanModel(rng.normal(size=(3, 4)), rng.normal(size=(3, 3)),
                               rng.normal(size=(3, 2)))
    np.testing.assert_array_equal(effective_gain(model, np.zeros(4), np.zeros(3)), model.B2)


def test_optimal_control_linear_corner_oracle(rng):
    for m in range(2, 7):
        model = LinearKoopmanModel(rng.normal(size=(3, 4)), rng.normal(size=(3, 3)),
                                   rng.normal(size=(3, m)))
        w, z1, z2 = rng.normal(size=3), rng.normal(size=4), rng.normal(size=3)
        U, value = optimal_control(ControlProblem(w, model), z1, z2)
        best = max(w @ model.predict(z1, z2, np.where(np.array(bits) == 1, 3.0, -4.0))
                   for bits in np.ndindex(*(2,) * m))
        assert value == pytest.approx(best, rel=1e-12)
        assert value >= w @ model.predict(z1, z2, np.zeros(m)) - 1e-12


def test_control_problem_validation(rng):
    model = LinearKoopmanModel.zeros(4, 3, 2)
    with pytest.raises(ConfigurationError):
        ControlProblem(np.ones(4), model)
    with pytest.raises(ConfigurationError):
        ControlProblem(np.ones(3), model, lower=1.0, upper=1.0)
    # short weight vectors are padded over extra observables
    assert ControlProblem(np.ones(2), model).weights.tolist() == [1, 1, 0]


def test_zero_weights_drift():
    sys_ = RobotSystem(2)
    obs = linear_observables(np.eye(8))
    X0 = sys_.pack_state([[0, 0], [1, 1]], [[1, 0], [0, 1]])
    rec = closed_loop_run(sys_, obs, np.zeros(8), LinearKoopmanModel.zeros(8, 8, 4), X0, 10,
                          mode="fixed-model")
    assert np.all(rec.U == 0)
    np.testing.assert_allclose(rec.X[-1], np.linalg.matrix_power(sys_.A, 10) @ X0)


def test_exact_linear_bank_matches_true_lp(rng):
    sys_ = RobotSystem(2)
    C = rng.normal(size=(6, 8))
    true = LinearKoopmanModel(C @ sys_.A, np.zeros((6, 6)), C @ sys_.B)
    w = rng.normal(size=6)
    rec = closed_loop_run(sys_, linear_observables(C), w, true, rng.normal(size=8), 30,
                          mode="fixed-model")
    c = (C @ sys_.B).T @ w
    for k in range(30):
        np.testing.assert_array_equal(rec.U[k], solve_box_lp(c))
    np.testing.assert_allclose(rec.utility_realized, rec.utility_predicted, rtol=1e-10, atol=1e-9)
    assert np.max(np.abs(rec.eps)) < 1e-9


def test_adaptive_run_records(rng):
    sys_ = RobotSystem(1)
    C = rng.normal(size=(3, 4))
    template = LinearKoopmanModel.zeros(4, 3, 2)
    est = RlsEstimator(template.regressor_dim, 3)
    rec = closed_loop_run(sys_, linear_observables(C), np.ones(3), est, np.zeros(4), 25,
                          model_template=template)
    assert rec.X.shape == (26, 4) and rec.U.shape == (25, 2) and rec.eps_a.shape == (25, 3)
    assert np.all((rec.U >= -4) & (rec.U <= 3))
    assert est.n_steps == 25
    np.testing.assert_allclose(rec.eps_a, rec.eps / rec.m2[:, None], atol=1e-12)


def test_adaptive_needs_template():
    with pytest.raises(ConfigurationError):
        closed_loop_run(RobotSystem(1), linear_observables(np.eye(4)), np.ones(4),
                        RlsEstimator(12, 4), np.zeros(4), 3)


def test_nonfinite_observable_aborts():
    sys_ = RobotSystem(1)
    obs = ObservableSet([("x", lambda X: X[0]), ("wall", lambda X: np.inf if X[0] > 0.2 else 0.0)])
    model = LinearKoopmanModel(np.zeros((2, 4)), np.zeros((2, 2)), np.array([[1.0, 0], [0, 0]]))
    rec = closed_loop_run(sys_, obs, [1.0, 0.0], model, np.zeros(4), 50, mode="fixed-model")
    assert rec.aborted and "step" in rec.diagnostic
    assert rec.steps < 50

import numpy as np
import pytest

from koopctl.errors import ConfigurationError
from koopctl.ident import (BilinearKoopmanModel, LinearKoopmanModel, OperatingPoint, RlsEstimator,
                           batch_least_squares, bilinear_regressor, linear_regressor)
from koopctl.observables import generate_trajectory, linear_observables, stack_samples
from koopctl.robots import ExcitationSpec, RobotSystem, excitation_signal, random_states
from koopctl.utility import UtilityBank
from koopctl.validation import (SERIES, ValidationReport, ValidationSpec, combine_reports,
                                rollout_approx_model, validate, validation_errors)


@pytest.fixture
def planted():
    sys_ = RobotSystem(2)
    C = np.random.default_rng(0).normal(size=(5, 8))
    model = LinearKoopmanModel(C @ sys_.A, np.zeros((5, 5)), C @ sys_.B)
    return sys_, linear_observables(C), model


def test_exact_bank_has_zero_errors(planted):
    sys_, obs, model = planted
    rep = validate(model, sys_, obs, ValidationSpec(seeds=[1, 2], horizon=100,
                                                   initial_state=np.ones(8)))
    assert rep.horizon == 200
    for name in SERIES:
        assert np.max(np.abs(rep.series(name))) <= 1e-10 * 1e3
    assert rep.norm() <= 1e-10


def test_fixed_model_series_coincide():
    sys_ = RobotSystem(1)
    obs = UtilityBank(1).observables()
    model = LinearKoopmanModel(np.ones((6, 4)) * 0.01, 0.5 * np.eye(6), np.zeros((6, 2)))
    rep = validate(model, sys_, obs, ValidationSpec(seeds=[3], horizon=20))
    np.testing.assert_array_equal(rep.eps, rep.neg_eta)
    np.testing.assert_array_equal(rep.eps_a, rep.neg_eta)


def test_training_seed_rejected(planted):
    sys_, obs, model = planted
    with pytest.raises(ConfigurationError):
        validate(model, sys_, obs, ValidationSpec(seeds=[4, 5], training_seed=5))


def test_rollout_divergence_flagged():
    sys_ = RobotSystem(1)
    model = LinearKoopmanModel(np.zeros((1, 4)), np.array([[1e100]]), np.zeros((1, 2)))
    ro = rollout_approx_model(model, np.zeros(4), [1.0], np.zeros((10, 2)), sys_)
    assert ro.diverged and ro.steps < 10


def test_diverged_rows_are_nan():
    sys_ = RobotSystem(1)
    obs = linear_observables(np.ones((1, 4)))
    model = LinearKoopmanModel(np.zeros((1, 4)), np.array([[1e100]]), np.zeros((1, 2)))
    rep = validate(model, sys_, obs, ValidationSpec(seeds=[7], horizon=10,
                                                   initial_state=np.ones(4)))
    assert rep.diverged
    assert np.isnan(rep.z_tilde[-1]).all()
    assert np.isfinite(rep.z_tilde[0]).all()


def test_adaptive_validation_identity():
    sys_ = RobotSystem(1)
    obs = UtilityBank(1).observables()
    model = LinearKoopmanModel.zeros(4, 6, 2)
    est = RlsEstimator(12, 6)
    rep = validate(model, sys_, obs, ValidationSpec(seeds=[1], horizon=30, adaptive=True),
                   estimator=est)
    # each seed runs on a copy, the original is untouched
    assert est.n_steps == 0
    assert np.all(np.abs(rep.eps_a) <= np.abs(rep.eps) + 1e-15)
    with pytest.raises(ConfigurationError):
        validate(model, sys_, obs, ValidationSpec(seeds=[1], adaptive=True))


def test_report_aggregates():
    e = np.array([[1.0, -2.0], [3.0, 0.0]])
    rep = ValidationReport(e, e, e, e)
    agg = rep.aggregates()
    np.testing.assert_allclose(agg["z_tilde"]["rmse"], [np.sqrt(5), np.sqrt(2)])
    assert agg["eps"]["max_abs"] == [3.0, 2.0]
    assert agg["neg_eta"]["rms"] == pytest.approx(np.sqrt(14 / 4))
    both = combine_reports([rep, rep], {"x": 1})
    assert both.horizon == 4 and both.metadata == {"x": 1}
    with pytest.raises(ConfigurationError):
        ValidationReport(e, e[:1], e, e)


def test_length_mismatch_rejected(planted):
    sys_, obs, model = planted
    samples = generate_trajectory(sys_, obs, np.zeros(8), np.zeros((5, 4)))
    ro = rollout_approx_model(model, np.zeros(8), np.zeros(5), np.zeros((3, 4)), sys_)
    with pytest.raises(ConfigurationError):
        validation_errors(model, samples, ro)


def test_bilinear_fits_training_data_no_worse():
    # nested model classes fitted by the same least-squares criterion
    sys_ = RobotSystem(2)
    bank = UtilityBank(2)
    obs = bank.observables()
    rng = np.random.default_rng(1)
    Z1, L, U, Ln = [], [], [], []
    for e, X0 in enumerate(random_states(sys_, rng, 40, center=bank.goals.ravel(),
                                         position_spread=4, velocity_spread=1)):
        s = generate_trajectory(sys_, obs, X0, excitation_signal(ExcitationSpec(4, 10, seed=e)))
        a, b, c, _, d = stack_samples(s)
        Z1.append(a), L.append(b), U.append(c), Ln.append(d)
    Z1, L, U, Ln = map(np.vstack, (Z1, L, U, Ln))
    x0 = OperatingPoint(bank.goal_state(), obs.evaluate(bank.goal_state()))
    lin = batch_least_squares((linear_regressor(Z1, L, U), Ln))
    bil = batch_least_squares((bilinear_regressor(Z1, L, U, x0), Ln))
    r_lin = LinearKoopmanModel.from_theta(lin, 8, 12, 4).predict(Z1, L, U) - Ln
    r_bil = BilinearKoopmanModel(bil, BilinearKoopmanModel.zeros(8, 12, 4).layout, x0).predict(
        Z1, L, U) - Ln
    assert np.sqrt(np.mean(r_bil ** 2)) <= np.sqrt(np.mean(r_lin ** 2))

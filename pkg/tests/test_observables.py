import numpy as np
import pytest
from hypothesis import given, strategies as st

from koopctl.errors import ConfigurationError, EvaluationError
from koopctl.observables import (KoopmanState, ObservableSet, generate_trajectory,
                                 identity_observables, lift, linear_observables, stack_samples)
from koopctl.robots import ExcitationSpec, RobotSystem, excitation_signal
from koopctl.utility import UtilityBank


def test_duplicate_names_rejected():
    with pytest.raises(ConfigurationError):
        ObservableSet([("a", lambda X: 0.0), ("a", lambda X: 1.0)])


def test_nonfinite_observable_reports_index():
    obs = ObservableSet([("ok", lambda X: 1.0), ("bad", lambda X: np.log(X[0]))])
    with np.errstate(divide="ignore"):
        with pytest.raises(EvaluationError) as info:
            obs.evaluate(np.zeros(2))
    assert info.value.index == 1


def test_vectorised_path_matches_entries(rng):
    bank = UtilityBank(4)
    obs = bank.observables()
    for _ in range(20):
        X = rng.normal(scale=3, size=16)
        np.testing.assert_allclose(obs.evaluate(X), obs.evaluate_each(X), rtol=1e-13, atol=1e-14)


def test_linear_observables(rng):
    C = rng.normal(size=(5, 4))
    X = rng.normal(size=4)
    np.testing.assert_allclose(linear_observables(C).evaluate(X), C @ X)
    np.testing.assert_array_equal(identity_observables(4).evaluate(X), X)


def test_lift_blocks():
    obs = identity_observables(4)
    extra = linear_observables(np.ones((1, 4)), prefix="s")
    z = lift(np.arange(4.0), obs, extra)
    assert isinstance(z, KoopmanState)
    np.testing.assert_array_equal(z.z, [0, 1, 2, 3, 0, 1, 2, 3, 6])
    np.testing.assert_array_equal(z.lifted, [0, 1, 2, 3, 6])


def test_lift_rejects_nonfinite_state():
    with pytest.raises(ConfigurationError):
        lift(np.array([0.0, np.nan, 0.0, 0.0]), identity_observables(4))


def test_trajectory_chains_states():
    sys_ = RobotSystem(2)
    obs = UtilityBank(2).observables()
    U = excitation_signal(ExcitationSpec(4, 25, seed=3))
    samples = generate_trajectory(sys_, obs, np.zeros(8), U)
    assert len(samples) == 25
    for a, b in zip(samples, samples[1:]):
        assert a.z_next is b.z


@given(seed=st.integers(0, 10_000), n=st.integers(1, 4), steps=st.integers(1, 30))
def test_state_block_exact(seed, n, steps):
    sys_ = RobotSystem(n)
    U = excitation_signal(ExcitationSpec(2 * n, steps, seed=seed))
    X0 = np.random.default_rng(seed).normal(size=4 * n)
    samples = generate_trajectory(sys_, UtilityBank(n).observables(), X0, U)
    Z1, _, Us, Z1n, _ = stack_samples(samples)
    resid = Z1n - Z1 @ sys_.A.T - Us @ sys_.B.T
    assert np.max(np.abs(resid)) <= 1e-12 * max(1.0, np.max(np.abs(Z1n)))


def test_empty_inputs_give_no_samples():
    sys_ = RobotSystem(1)
    assert generate_trajectory(sys_, identity_observables(4), np.zeros(4), np.zeros((0, 2))) == []


def test_bad_input_shape():
    sys_ = RobotSystem(1)
    with pytest.raises(ConfigurationError):
        generate_trajectory(sys_, identity_observables(4), np.zeros(4), np.zeros((3, 3)))

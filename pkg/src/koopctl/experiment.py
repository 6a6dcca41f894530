"""Experiment pipelines shared by the CLI and the acceptance suite."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .config import ExperimentConfig
from .control import ClosedLoopRecord, closed_loop_run
from .errors import ConfigurationError, DivergenceError
from .ident.estimator import EstimationLog, RlsEstimator
from .ident.models import BilinearKoopmanModel, LinearKoopmanModel
from .ident.regressors import bilinear_regressor, linear_regressor
from .observables import LiftedSample, generate_trajectory, stack_samples
from .robots import ExcitationSpec, excitation_signal, random_states
from .validation import ValidationReport, ValidationSpec, validate


def excitation_spec(cfg: ExperimentConfig, seed: int, horizon: int) -> ExcitationSpec:
    e = cfg.excitation
    return ExcitationSpec(2 * cfg.n_robots, horizon, kind=e.kind, lower=e.lower, upper=e.upper,
                          seed=seed, hold=e.hold, n_terms=e.n_terms,
                          frequency_range=tuple(e.frequency_range), dt=cfg.dt)


def simulate(cfg: ExperimentConfig):
    """Excited rollout from the initial state: ``(inputs, samples)``."""
    system = cfg.system()
    inputs = excitation_signal(excitation_spec(cfg, cfg.training_seed(), cfg.horizon))
    samples = generate_trajectory(system, cfg.observables(), cfg.initial_X(), inputs)
    return inputs, samples


def episode_seed(cfg: ExperimentConfig, episode: int) -> int:
    return 1_000_000 * (cfg.training_seed() + 1) + episode


def training_episodes(cfg: ExperimentConfig) -> List[List[LiftedSample]]:
    ident = cfg.identification
    if ident.episodes == 1:
        return [simulate(cfg)[1]]
    system = cfg.system()
    obs = cfg.observables()
    length = ident.episode_length or cfg.horizon
    rng = np.random.default_rng([cfg.training_seed(), 0x3])
    starts = random_states(system, rng, ident.episodes, center=cfg.goal_positions(),
                           position_spread=ident.position_spread,
                           velocity_spread=ident.velocity_spread)
    return [generate_trajectory(system, obs, X0,
                                excitation_signal(excitation_spec(cfg, episode_seed(cfg, e), length)))
            for e, X0 in enumerate(starts)]


def model_template(cfg: ExperimentConfig):
    obs = cfg.observables()
    n1, n2, m = 4 * cfg.n_robots, len(obs), 2 * cfg.n_robots
    if cfg.model.kind == "bilinear":
        return BilinearKoopmanModel.zeros(n1, n2, m, cfg.operating_point(obs))
    return LinearKoopmanModel.zeros(n1, n2, m)


def regression_data(template, episodes):
    Zs, Ys = [], []
    for samples in episodes:
        if not samples:
            continue
        Z1, L, U, _, Ln = stack_samples(samples)
        if isinstance(template, BilinearKoopmanModel):
            Zs.append(bilinear_regressor(Z1, L, U, template.x0))
        else:
            Zs.append(linear_regressor(Z1, L, U))
        Ys.append(Ln)
    if not Zs:
        return np.zeros((0, template.regressor_dim)), np.zeros((0, template.n_lifted))
    return np.vstack(Zs), np.vstack(Ys)


def make_estimator(cfg: ExperimentConfig, template, theta0=None) -> RlsEstimator:
    e = cfg.estimator
    projection = None if e.projection is None else (e.projection[0], e.projection[1])
    return RlsEstimator(template.regressor_dim, template.n_lifted, rho=e.rho, P0=e.P0_scale,
                        p0=e.p0, p1=e.p1, theta0=theta0, projection=projection)


@dataclass
class IdentificationResult:
    model: object
    estimator: RlsEstimator
    log: EstimationLog
    parameter_error: Optional[float] = None
    diverged: bool = False


def exact_linear_parameters(cfg: ExperimentConfig) -> Optional[np.ndarray]:
    """Minimum-norm exact parameters for a linear bank ``z2 = C X``.

    Any ``theta`` reproducing ``C A z1 + C B U`` on the regressor subspace
    ``{[x; C x; u]}`` is exact; the recursion started from zero converges to
    the one of smallest norm, i.e. the projection of ``[C A, 0, C B]`` onto
    that subspace.
    """
    if cfg.utility.kind != "linear" or cfg.model.kind != "linear":
        return None
    system = cfg.system()
    C = cfg.linear_bank_matrix()
    n1, m, n2 = system.state_dim, system.input_dim, C.shape[0]
    theta_any = np.vstack([(C @ system.A).T, np.zeros((n2, n2)), (C @ system.B).T])
    M = np.block([[np.eye(n1), np.zeros((n1, m))],
                  [C, np.zeros((n2, m))],
                  [np.zeros((m, n1)), np.eye(m)]])
    Q, _ = np.linalg.qr(M)
    return Q @ (Q.T @ theta_any)


def identify(cfg: ExperimentConfig, episodes=None) -> IdentificationResult:
    template = model_template(cfg)
    if episodes is None:
        episodes = training_episodes(cfg)
    Z, Y = regression_data(template, episodes)
    est = make_estimator(cfg, template)
    log = est.fit(Z, Y)
    if not np.all(np.isfinite(est.theta)):
        return IdentificationResult(template, est, log, None, diverged=True)
    model = template.with_theta(est.theta)
    exact = exact_linear_parameters(cfg)
    error = None if exact is None else float(np.max(np.abs(est.theta - exact)))
    return IdentificationResult(model, est, log, error)


def validation_spec(cfg: ExperimentConfig) -> ValidationSpec:
    e = cfg.excitation
    return ValidationSpec(seeds=list(cfg.validation.seeds), horizon=cfg.validation.horizon,
                          training_seed=cfg.training_seed(), kind=e.kind, lower=e.lower,
                          upper=e.upper, hold=e.hold, initial_state=cfg.initial_X(),
                          adaptive=cfg.validation.adaptive)


def run_validation(cfg: ExperimentConfig, model) -> ValidationReport:
    system = cfg.system()
    obs = cfg.observables()
    if model.n1 != system.state_dim or model.n_lifted != len(obs) or model.m != system.input_dim:
        raise ConfigurationError("model dimensions do not match the configured system and bank")
    estimator = make_estimator(cfg, model, theta0=model.theta) if cfg.validation.adaptive else None
    return validate(model, system, obs, validation_spec(cfg), estimator=estimator)


def run_control(cfg: ExperimentConfig, model=None, mode: Optional[str] = None):
    """Closed-loop run; returns ``(record, estimator or None)``.

    Adaptive runs without a model first identify one from the configured
    training data and keep updating the same estimator online.
    """
    mode = mode or cfg.control.mode
    system = cfg.system()
    obs = cfg.observables()
    estimator = None
    if model is None:
        result = identify(cfg)
        if result.diverged:
            raise DivergenceError("warm-up identification diverged")
        model, estimator = result.model, result.estimator
    elif model.n1 != system.state_dim or model.n_lifted != len(obs):
        raise ConfigurationError("model dimensions do not match the configured system and bank")
    if mode == "adaptive":
        if estimator is None:
            estimator = make_estimator(cfg, model, theta0=model.theta)
        controller = estimator
    else:
        controller = model
    record = closed_loop_run(system, obs, cfg.weight_vector(), controller, cfg.initial_X(),
                             cfg.control.steps, mode=mode, lower=cfg.control.lower,
                             upper=cfg.control.upper, model_template=model)
    return record, estimator


def control_summary(cfg: ExperimentConfig, record: ClosedLoopRecord, estimator=None) -> dict:
    bank = cfg.bank()
    summary = {"steps": record.steps, "aborted": record.aborted, "diagnostic": record.diagnostic}
    if bank is not None:
        d0 = bank.goal_distances(record.X[0])
        dT = bank.goal_distances(record.X[-1])
        summary["initial_goal_distances"] = d0.tolist()
        summary["final_goal_distances"] = dT.tolist()
        summary["mean_goal_distance_ratio"] = float(dT.mean() / d0.mean()) if d0.mean() > 0 else 0.0
    summary["cumulative_utility"] = float(np.sum(record.utility_realized))
    summary["reset_count"] = len(record.resets)
    summary["feasible"] = bool(np.all(record.U >= cfg.control.lower) and
                               np.all(record.U <= cfg.control.upper))
    return summary

"""Model validation against the exact nonlinear lifting.

Four error series are reported per step ``k`` (each of length ``N2``):

``eps``
    a-priori estimation error ``theta(k)^T zeta(k) - z2(k+1)`` with running
    (adaptive) estimates; equals ``neg_eta`` for a fixed model.
``eps_a``
    a-posteriori error, the same residual with the updated estimate.
``neg_eta``
    one-step modelling error ``predict(z1(k), z2(k), U(k)) - z2(k+1)`` of the
    fixed model, exact ``z2`` on both sides.
``z_tilde``
    free-run validation error ``z2hat(k+1) - z2(k+1)`` where ``z2hat`` is
    produced by the model fed its own previous output.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .ident.estimator import RlsEstimator
from .ident.models import BilinearKoopmanModel
from .ident.regressors import bilinear_regressor, linear_regressor
from .observables import LiftedSample, ObservableSet, generate_trajectory, stack_samples
from .robots import ExcitationSpec, RobotSystem, excitation_signal

SERIES = ("eps", "eps_a", "neg_eta", "z_tilde")


@dataclass
class Rollout:
    """Free-run rollout; ``z1``/``z2hat`` include the initial row."""

    z1: np.ndarray
    z2hat: np.ndarray
    diverged: bool = False

    @property
    def steps(self) -> int:
        return self.z1.shape[0] - 1


def rollout_approx_model(model, z1_0, z2hat_0, inputs, system: RobotSystem) -> Rollout:
    """Propagate ``z1`` exactly and ``z2hat`` through ``model`` in free run."""
    z1 = system.check_state(z1_0).copy()
    z2 = np.asarray(z2hat_0, dtype=float).copy()
    inputs = np.asarray(inputs, dtype=float).reshape(-1, system.input_dim)
    if z2.shape != (model.n_lifted,):
        raise ConfigurationError(f"initial lifted state must have length {model.n_lifted}")
    Z1, Z2 = [z1.copy()], [z2.copy()]
    diverged = False
    with np.errstate(over="ignore", invalid="ignore"):
        for U in inputs:
            z2 = model.predict(z1, z2, U)
            z1 = system.A @ z1 + system.B @ U
            if not np.all(np.isfinite(z2)):
                diverged = True
                break
            Z1.append(z1.copy())
            Z2.append(z2.copy())
    return Rollout(np.array(Z1), np.array(Z2), diverged)


@dataclass
class ValidationReport:
    """Error series (rows = steps, columns = lifted observables)."""

    eps: np.ndarray
    eps_a: np.ndarray
    neg_eta: np.ndarray
    z_tilde: np.ndarray
    seeds: np.ndarray = None
    diverged: bool = False
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {getattr(self, s).shape[0] for s in SERIES}
        if len(lengths) != 1:
            raise ConfigurationError("validation series must share one horizon")
        if self.seeds is None:
            self.seeds = np.zeros(self.horizon, dtype=int)

    @property
    def horizon(self) -> int:
        return self.eps.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.eps.shape[1]

    def series(self, name) -> np.ndarray:
        if name not in SERIES:
            raise KeyError(name)
        return getattr(self, name)

    def rmse(self, name="z_tilde") -> np.ndarray:
        """Per-observable root-mean-square over finite rows."""
        s = self.series(name)
        if s.shape[0] == 0:
            return np.zeros(s.shape[1])
        with np.errstate(invalid="ignore", over="ignore"):
            return np.sqrt(np.nanmean(s * s, axis=0))

    def max_abs(self, name="z_tilde") -> np.ndarray:
        s = self.series(name)
        if s.shape[0] == 0:
            return np.zeros(s.shape[1])
        return np.nanmax(np.abs(s), axis=0)

    def norm(self, name="z_tilde") -> float:
        """Root-mean-square over all finite entries."""
        s = self.series(name)
        finite = s[np.isfinite(s)]
        if not finite.size:
            return 0.0
        with np.errstate(over="ignore"):
            return float(np.sqrt(np.mean(finite * finite)))

    def aggregates(self) -> Dict:
        return {name: {"rmse": self.rmse(name).tolist(),
                       "max_abs": self.max_abs(name).tolist(),
                       "rms": self.norm(name)} for name in SERIES}


def combine_reports(reports: Sequence[ValidationReport], metadata=None) -> ValidationReport:
    """Concatenate per-signal reports into one pooled report."""
    reports = list(reports)
    if not reports:
        raise ConfigurationError("no reports to combine")
    return ValidationReport(
        *(np.vstack([r.series(s) for r in reports]) for s in SERIES),
        seeds=np.concatenate([r.seeds for r in reports]),
        diverged=any(r.diverged for r in reports),
        metadata=dict(metadata or {}))


def _regressor_fn(model):
    if isinstance(model, BilinearKoopmanModel):
        return lambda z1, l, U: bilinear_regressor(z1, l, U, model.x0)
    return linear_regressor


def validation_errors(model, samples: Sequence[LiftedSample], rollout: Rollout,
                      estimator: Optional[RlsEstimator] = None, seed: int = 0) -> ValidationReport:
    """Compute the four error series on exact test samples.

    Parameters
    ----------
    model : fixed model used for ``neg_eta`` and (via ``rollout``) ``z_tilde``.
    samples : exact lifted transitions aligned with ``rollout``.
    estimator : optional RlsEstimator
        When given, it is updated along the samples (in place) and provides
        the adaptive ``eps``/``eps_a``; otherwise both equal ``neg_eta``.
    """
    samples = list(samples)
    H = len(samples)
    if rollout.steps > H or (rollout.steps < H and not rollout.diverged):
        raise ConfigurationError(
            f"rollout covers {rollout.steps} steps but {H} samples were given")
    N = model.n_lifted
    if H == 0:
        empty = np.zeros((0, N))
        return ValidationReport(empty, empty.copy(), empty.copy(), empty.copy(),
                                seeds=np.zeros(0, dtype=int))
    Z1, L, U, _, Ln = stack_samples(samples)
    neg_eta = model.predict(Z1, L, U) - Ln
    z_tilde = np.full((H, N), np.nan)
    n_ok = rollout.steps
    z_tilde[:n_ok] = rollout.z2hat[1:n_ok + 1] - Ln[:n_ok]
    if estimator is None:
        eps = neg_eta.copy()
        eps_a = neg_eta.copy()
    else:
        if estimator.theta.shape != model.theta.shape:
            raise ConfigurationError("estimator and model dimensions differ")
        log = estimator.fit(_regressor_fn(model)(Z1, L, U), Ln)
        eps, eps_a = log.eps, log.eps_a
    return ValidationReport(eps, eps_a, neg_eta, z_tilde,
                            seeds=np.full(H, seed, dtype=int), diverged=rollout.diverged)


@dataclass
class ValidationSpec:
    """Test-signal protocol: fresh excitation seeds, one rollout per seed."""

    seeds: Sequence[int] = (101, 102, 103, 104, 105)
    horizon: int = 200
    training_seed: Optional[int] = None
    kind: str = "piecewise-constant-random"
    lower: float = -4.0
    upper: float = 3.0
    hold: int = 5
    initial_state: Optional[np.ndarray] = None
    adaptive: bool = False


def validate(model, system: RobotSystem, observables: ObservableSet, spec: ValidationSpec,
             estimator: Optional[RlsEstimator] = None,
             extra: Optional[ObservableSet] = None) -> ValidationReport:
    """Run the validation protocol over every test seed and pool the results.

    Raises
    ------
    ConfigurationError
        If a test seed equals the training seed.
    """
    seeds = [int(s) for s in spec.seeds]
    if spec.training_seed is not None and int(spec.training_seed) in seeds:
        raise ConfigurationError(
            f"test seed {spec.training_seed} was used for training; validation signals "
            "must differ from the identification signal")
    if spec.adaptive and estimator is None:
        raise ConfigurationError("adaptive validation needs an estimator")
    X0 = (np.zeros(system.state_dim) if spec.initial_state is None
          else system.check_state(spec.initial_state))
    reports = []
    for seed in seeds:
        inputs = excitation_signal(ExcitationSpec(
            system.input_dim, spec.horizon, kind=spec.kind, lower=spec.lower,
            upper=spec.upper, seed=seed, hold=spec.hold, dt=system.dt))
        samples = generate_trajectory(system, observables, X0, inputs, extra)
        z0 = samples[0].z.lifted if samples else np.zeros(model.n_lifted)
        rollout = rollout_approx_model(model, X0, z0, inputs, system)
        est = estimator.copy() if spec.adaptive else None
        reports.append(validation_errors(model, samples, rollout, est, seed=seed))
    if not reports:
        empty = np.zeros((0, model.n_lifted))
        return ValidationReport(empty, empty.copy(), empty.copy(), empty.copy())
    meta = {"seeds": seeds, "horizon": spec.horizon, "adaptive": spec.adaptive,
            "model_kind": model.kind}
    return combine_reports(reports, meta)

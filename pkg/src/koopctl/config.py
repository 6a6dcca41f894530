"""Experiment configuration for the command-line harness.

Every field has a default; :meth:`ExperimentConfig.to_dict` returns the
effective configuration (defaults filled in) which the CLI writes next to
its outputs, so re-running from it reproduces them exactly.
"""

from dataclasses import asdict, dataclass, field, fields, is_dataclass
from typing import List, Optional, Union

import numpy as np

from .errors import ConfigurationError
from .ident.models import regressor_dim
from .ident.regressors import OperatingPoint
from .observables import ObservableSet, linear_observables
from .robots import EXCITATION_KINDS, RobotSystem, random_states
from .utility import N_COMPONENTS, UtilityBank, UtilityParams, default_weights


@dataclass
class ExcitationConfig:
    kind: str = "piecewise-constant-random"
    lower: float = -4.0
    upper: float = 3.0
    hold: int = 5
    n_terms: int = 3
    frequency_range: List[float] = field(default_factory=lambda: [0.05, 1.0])


@dataclass
class EstimatorConfig:
    rho: float = 1.0
    P0_scale: float = 1e4
    p0: float = 1e4
    p1: Optional[float] = 1e-6
    projection: Optional[List[float]] = None  # [lower, upper] applied to every parameter


@dataclass
class IdentificationConfig:
    """Training data: ``episodes`` excited rollouts of ``episode_length`` steps.

    With one episode the rollout starts from the experiment's initial state
    and lasts ``horizon`` steps (the same data ``simulate`` writes); with
    more, each episode starts from a random state around the goals.
    """

    episodes: int = 1
    episode_length: Optional[int] = None
    position_spread: float = 6.0
    velocity_spread: float = 2.0


@dataclass
class ModelConfig:
    kind: str = "linear"
    operating_point: Union[str, List[float]] = "goal"  # "goal", "zero" or an explicit z1


@dataclass
class UtilityConfig:
    kind: str = "default"  # "default" bank or "linear" synthetic bank z2 = C X
    goals: Optional[List[List[float]]] = None
    params: dict = field(default_factory=dict)
    n_observables: Optional[int] = None  # linear bank only
    linear_seed: int = 0


@dataclass
class ControlConfig:
    lower: float = -4.0
    upper: float = 3.0
    steps: int = 300
    mode: str = "adaptive"
    initial_spread: float = 5.0


@dataclass
class ValidationConfig:
    seeds: List[int] = field(default_factory=lambda: [101, 102, 103, 104, 105])
    horizon: int = 200
    adaptive: bool = False


@dataclass
class ExperimentConfig:
    n_robots: int = 5
    dt: float = 0.1
    horizon: int = 100
    seed: int = 0
    initial_state: Optional[List[float]] = None
    excitation: ExcitationConfig = field(default_factory=ExcitationConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    identification: IdentificationConfig = field(default_factory=IdentificationConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    utility: UtilityConfig = field(default_factory=UtilityConfig)
    weights: Optional[List[float]] = None
    control: ControlConfig = field(default_factory=ControlConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)
    out: str = "out"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        cfg = _build(cls, data or {}, "config")
        cfg.check()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    # -- derived objects -------------------------------------------------

    def system(self) -> RobotSystem:
        return RobotSystem(self.n_robots, self.dt)

    def bank(self) -> Optional[UtilityBank]:
        if self.utility.kind != "default":
            return None
        return UtilityBank(self.n_robots, self.utility.goals, UtilityParams(**self.utility.params))

    def linear_bank_matrix(self) -> np.ndarray:
        n_obs = self.utility.n_observables or N_COMPONENTS * self.n_robots
        rng = np.random.default_rng([self.utility.linear_seed, 0x11])
        return rng.normal(size=(n_obs, 4 * self.n_robots)) / np.sqrt(4 * self.n_robots)

    def observables(self) -> ObservableSet:
        if self.utility.kind == "default":
            return self.bank().observables()
        return linear_observables(self.linear_bank_matrix())

    def weight_vector(self) -> np.ndarray:
        n_obs = len(self.observables())
        if self.weights is None:
            return default_weights(self.n_robots) if self.utility.kind == "default" else np.ones(n_obs)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (n_obs,):
            raise ConfigurationError(f"weights must have length {n_obs}, got {w.size}")
        return w

    def goal_positions(self) -> np.ndarray:
        bank = self.bank()
        if bank is not None:
            return bank.goals.ravel()
        return np.zeros(2 * self.n_robots)

    def initial_X(self) -> np.ndarray:
        system = self.system()
        if self.initial_state is not None:
            return system.check_state(self.initial_state)
        rng = np.random.default_rng([self.seed, 0x7])
        return random_states(system, rng, 1, center=self.goal_positions(),
                             position_spread=self.control.initial_spread, velocity_spread=0.0)[0]

    def operating_point(self, observables: ObservableSet) -> OperatingPoint:
        system = self.system()
        op = self.model.operating_point
        if op == "goal":
            z10 = np.concatenate([self.goal_positions(), np.zeros(2 * self.n_robots)])
        elif op == "zero":
            z10 = np.zeros(system.state_dim)
        else:
            z10 = system.check_state(op)
        return OperatingPoint(z10, observables.evaluate(z10))

    def regressor_dim(self) -> int:
        return regressor_dim(self.model.kind, 4 * self.n_robots, len(self.observables()),
                             2 * self.n_robots)

    def check(self):
        if int(self.n_robots) != self.n_robots or self.n_robots < 1:
            raise ConfigurationError("n_robots must be a positive integer")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if self.horizon < 0:
            raise ConfigurationError("horizon must be non-negative")
        if self.excitation.kind not in EXCITATION_KINDS:
            raise ConfigurationError(f"unknown excitation kind {self.excitation.kind!r}")
        if self.excitation.lower >= self.excitation.upper:
            raise ConfigurationError("excitation bounds need lower < upper")
        if self.control.lower >= self.control.upper:
            raise ConfigurationError("control bounds need lower < upper")
        if self.model.kind not in ("linear", "bilinear"):
            raise ConfigurationError(f"unknown model kind {self.model.kind!r}")
        if self.utility.kind not in ("default", "linear"):
            raise ConfigurationError(f"unknown utility kind {self.utility.kind!r}")
        if self.control.mode not in ("adaptive", "fixed-model"):
            raise ConfigurationError(f"unknown control mode {self.control.mode!r}")
        if self.identification.episodes < 1:
            raise ConfigurationError("identification needs at least one episode")
        if self.training_seed() in [int(s) for s in self.validation.seeds]:
            raise ConfigurationError("validation seeds must differ from the training seed")
        if self.initial_state is not None:
            self.system().check_state(self.initial_state)
        # builds every derived object once so errors surface before any run
        self.weight_vector()
        self.operating_point(self.observables())

    def training_seed(self) -> int:
        return int(self.seed)


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigurationError(f"{where} must be a JSON object")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    kwargs = {}
    defaults = cls()
    for name, value in data.items():
        default = getattr(defaults, name)
        if is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{where}.{name}")
        else:
            kwargs[name] = value
    return cls(**kwargs)

"""Discrete-time double-integrator robots and excitation signals.

The physical state of ``n`` planar robots is stacked positions first, then
velocities::

    X = [x_1, y_1, ..., x_n, y_n, vx_1, vy_1, ..., vx_n, vy_n]

and the input is the matching acceleration vector
``U = [ax_1, ay_1, ..., ax_n, ay_n]``.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import ConfigurationError

EXCITATION_KINDS = ("sinusoid-sum", "pseudo-random-binary", "piecewise-constant-random")


def build_system_matrices(n_robots: int, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(A, B)`` for ``n_robots`` planar double integrators.

    ``A = [[I, dt I], [0, I]]`` and ``B = [[dt^2/2 I], [dt I]]`` over the
    (positions, velocities) partition.
    """
    if int(n_robots) != n_robots or n_robots < 1:
        raise ConfigurationError(f"robot count must be a positive integer, got {n_robots!r}")
    if not np.isfinite(dt) or dt <= 0:
        raise ConfigurationError(f"sampling interval must be positive, got {dt!r}")
    q = 2 * int(n_robots)
    eye = np.eye(q)
    A = np.block([[eye, dt * eye], [np.zeros((q, q)), eye]])
    B = np.vstack([0.5 * dt**2 * eye, dt * eye])
    return A, B


@dataclass(frozen=True)
class RobotSystem:
    """Planar multi-robot double integrator ``X(k+1) = A X(k) + B U(k)``."""

    n_robots: int
    dt: float = 0.1
    A: np.ndarray = field(init=False, repr=False, compare=False)
    B: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        A, B = build_system_matrices(self.n_robots, self.dt)
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def state_dim(self) -> int:
        return 4 * self.n_robots

    @property
    def input_dim(self) -> int:
        return 2 * self.n_robots

    def positions(self, X) -> np.ndarray:
        """Robot positions as an ``(n_robots, 2)`` array."""
        X = np.asarray(X, dtype=float)
        return X[: 2 * self.n_robots].reshape(self.n_robots, 2)

    def velocities(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return X[2 * self.n_robots:].reshape(self.n_robots, 2)

    def pack_state(self, positions, velocities=None) -> np.ndarray:
        """Build ``X`` from ``(n_robots, 2)`` positions and velocities."""
        positions = np.asarray(positions, dtype=float).reshape(-1)
        if velocities is None:
            velocities = np.zeros_like(positions)
        velocities = np.asarray(velocities, dtype=float).reshape(-1)
        if positions.size != 2 * self.n_robots or velocities.size != 2 * self.n_robots:
            raise ConfigurationError(
                f"expected {self.n_robots} planar positions and velocities")
        return np.concatenate([positions, velocities])

    def check_state(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape != (self.state_dim,):
            raise ConfigurationError(
                f"state must have shape ({self.state_dim},), got {X.shape}")
        return X

    def check_input(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        if U.shape != (self.input_dim,):
            raise ConfigurationError(
                f"input must have shape ({self.input_dim},), got {U.shape}")
        return U

    def step(self, X, U) -> np.ndarray:
        return step(self, X, U)


def step(system: RobotSystem, X, U) -> np.ndarray:
    """Advance the robots one sampling interval: ``A X + B U``."""
    X = system.check_state(X)
    U = system.check_input(U)
    return system.A @ X + system.B @ U


def random_states(system: RobotSystem, rng: np.random.Generator, count: int,
                  center=None, position_spread: float = 5.0,
                  velocity_spread: float = 1.0) -> np.ndarray:
    """Draw ``count`` states uniformly around ``center`` positions.

    Positions are ``center + U(-position_spread, position_spread)`` per axis
    and velocities ``U(-velocity_spread, velocity_spread)``.
    """
    q = 2 * system.n_robots
    if center is None:
        center = np.zeros(q)
    center = np.asarray(center, dtype=float).reshape(-1)
    if center.size != q:
        raise ConfigurationError(f"center must hold {system.n_robots} planar positions")
    pos = center + rng.uniform(-position_spread, position_spread, size=(count, q))
    vel = rng.uniform(-velocity_spread, velocity_spread, size=(count, q))
    return np.hstack([pos, vel])


Bound = Union[float, Sequence[float]]


@dataclass(frozen=True)
class ExcitationSpec:
    """Deterministic, seeded excitation signal clipped to a control box.

    Attributes
    ----------
    kind : str
        ``"piecewise-constant-random"`` (uniform level held for ``hold``
        steps), ``"pseudo-random-binary"`` (each channel jumps between its
        bounds every ``hold`` steps) or ``"sinusoid-sum"`` (``n_terms``
        zero-mean sinusoids per channel with random frequency and phase).
    n_channels : int
        Input dimension.
    lower, upper : float or sequence of float
        Per-channel amplitude bounds (m/s^2).
    seed : int
    horizon : int
        Number of steps for which the signal is defined.
    hold : int
        Hold length in steps for the piecewise kinds.
    amplitudes : sequence of float, optional
        Sinusoid amplitudes; by default they share ``min(upper, -lower)``
        equally when the box contains zero.
    frequency_range : (float, float)
        Sinusoid frequencies are drawn uniformly from this range (Hz).
    dt : float
        Sampling interval used to turn step indices into time.
    """

    n_channels: int
    horizon: int
    kind: str = "piecewise-constant-random"
    lower: Bound = -4.0
    upper: Bound = 3.0
    seed: int = 0
    hold: int = 5
    n_terms: int = 3
    amplitudes: Tuple[float, ...] = None
    frequency_range: Tuple[float, float] = (0.05, 1.0)
    dt: float = 0.1

    def __post_init__(self):
        if self.kind not in EXCITATION_KINDS:
            raise ConfigurationError(
                f"unknown excitation kind {self.kind!r}; expected one of {EXCITATION_KINDS}")
        if self.n_channels < 1 or self.horizon < 0 or self.hold < 1:
            raise ConfigurationError("excitation needs n_channels >= 1, horizon >= 0, hold >= 1")
        lo, hi = self.bounds()
        if np.any(lo >= hi):
            raise ConfigurationError("excitation lower bound must be below upper bound")
        if self.amplitudes is not None:
            object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "frequency_range", tuple(float(f) for f in self.frequency_range))

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.n_channels,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.n_channels,)).copy()
        return lo, hi


def _hashable(spec: ExcitationSpec):
    return (spec.kind, spec.n_channels, spec.horizon, str(spec.lower), str(spec.upper),
            spec.seed, spec.hold, spec.n_terms, spec.amplitudes, spec.frequency_range, spec.dt)


@lru_cache(maxsize=64)
def _sinusoid_params(key):
    kind, n_channels, _, _, _, seed, _, n_terms, _, frange, _ = key
    rng = np.random.default_rng([seed, 0x51])
    freqs = rng.uniform(frange[0], frange[1], size=(n_channels, n_terms))
    phases = rng.uniform(0.0, 2 * np.pi, size=(n_channels, n_terms))
    return freqs, phases


def excitation(spec: ExcitationSpec, k: int) -> np.ndarray:
    """Excitation vector at step ``k``; a pure function of ``(spec, k)``."""
    if not 0 <= k < spec.horizon:
        raise IndexError(f"step {k} outside excitation horizon [0, {spec.horizon})")
    lo, hi = spec.bounds()
    if spec.kind == "sinusoid-sum":
        freqs, phases = _sinusoid_params(_hashable(spec))
        if spec.amplitudes is None:
            reach = np.minimum(hi, -lo)
            amp = np.where(reach > 0, reach, 0.5 * (hi - lo)) / spec.n_terms
            amp = np.repeat(amp[:, None], spec.n_terms, axis=1)
            offset = np.where(reach > 0, 0.0, 0.5 * (hi + lo))
        else:
            if len(spec.amplitudes) != spec.n_terms:
                raise ConfigurationError("need one amplitude per sinusoid term")
            amp = np.broadcast_to(np.asarray(spec.amplitudes), (spec.n_channels, spec.n_terms))
            offset = 0.0
        t = k * spec.dt
        u = offset + np.sum(amp * np.sin(2 * np.pi * freqs * t + phases), axis=1)
    else:
        segment = k // spec.hold
        rng = np.random.default_rng([spec.seed, segment])
        if spec.kind == "piecewise-constant-random":
            u = rng.uniform(lo, hi)
        else:
            u = np.where(rng.random(spec.n_channels) < 0.5, lo, hi)
    return np.clip(u, lo, hi)


def excitation_signal(spec: ExcitationSpec) -> np.ndarray:
    """Whole excitation signal as a ``(horizon, n_channels)`` array."""
    if spec.horizon == 0:
        return np.zeros((0, spec.n_channels))
    return np.vstack([excitation(spec, k) for k in range(spec.horizon)])

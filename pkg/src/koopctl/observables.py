"""Observables, lifted Koopman states and exact lifted trajectories."""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, EvaluationError
from .robots import RobotSystem

ScalarObservable = Callable[[np.ndarray], float]


class ObservableSet:
    """Ordered bank of named scalar observables of the physical state.

    The order of ``entries`` defines the coordinates of the lifted block, so
    it is persisted (via :attr:`names` and :attr:`identifier`) alongside any
    identified model.

    Parameters
    ----------
    entries : sequence of (name, callable)
        Scalar functions of the physical state.
    identifier : str, optional
        Stable name of the bank, stored in model files.
    evaluate_all : callable, optional
        Vectorised evaluator returning all entries at once. When given it must
        agree with the per-entry functions; :func:`lift` uses it for speed.
    """

    def __init__(self, entries: Sequence[Tuple[str, ScalarObservable]],
                 identifier: str = "custom",
                 evaluate_all: Optional[Callable[[np.ndarray], np.ndarray]] = None):
        entries = list(entries)
        names = [name for name, _ in entries]
        if len(set(names)) != len(names):
            raise ConfigurationError("observable names must be unique")
        self._entries = entries
        self.identifier = identifier
        self._evaluate_all = evaluate_all

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self._entries]

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def evaluate(self, X) -> np.ndarray:
        """Evaluate every observable at ``X``.

        Raises
        ------
        EvaluationError
            If any value is non-finite; ``index`` names the first offender.
        """
        X = np.asarray(X, dtype=float)
        if self._evaluate_all is not None:
            values = np.asarray(self._evaluate_all(X), dtype=float).reshape(-1)
            if values.size != len(self):
                raise ConfigurationError(
                    f"vectorised evaluator returned {values.size} values for {len(self)} observables")
        else:
            values = np.array([float(fn(X)) for _, fn in self._entries])
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            i = int(bad[0])
            raise EvaluationError(
                f"observable {i} ({self._entries[i][0]!r}) is not finite: {values[i]}", index=i)
        return values

    def evaluate_each(self, X) -> np.ndarray:
        """Evaluate through the per-entry functions only (reference path)."""
        return ObservableSet(self._entries, self.identifier).evaluate(X)


def linear_observables(C, prefix: str = "lin") -> ObservableSet:
    """Observables ``z2 = C X``; an exactly linear Koopman bank."""
    C = np.array(C, dtype=float)
    C.setflags(write=False)
    entries = [(f"{prefix}{i + 1}", (lambda X, row=row: float(row @ X))) for i, row in enumerate(C)]
    return ObservableSet(entries, identifier=f"linear:{C.shape[0]}x{C.shape[1]}",
                         evaluate_all=lambda X: C @ X)


def identity_observables(n: int) -> ObservableSet:
    """Coordinate projections ``z2_i = X_i``."""
    return linear_observables(np.eye(n), prefix="x")


@dataclass(frozen=True)
class KoopmanState:
    """Lifted state ``z = [z1; z2; z3]`` with ``z1`` the physical state."""

    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray = None

    def __post_init__(self):
        if self.z3 is None:
            object.__setattr__(self, "z3", np.zeros(0))

    @property
    def lifted(self) -> np.ndarray:
        """The approximated block ``[z2; z3]``."""
        if self.z3.size == 0:
            return self.z2
        return np.concatenate([self.z2, self.z3])

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.z1, self.z2, self.z3])

    def __len__(self):
        return self.z1.size + self.z2.size + self.z3.size


@dataclass(frozen=True)
class LiftedSample:
    """One exact transition ``(z(k), U(k), z(k+1))``."""

    z: KoopmanState
    u: np.ndarray
    z_next: KoopmanState


def lift(X, obs: ObservableSet, extra: Optional[ObservableSet] = None) -> KoopmanState:
    """Lift a physical state through ``obs`` (and the optional ``extra`` bank)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 1 or not np.all(np.isfinite(X)):
        raise ConfigurationError("state must be a finite 1-D vector")
    if len(obs) == 0:
        raise ConfigurationError("observable set is empty")
    z1 = X.copy()
    z2 = obs.evaluate(X)
    z3 = extra.evaluate(X) if extra is not None and len(extra) else np.zeros(0)
    return KoopmanState(z1, z2, z3)


def generate_trajectory(system: RobotSystem, obs: ObservableSet, X0, inputs,
                        extra: Optional[ObservableSet] = None) -> List[LiftedSample]:
    """Roll the exact robot dynamics forward and lift every visited state.

    Each state is lifted once, so sample ``k``'s ``z_next`` is the very
    object held as sample ``k+1``'s ``z``.
    """
    X = np.asarray(X0, dtype=float)
    if X.shape != (system.state_dim,):
        raise ConfigurationError(
            f"initial state has shape {X.shape}, system expects ({system.state_dim},)")
    inputs = np.asarray(inputs, dtype=float)
    if inputs.size == 0:
        return []
    if inputs.ndim != 2 or inputs.shape[1] != system.input_dim:
        raise ConfigurationError(
            f"inputs must have shape (steps, {system.input_dim}), got {inputs.shape}")
    if not np.all(np.isfinite(inputs)):
        raise ConfigurationError("inputs must be finite")
    samples = []
    z = lift(X, obs, extra)
    for U in inputs:
        X = system.A @ X + system.B @ U
        z_next = lift(X, obs, extra)
        samples.append(LiftedSample(z, U.copy(), z_next))
        z = z_next
    return samples


def stack_samples(samples: Sequence[LiftedSample]):
    """Stack samples into arrays ``(Z1, L, U, Z1_next, L_next)``.

    ``L`` holds the lifted block ``[z2; z3]``.
    """
    if not samples:
        raise ConfigurationError("no samples to stack")
    Z1 = np.array([s.z.z1 for s in samples])
    L = np.array([s.z.lifted for s in samples])
    U = np.array([s.u for s in samples])
    Z1n = np.array([s.z_next.z1 for s in samples])
    Ln = np.array([s.z_next.lifted for s in samples])
    return Z1, L, U, Z1n, Ln

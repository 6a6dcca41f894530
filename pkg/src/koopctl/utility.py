"""Per-robot utility components and the weighted total utility.

Every robot carries six smooth components, evaluated from its goal error
``e = g - r`` and velocity ``v``:

1. ``goal``: ``-|e|^2 / L^2`` (zero, its maximum, at the goal)
2. ``velocity``: ``-|v - kappa e|^2 / V^2``, distance to a goal-seeking
   reference velocity
3. ``collision``: ``-sum_j s^2 / (|r_i - r_j|^2 + s^2)`` over the other
   robots; dominated by the nearest neighbour
4. ``speed``: ``-(sqrt(|v|^2 + eps^2) - eps) / S``
5. ``alignment``: ``v.e / (sqrt(|v|^2 + eps^2) sqrt(|e|^2 + eps^2))``
6. ``bias``: the constant 1

Flattening is robot-major, so component ``(i, j)`` (0-based) lands at
position ``6 i + j`` of the lifted block.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, EvaluationError
from .observables import ObservableSet

COMPONENTS = ("goal", "velocity", "collision", "speed", "alignment", "bias")
N_COMPONENTS = len(COMPONENTS)


@dataclass(frozen=True)
class UtilityParams:
    """Shape parameters of the default component family.

    Attributes
    ----------
    length_scale : float
        ``L``, goal-distance normalisation (m).
    speed_scale : float
        ``V``, velocity-error normalisation (m/s).
    approach_gain : float
        ``kappa``, reference approach speed per metre of goal error (1/s).
    collision_radius : float
        ``s``, distance at which the pairwise penalty halves (m).
    speed_penalty_scale : float
        ``S``, speed-magnitude normalisation (m/s).
    smoothing : float
        ``eps`` in the smoothed norms of components 4 and 5.
    """

    length_scale: float = 5.0
    speed_scale: float = 2.0
    approach_gain: float = 0.5
    collision_radius: float = 0.5
    speed_penalty_scale: float = 10.0
    smoothing: float = 0.5

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (np.isfinite(value) and value > 0):
                raise ConfigurationError(f"utility parameter {name} must be positive, got {value}")


def default_goals(n_robots: int, radius: float = 3.0) -> np.ndarray:
    """Goals evenly spaced on a circle around the origin, ``(n_robots, 2)``."""
    angles = 2 * np.pi * np.arange(n_robots) / n_robots
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


@dataclass(frozen=True)
class UtilityBank:
    """Default six-component utility bank for ``n_robots`` robots."""

    n_robots: int
    goals: np.ndarray = None
    params: UtilityParams = field(default_factory=UtilityParams)

    def __post_init__(self):
        goals = default_goals(self.n_robots) if self.goals is None else self.goals
        goals = np.array(goals, dtype=float).reshape(-1, 2)
        if goals.shape[0] != self.n_robots or not np.all(np.isfinite(goals)):
            raise ConfigurationError(f"need {self.n_robots} finite planar goals")
        goals.setflags(write=False)
        object.__setattr__(self, "goals", goals)

    @property
    def size(self) -> int:
        return self.n_robots * N_COMPONENTS

    @property
    def identifier(self) -> str:
        p = self.params
        goals = ",".join(repr(float(g)) for g in self.goals.ravel())
        return (f"utility-default:n={self.n_robots};goals={goals};L={p.length_scale!r};"
                f"V={p.speed_scale!r};kappa={p.approach_gain!r};s={p.collision_radius!r};"
                f"S={p.speed_penalty_scale!r};eps={p.smoothing!r}")

    def goal_state(self) -> np.ndarray:
        """Physical state with every robot at rest on its goal."""
        return np.concatenate([self.goals.ravel(), np.zeros(2 * self.n_robots)])

    def goal_distances(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        r = X[: 2 * self.n_robots].reshape(-1, 2)
        return np.linalg.norm(self.goals - r, axis=1)

    def grid(self, X) -> np.ndarray:
        """All components as an ``(n_robots, 6)`` array (vectorised path)."""
        X = np.asarray(X, dtype=float)
        n = self.n_robots
        if X.shape != (4 * n,):
            raise ConfigurationError(f"state must have shape ({4 * n},), got {X.shape}")
        p = self.params
        r = X[: 2 * n].reshape(n, 2)
        v = X[2 * n:].reshape(n, 2)
        e = self.goals - r
        e2 = np.sum(e * e, axis=1)
        v2 = np.sum(v * v, axis=1)
        dv = v - p.approach_gain * e
        diff = r[:, None, :] - r[None, :, :]
        d2 = np.sum(diff * diff, axis=2)
        s2 = p.collision_radius**2
        pair = s2 / (d2 + s2)
        np.fill_diagonal(pair, 0.0)
        vs = np.sqrt(v2 + p.smoothing**2)
        es = np.sqrt(e2 + p.smoothing**2)
        out = np.empty((n, N_COMPONENTS))
        out[:, 0] = -e2 / p.length_scale**2
        out[:, 1] = -np.sum(dv * dv, axis=1) / p.speed_scale**2
        out[:, 2] = -np.sum(pair, axis=1)
        out[:, 3] = -(vs - p.smoothing) / p.speed_penalty_scale
        out[:, 4] = np.sum(v * e, axis=1) / (vs * es)
        out[:, 5] = 1.0
        return out

    def component(self, X, i: int, j: int) -> float:
        """Component ``j`` of robot ``i`` evaluated with scalar arithmetic."""
        n, p = self.n_robots, self.params
        ex = self.goals[i, 0] - X[2 * i]
        ey = self.goals[i, 1] - X[2 * i + 1]
        vx = X[2 * n + 2 * i]
        vy = X[2 * n + 2 * i + 1]
        name = COMPONENTS[j]
        if name == "goal":
            return -(ex * ex + ey * ey) / p.length_scale**2
        if name == "velocity":
            dx = vx - p.approach_gain * ex
            dy = vy - p.approach_gain * ey
            return -(dx * dx + dy * dy) / p.speed_scale**2
        if name == "collision":
            s2 = p.collision_radius**2
            total = 0.0
            for l in range(n):
                if l != i:
                    dx = X[2 * i] - X[2 * l]
                    dy = X[2 * i + 1] - X[2 * l + 1]
                    total += s2 / (dx * dx + dy * dy + s2)
            return -total
        vs = math.sqrt(vx * vx + vy * vy + p.smoothing**2)
        if name == "speed":
            return -(vs - p.smoothing) / p.speed_penalty_scale
        if name == "alignment":
            es = math.sqrt(ex * ex + ey * ey + p.smoothing**2)
            return (vx * ex + vy * ey) / (vs * es)
        return 1.0

    def observables(self) -> ObservableSet:
        """The bank as an :class:`ObservableSet` in flattening order."""
        entries = []
        for i in range(self.n_robots):
            for j, name in enumerate(COMPONENTS):
                entries.append((f"robot{i + 1}.{name}",
                                (lambda X, i=i, j=j: self.component(np.asarray(X, dtype=float), i, j))))
        return ObservableSet(entries, identifier=self.identifier,
                             evaluate_all=lambda X: self.grid(X).ravel())

    def to_dict(self) -> dict:
        return {"kind": "default", "n_robots": self.n_robots,
                "goals": self.goals.tolist(), "params": asdict(self.params)}


def eval_components(bank: UtilityBank, X) -> np.ndarray:
    """Flattened component vector ``phi_i^(j)(X)`` (robot-major)."""
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise ConfigurationError("state must be finite")
    grid = bank.grid(X)
    bad = np.argwhere(~np.isfinite(grid))
    if bad.size:
        i, j = (int(t) for t in bad[0])
        raise EvaluationError(f"utility component ({i}, {j}) is not finite", index=(i, j))
    return grid.ravel()


def default_weights(n_robots: int) -> np.ndarray:
    return np.ones(n_robots * N_COMPONENTS)


def total_utility(weights, z2) -> float:
    """``w^T z2``."""
    weights = np.asarray(weights, dtype=float).reshape(-1)
    z2 = np.asarray(z2, dtype=float).reshape(-1)
    if weights.size != z2.size:
        raise ConfigurationError(f"weights have length {weights.size}, z2 has {z2.size}")
    return float(weights @ z2)


def robot_utilities(weights, z2, n_components: int = N_COMPONENTS) -> np.ndarray:
    """Per-robot utilities ``u_i = w_i^T z2_i``."""
    weights = np.asarray(weights, dtype=float).reshape(-1, n_components)
    z2 = np.asarray(z2, dtype=float).reshape(-1, n_components)
    return np.sum(weights * z2, axis=1)


def bank_from_dict(data: Optional[dict], n_robots: int) -> UtilityBank:
    data = dict(data or {})
    params = UtilityParams(**data.get("params", {}))
    return UtilityBank(n_robots, data.get("goals"), params)

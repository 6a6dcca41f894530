"""One-step optimal control by linear programming over the input box.

Both model kinds predict a lifted block that is affine in ``U`` at a fixed
state, so ``w^T z2(k+1) = offset + c^T U`` and maximising it over
``lower <= U <= upper`` separates per channel: each input sits at the bound
favoured by the sign of its coefficient. A zero coefficient selects ``0``
when it is feasible (otherwise the bound nearest to zero).
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ConfigurationError, EvaluationError
from .ident.models import BilinearKoopmanModel, LinearKoopmanModel
from .ident.regressors import bilinear_regressor, linear_regressor
from .observables import ObservableSet, lift
from .robots import RobotSystem

DEFAULT_LOWER = -4.0
DEFAULT_UPPER = 3.0


@dataclass
class EffectiveAffineForm:
    """Predicted utility ``offset + c^T U`` at a fixed lifted state."""

    c: np.ndarray
    offset: float


@dataclass
class ControlProblem:
    weights: np.ndarray
    model: object
    lower: np.ndarray = DEFAULT_LOWER
    upper: np.ndarray = DEFAULT_UPPER

    def __post_init__(self):
        m = self.model.m
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (m,)).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (m,)).copy()
        if np.any(self.lower >= self.upper):
            raise ConfigurationError("control bounds need lower < upper on every channel")
        self.weights = padded_weights(self.weights, self.model.n_lifted)


def padded_weights(weights, n_lifted) -> np.ndarray:
    """Extend utility weights with zeros over extra (z3) observables."""
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.size > n_lifted:
        raise ConfigurationError(
            f"{weights.size} utility weights for a model with {n_lifted} lifted outputs")
    if not np.all(np.isfinite(weights)):
        raise ConfigurationError("utility weights must be finite")
    return np.concatenate([weights, np.zeros(n_lifted - weights.size)])


def effective_gain(model, z1, z2) -> np.ndarray:
    """Input matrix of the prediction at ``(z1, z2)``, shape ``(N2, m)``.

    Linear models return ``B2``; bilinear models add the state-dependent
    terms ``G4[i] = d1^T H13_i`` and ``G5[i] = d2^T H23_i``.
    """
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if z1.shape != (model.n1,) or z2.shape != (model.n_lifted,):
        raise ConfigurationError(
            f"model expects z1[{model.n1}] and z2[{model.n_lifted}], got {z1.shape}, {z2.shape}")
    if isinstance(model, LinearKoopmanModel):
        return model.B2.copy()
    if isinstance(model, BilinearKoopmanModel):
        d1 = z1 - model.x0.z1
        d2 = z2 - model.x0.lifted
        n1, n2, m = model.n1, model.n_lifted, model.m
        phi4 = model.phi(4).reshape(n1, m, n2)
        phi5 = model.phi(5).reshape(n2, m, n2)
        G4 = np.einsum("a,abi->ib", d1, phi4)
        G5 = np.einsum("a,abi->ib", d2, phi5)
        return model.B2 + G4 + G5
    raise ConfigurationError(f"unsupported model type {type(model).__name__}")


def affine_form(model, weights, z1, z2) -> EffectiveAffineForm:
    weights = padded_weights(weights, model.n_lifted)
    c = effective_gain(model, z1, z2).T @ weights
    offset = float(weights @ model.predict(z1, z2, np.zeros(model.m)))
    return EffectiveAffineForm(c, offset)


def solve_box_lp(c, lower=DEFAULT_LOWER, upper=DEFAULT_UPPER) -> np.ndarray:
    """Maximise ``c^T U`` subject to ``lower <= U <= upper``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    if not np.all(np.isfinite(c)):
        raise ValueError("LP objective must be finite")
    lower = np.broadcast_to(np.asarray(lower, dtype=float), c.shape)
    upper = np.broadcast_to(np.asarray(upper, dtype=float), c.shape)
    if np.any(lower >= upper):
        raise ConfigurationError("LP bounds need lower < upper")
    tie = np.clip(0.0, lower, upper)
    return np.where(c > 0, upper, np.where(c < 0, lower, tie))


def box_lp_value(c, lower=DEFAULT_LOWER, upper=DEFAULT_UPPER) -> float:
    """Optimal value ``sum max(c_i lower_i, c_i upper_i)``."""
    c = np.asarray(c, dtype=float)
    return float(np.sum(np.maximum(c * lower, c * upper)))


def optimal_control(problem: ControlProblem, z1, z2):
    """Return ``(U*, predicted utility)`` for the current lifted state."""
    form = affine_form(problem.model, problem.weights, z1, z2)
    U = solve_box_lp(form.c, problem.lower, problem.upper)
    value = float(problem.weights @ problem.model.predict(z1, z2, U))
    return U, value


@dataclass
class ClosedLoopRecord:
    """Per-step trace of a closed-loop run.

    ``X`` has one more row than the control arrays (it includes the final
    state); ``eps`` holds the a-priori prediction error of the transition
    made at each step. ``eps_a`` and ``m2`` come from the online update and
    are empty in fixed-model runs.
    """

    X: np.ndarray
    z2: np.ndarray
    U: np.ndarray
    utility_realized: np.ndarray
    utility_predicted: np.ndarray
    eps: np.ndarray
    eps_a: np.ndarray = None
    m2: np.ndarray = None
    resets: List[int] = field(default_factory=list)
    aborted: bool = False
    diagnostic: str = ""

    @property
    def steps(self) -> int:
        return self.U.shape[0]

    @property
    def eps_norm(self) -> np.ndarray:
        return np.linalg.norm(self.eps, axis=1) if self.eps.size else np.zeros(self.steps)


def closed_loop_run(system: RobotSystem, observables: ObservableSet, weights, controller, X0,
                    steps: int, mode: str = "adaptive", lower=DEFAULT_LOWER, upper=DEFAULT_UPPER,
                    model_template=None, extra: Optional[ObservableSet] = None) -> ClosedLoopRecord:
    """Drive the true robots with the one-step LP controller.

    Parameters
    ----------
    controller : model or RlsEstimator
        A fixed Koopman model (``mode="fixed-model"``) or an estimator
        updated online from each realised transition (``mode="adaptive"``).
    model_template : model, optional
        In adaptive mode, a model whose kind, dimensions and operating point
        interpret the estimator's parameters.
    """
    if mode not in ("adaptive", "fixed-model"):
        raise ConfigurationError(f"unknown closed-loop mode {mode!r}")
    if mode == "adaptive":
        if model_template is None:
            raise ConfigurationError("adaptive mode needs a model template")
        estimator = controller
        template = model_template
        if estimator.theta.shape != template.theta.shape:
            raise ConfigurationError("estimator and model template dimensions differ")
    else:
        estimator = None
        template = controller
    if isinstance(template, BilinearKoopmanModel):
        x0 = template.x0

        def regress(z1, l, U):
            return bilinear_regressor(z1, l, U, x0)
    else:
        regress = linear_regressor

    X = system.check_state(X0).copy()
    m = system.input_dim
    w = padded_weights(weights, template.n_lifted)
    n_w = np.asarray(weights).size
    X_log = [X.copy()]
    z2_log, U_log, real, pred, eps_log = [], [], [], [], []
    eps_a_log, m2_log = [], []
    resets, aborted, diagnostic = [], False, ""
    z = lift(X, observables, extra)
    z2_log.append(z.z2.copy())
    model = template if estimator is None else template.with_theta(estimator.theta)
    for k in range(steps):
        problem = ControlProblem(w, model, lower, upper)
        U, value = optimal_control(problem, z.z1, z.lifted)
        predicted_next = model.predict(z.z1, z.lifted, U)
        X = system.A @ X + system.B @ U
        try:
            z_next = lift(X, observables, extra)
        except EvaluationError as exc:
            aborted, diagnostic = True, f"step {k}: {exc}"
            break
        U_log.append(U)
        X_log.append(X.copy())
        z2_log.append(z_next.z2.copy())
        real.append(float(w[:n_w] @ z_next.z2[:n_w]))
        pred.append(value)
        eps_log.append(predicted_next - z_next.lifted)
        if estimator is not None:
            result = estimator.update(regress(z.z1, z.lifted, U), z_next.lifted)
            eps_a_log.append(result.eps_a)
            m2_log.append(result.m2)
            if result.reset:
                resets.append(k)
            if not np.all(np.isfinite(estimator.theta)):
                aborted, diagnostic = True, f"step {k}: parameter estimate diverged"
                break
            model = template.with_theta(estimator.theta)
        z = z_next
    n = len(U_log)
    return ClosedLoopRecord(
        X=np.array(X_log),
        z2=np.array(z2_log),
        U=np.array(U_log).reshape(n, m),
        utility_realized=np.array(real),
        utility_predicted=np.array(pred),
        eps=np.array(eps_log).reshape(n, template.n_lifted),
        eps_a=np.array(eps_a_log).reshape(len(eps_a_log), template.n_lifted),
        m2=np.array(m2_log),
        resets=resets, aborted=aborted, diagnostic=diagnostic)

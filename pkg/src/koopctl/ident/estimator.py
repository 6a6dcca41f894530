"""Recursive least-squares identifier with gain resetting and projection.

For each regressor sample ``(zeta, y)``::

    eps   = theta^T zeta - y
    m2    = rho + zeta^T P zeta
    theta = theta - P zeta eps^T / m2
    P     = P - P zeta zeta^T P / m2
    eps_a = theta^T zeta - y            (with the updated theta)

after which ``P`` is reset to ``p0 I`` whenever ``lambda_min(P) <= p1`` and
the entries of ``theta`` are clipped into their projection intervals.

Without resets or projection ``theta`` after ``k`` samples is the exact
minimiser of ``sum |theta^T zeta - y|^2 / (2 rho) + tr((theta - theta0)^T
P0^-1 (theta - theta0)) / 2``.

The minimum eigenvalue is only computed when it can possibly have dropped to
``p1``: ``P^-1`` grows by ``zeta zeta^T / rho`` per step, so
``lambda_max(P^-1)`` is bounded by its last known value plus the running sum
of ``|zeta|^2 / rho``. While that bound stays below ``1 / p1`` no reset can
be due and the eigenvalue problem is skipped.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg

from .. import kernels
from ..errors import ConfigurationError, RejectedSampleError

# Relative slack on the screening bound, covering rounding in P.
_SCREEN_SLACK = 1e-8


@dataclass
class StepResult:
    eps: np.ndarray
    eps_a: np.ndarray
    m2: float
    reset: bool = False

    @property
    def m(self) -> float:
        return float(np.sqrt(self.m2))


@dataclass
class EstimationLog:
    """Per-sample record of a :meth:`RlsEstimator.fit` sweep."""

    eps: np.ndarray
    eps_a: np.ndarray
    m2: np.ndarray
    reset: np.ndarray
    rejected: np.ndarray
    step0: int = 0

    @property
    def reset_steps(self) -> List[int]:
        return [self.step0 + int(k) for k in np.flatnonzero(self.reset)]

    def __len__(self):
        return self.m2.size


def _min_eig(P) -> float:
    Ps = 0.5 * (P + P.T)
    return float(scipy.linalg.eigh(Ps, eigvals_only=True, subset_by_index=[0, 0],
                                   check_finite=False)[0])


class RlsEstimator:
    """Sequential least-squares estimator of ``y = theta^T zeta``.

    Parameters
    ----------
    d, n_out : int
        Regressor length and output dimension; ``theta`` is ``(d, n_out)``.
    rho : float
        Normalisation constant, ``rho > 0``.
    P0 : float or ndarray
        Initial gain matrix (a scalar means ``P0 * I``).
    p0, p1 : float
        Reset magnitude and threshold. ``p1=None`` disables resetting.
    theta0 : ndarray, optional
        Initial estimate (zeros by default).
    projection : (lower, upper), optional
        Interval bounds broadcastable to ``theta``'s shape.
    backend : str, optional
        Force the ``"python"`` or ``"cython"`` kernel.
    """

    def __init__(self, d, n_out, rho=1.0, P0=1e4, p0=1e4, p1: Optional[float] = 1e-6,
                 theta0=None, projection=None, backend=None):
        if d < 1 or n_out < 1:
            raise ConfigurationError("estimator dimensions must be positive")
        if not rho > 0:
            raise ConfigurationError(f"rho must be positive, got {rho}")
        if p1 is not None and not (0 < p1 < p0):
            raise ConfigurationError(f"need 0 < p1 < p0, got p0={p0}, p1={p1}")
        self.d, self.n_out = int(d), int(n_out)
        self.rho, self.p0, self.p1 = float(rho), float(p0), p1 if p1 is None else float(p1)
        if np.ndim(P0) == 0:
            self.P0_scale = float(P0)
            P = float(P0) * np.eye(self.d)
        else:
            self.P0_scale = None
            P = np.array(P0, dtype=float)
        if P.shape != (self.d, self.d) or not np.allclose(P, P.T, rtol=0, atol=0):
            raise ConfigurationError("P0 must be a symmetric (d, d) matrix")
        lam = _min_eig(P)
        if not lam > 0:
            raise ConfigurationError("P0 must be positive definite")
        self.P = P
        self._bound = 1.0 / lam
        if theta0 is None:
            self.theta = np.zeros((self.d, self.n_out))
        else:
            self.theta = np.array(theta0, dtype=float).reshape(self.d, self.n_out)
        if projection is not None:
            lo, hi = (np.broadcast_to(np.asarray(b, dtype=float), self.theta.shape).copy()
                      for b in projection)
            if np.any(lo > hi):
                raise ConfigurationError("projection lower bounds exceed upper bounds")
            self.projection = (lo, hi)
            np.clip(self.theta, lo, hi, out=self.theta)
        else:
            self.projection = None
        self._kernel = kernels.get_kernel(backend)
        self.n_steps = 0
        self.resets: List[int] = []

    @property
    def resetting(self) -> bool:
        return self.p1 is not None

    def copy(self) -> "RlsEstimator":
        other = object.__new__(RlsEstimator)
        other.__dict__.update(self.__dict__)
        other.P = self.P.copy()
        other.theta = self.theta.copy()
        other.resets = list(self.resets)
        return other

    def lambda_min(self) -> float:
        return _min_eig(self.P)

    def _reset_check(self) -> bool:
        if not np.all(np.isfinite(self.P)):
            # diverged; leave it to the caller to notice the non-finite estimate
            return False
        lam = _min_eig(self.P)
        if lam <= self.p1:
            self.P = self.p0 * np.eye(self.d)
            self._bound = 1.0 / self.p0
            return True
        self._bound = 1.0 / lam
        return False

    def fit(self, Z, Y) -> EstimationLog:
        """Run the recursion over the rows of ``Z`` (regressors) and ``Y``."""
        Z = np.ascontiguousarray(Z, dtype=float)
        Y = np.ascontiguousarray(Y, dtype=float)
        if Z.ndim != 2 or Y.ndim != 2 or Z.shape[0] != Y.shape[0]:
            raise ConfigurationError("Z and Y must be 2-D with matching row counts")
        if Z.shape[1] != self.d or Y.shape[1] != self.n_out:
            raise ConfigurationError(
                f"estimator expects regressors of length {self.d} and outputs of length "
                f"{self.n_out}; got {Z.shape[1]} and {Y.shape[1]}")
        n = Z.shape[0]
        log = EstimationLog(np.zeros((n, self.n_out)), np.zeros((n, self.n_out)),
                            np.zeros(n), np.zeros(n, dtype=bool), np.zeros(n, dtype=bool),
                            step0=self.n_steps)
        trip = np.inf if self.p1 is None else (1.0 - _SCREEN_SLACK) / self.p1
        lo, hi = self.projection if self.projection is not None else (None, None)
        k = 0
        while k < n:
            k, self._bound, tripped = self._kernel(
                self.theta, self.P, Z, Y, self.rho, self._bound, trip, lo, hi,
                log.eps, log.eps_a, log.m2, log.rejected, k)
            if tripped and self._reset_check():
                log.reset[k - 1] = True
                self.resets.append(self.n_steps + k - 1)
        self.n_steps += n
        return log

    def update(self, zeta, y) -> StepResult:
        """Single recursion step.

        Raises
        ------
        RejectedSampleError
            If the sample is non-finite; the estimator is left unchanged.
        """
        zeta = np.asarray(zeta, dtype=float).reshape(1, -1)
        y = np.asarray(y, dtype=float).reshape(1, -1)
        if not (np.all(np.isfinite(zeta)) and np.all(np.isfinite(y))):
            raise RejectedSampleError("non-finite regressor sample rejected")
        log = self.fit(zeta, y)
        return StepResult(log.eps[0], log.eps_a[0], float(log.m2[0]), bool(log.reset[0]))


def rls_step(est: RlsEstimator, sample):
    """Update ``est`` in place with one :class:`RegressorSample`.

    Returns ``(est, eps, eps_a, m)``.
    """
    result = est.update(sample.zeta, sample.y)
    return est, result.eps, result.eps_a, result.m

"""Batch least-squares fits of the regression ``y = theta^T zeta``."""

import numpy as np

from ..errors import ConfigurationError


def _stack(samples):
    if isinstance(samples, tuple) and len(samples) == 2:
        Z, Y = (np.asarray(a, dtype=float) for a in samples)
    else:
        samples = list(samples)
        if not samples:
            raise ConfigurationError("batch least squares needs at least one sample")
        Z = np.array([s.zeta for s in samples], dtype=float)
        Y = np.array([s.y for s in samples], dtype=float)
    if Z.ndim != 2 or Y.ndim != 2 or Z.shape[0] != Y.shape[0] or Z.shape[0] == 0:
        raise ConfigurationError("batch least squares needs matching, non-empty Z and Y")
    return Z, Y


def batch_least_squares(samples) -> np.ndarray:
    """Minimum-norm minimiser of ``sum |theta^T zeta - y|^2``.

    ``samples`` is a sequence of :class:`RegressorSample` or a ``(Z, Y)``
    tuple of row-stacked arrays. The result satisfies the normal equations
    ``theta^T sum(zeta zeta^T) = sum(y zeta^T)``; among their solutions it
    has the smallest Frobenius norm.
    """
    Z, Y = _stack(samples)
    theta, *_ = np.linalg.lstsq(Z, Y, rcond=None)
    return theta


def regularized_least_squares(samples, P0, theta0=None, rho=1.0) -> np.ndarray:
    """Closed-form minimiser of the prior-weighted cost.

    Solves ``(P0^-1 + sum(zeta zeta^T) / rho) theta = P0^-1 theta0 +
    sum(zeta y^T) / rho``.
    """
    Z, Y = _stack(samples)
    d = Z.shape[1]
    P0 = P0 * np.eye(d) if np.ndim(P0) == 0 else np.asarray(P0, dtype=float)
    theta0 = np.zeros((d, Y.shape[1])) if theta0 is None else np.asarray(theta0, dtype=float)
    P0inv = np.linalg.inv(P0)
    lhs = P0inv + Z.T @ Z / rho
    rhs = P0inv @ theta0 + Z.T @ Y / rho
    return np.linalg.solve(lhs, rhs)

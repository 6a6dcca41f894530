"""Linear and bilinear Koopman models of the lifted block.

Both models predict the lifted block ``z2(k+1)`` (``[z2; z3]`` when extra
observables are registered); the physical block always follows the known
robot dynamics and is never estimated. Parameters are stored as the
regression matrix ``theta`` of shape ``(d, N2)`` so that
``prediction = theta^T zeta``.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from .regressors import (BilinearLayout, OperatingPoint, bilinear_regressor,
                         linear_regressor, pack_symmetric, unpack_symmetric)


def _check_vectors(z1, lifted, U, n1, n_lifted, m):
    z1 = np.asarray(z1, dtype=float)
    lifted = np.asarray(lifted, dtype=float)
    U = np.asarray(U, dtype=float)
    if z1.shape[-1:] != (n1,) or lifted.shape[-1:] != (n_lifted,) or U.shape[-1:] != (m,):
        raise ConfigurationError(
            f"model expects z1[{n1}], z2[{n_lifted}], U[{m}]; got "
            f"{z1.shape}, {lifted.shape}, {U.shape}")
    return z1, lifted, U


@dataclass
class LinearKoopmanModel:
    """``z2(k+1) = A21 z1 + A22 z2 + B2 U``."""

    A21: np.ndarray
    A22: np.ndarray
    B2: np.ndarray

    kind = "linear"

    def __post_init__(self):
        self.A21 = np.asarray(self.A21, dtype=float)
        self.A22 = np.asarray(self.A22, dtype=float)
        self.B2 = np.asarray(self.B2, dtype=float)
        n2 = self.A22.shape[0]
        if self.A22.shape != (n2, n2) or self.A21.shape[0] != n2 or self.B2.shape[0] != n2:
            raise ConfigurationError("inconsistent linear model blocks")
        if not all(np.all(np.isfinite(a)) for a in (self.A21, self.A22, self.B2)):
            raise ConfigurationError("linear model parameters must be finite")

    @property
    def n1(self):
        return self.A21.shape[1]

    @property
    def n_lifted(self):
        return self.A22.shape[0]

    @property
    def m(self):
        return self.B2.shape[1]

    @property
    def regressor_dim(self):
        return self.n1 + self.n_lifted + self.m

    @property
    def theta(self) -> np.ndarray:
        return np.vstack([self.A21.T, self.A22.T, self.B2.T])

    @classmethod
    def from_theta(cls, theta, n1, n_lifted, m):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (n1 + n_lifted + m, n_lifted):
            raise ConfigurationError(f"theta has shape {theta.shape}, expected "
                                     f"({n1 + n_lifted + m}, {n_lifted})")
        return cls(theta[:n1].T.copy(), theta[n1:n1 + n_lifted].T.copy(),
                   theta[n1 + n_lifted:].T.copy())

    @classmethod
    def zeros(cls, n1, n_lifted, m):
        return cls(np.zeros((n_lifted, n1)), np.zeros((n_lifted, n_lifted)), np.zeros((n_lifted, m)))

    def regressor(self, z1, lifted, U):
        return linear_regressor(*_check_vectors(z1, lifted, U, self.n1, self.n_lifted, self.m))

    def predict(self, z1, lifted, U) -> np.ndarray:
        z1, lifted, U = _check_vectors(z1, lifted, U, self.n1, self.n_lifted, self.m)
        return z1 @ self.A21.T + lifted @ self.A22.T + U @ self.B2.T

    def with_theta(self, theta):
        return type(self).from_theta(theta, self.n1, self.n_lifted, self.m)


@dataclass
class BilinearKoopmanModel:
    """Second-order expansion without the input-quadratic block.

    Row ``i`` of the prediction is::

        f0_i + A21_i d1 + A22_i d2 + B2_i U + d1' H11_i d1 / 2 + d2' H21_i d1
             + d2' H22_i d2 / 2 + d1' H13_i U + d2' H23_i U

    with ``d1 = z1 - z10`` and ``d2 = z2 - z20``.
    """

    theta: np.ndarray
    layout: BilinearLayout
    x0: OperatingPoint

    kind = "bilinear"

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (self.layout.dim, self.layout.n_lifted):
            raise ConfigurationError(
                f"theta has shape {self.theta.shape}, layout needs "
                f"({self.layout.dim}, {self.layout.n_lifted})")
        if self.x0.z1.size != self.layout.n1 or self.x0.lifted.size != self.layout.n_lifted:
            raise ConfigurationError("operating point does not match the layout")
        if not np.all(np.isfinite(self.theta)):
            raise ConfigurationError("bilinear model parameters must be finite")

    @property
    def n1(self):
        return self.layout.n1

    @property
    def n_lifted(self):
        return self.layout.n_lifted

    @property
    def m(self):
        return self.layout.m

    @property
    def regressor_dim(self):
        return self.layout.dim

    def _block(self, name):
        return self.theta[self.layout.slices[name]]

    @property
    def A21(self):
        return self._block("d1").T

    @property
    def A22(self):
        return self._block("d2").T

    @property
    def B2(self):
        return self._block("u").T

    @property
    def f0(self):
        return self._block("one")[0].copy()

    def phi(self, k: int) -> np.ndarray:
        """Packed coefficient matrix ``Phi_k`` (``k = 1..5``), shape ``(|g_k|, N2)``."""
        return self._block(f"g{k}")

    # Hessian blocks, stacked over output rows: shape (N2, ., .)
    @property
    def H11(self):
        return unpack_symmetric(self.phi(1).T, self.n1)

    @property
    def H21(self):
        return self.phi(2).T.reshape(self.n_lifted, self.n_lifted, self.n1)

    @property
    def H22(self):
        return unpack_symmetric(self.phi(3).T, self.n_lifted)

    @property
    def H13(self):
        return self.phi(4).T.reshape(self.n_lifted, self.n1, self.m)

    @property
    def H23(self):
        return self.phi(5).T.reshape(self.n_lifted, self.n_lifted, self.m)

    @classmethod
    def from_blocks(cls, A21, A22, B2, f0, H11, H21, H22, H13, H23, x0: OperatingPoint):
        """Assemble from Hessian blocks; ``H11``/``H22`` are symmetrised."""
        A21 = np.asarray(A21, dtype=float)
        n2, n1 = A21.shape
        m = np.asarray(B2).shape[1]
        layout = BilinearLayout(n1, n2, m)
        theta = np.vstack([
            A21.T, np.asarray(A22, dtype=float).T, np.asarray(B2, dtype=float).T,
            np.asarray(f0, dtype=float).reshape(1, n2),
            pack_symmetric(H11).T,
            np.asarray(H21, dtype=float).reshape(n2, n2 * n1).T,
            pack_symmetric(H22).T,
            np.asarray(H13, dtype=float).reshape(n2, n1 * m).T,
            np.asarray(H23, dtype=float).reshape(n2, n2 * m).T,
        ])
        return cls(theta, layout, x0)

    @classmethod
    def zeros(cls, n1, n_lifted, m, x0: OperatingPoint = None):
        layout = BilinearLayout(n1, n_lifted, m)
        if x0 is None:
            x0 = OperatingPoint.zeros(n1, n_lifted)
        return cls(np.zeros((layout.dim, n_lifted)), layout, x0)

    def regressor(self, z1, lifted, U):
        z1, lifted, U = _check_vectors(z1, lifted, U, self.n1, self.n_lifted, self.m)
        return bilinear_regressor(z1, lifted, U, self.x0)

    def predict(self, z1, lifted, U) -> np.ndarray:
        return self.regressor(z1, lifted, U) @ self.theta

    def with_theta(self, theta):
        return type(self)(theta, self.layout, self.x0)


def predict(model, z1, z2, U) -> np.ndarray:
    """One-step prediction of the lifted block by either model kind."""
    return model.predict(z1, z2, U)


def model_from_theta(kind, theta, n1, n_lifted, m, x0=None):
    if kind == "linear":
        return LinearKoopmanModel.from_theta(theta, n1, n_lifted, m)
    if kind == "bilinear":
        if x0 is None:
            x0 = OperatingPoint.zeros(n1, n_lifted)
        return BilinearKoopmanModel(theta, BilinearLayout(n1, n_lifted, m), x0)
    raise ConfigurationError(f"unknown model kind {kind!r}")


def regressor_dim(kind, n1, n_lifted, m) -> int:
    if kind == "linear":
        return n1 + n_lifted + m
    if kind == "bilinear":
        return BilinearLayout(n1, n_lifted, m).dim
    raise ConfigurationError(f"unknown model kind {kind!r}")


def compute_f0_reference(bank, system, z10) -> np.ndarray:
    """Analytic operating-point offset ``psi(A z10)``.

    This is the lifted value one input-free step after ``z10``; it can seed
    or sanity-check the estimated ``f0``.
    """
    z10 = system.check_state(z10)
    observables = bank.observables() if hasattr(bank, "observables") else bank
    return observables.evaluate(system.A @ z10)

"""Planted models and data for plant-and-recover checks.

A planted model replaces the observable bank: ``z2`` evolves by the model
itself while ``z1`` follows the exact robot kinematics, so the identified
parameters have a known ground truth.
"""

from typing import List

import numpy as np

from .ident.models import BilinearKoopmanModel, LinearKoopmanModel
from .ident.regressors import OperatingPoint
from .observables import KoopmanState, LiftedSample
from .robots import RobotSystem


def random_linear_model(rng: np.random.Generator, n1, n_lifted, m, radius=0.8,
                        scale=0.1) -> LinearKoopmanModel:
    """Random linear model whose ``A22`` has spectral norm ``radius``."""
    Q, _ = np.linalg.qr(rng.normal(size=(n_lifted, n_lifted)))
    return LinearKoopmanModel(scale * rng.normal(size=(n_lifted, n1)), radius * Q,
                              scale * rng.normal(size=(n_lifted, m)))


def random_bilinear_model(rng: np.random.Generator, n1, n_lifted, m, x0=None,
                          scale=0.1) -> BilinearKoopmanModel:
    """Random bilinear model with symmetric Hessian blocks."""
    def sym(n):
        H = rng.normal(scale=scale, size=(n_lifted, n, n))
        return 0.5 * (H + H.transpose(0, 2, 1))

    if x0 is None:
        x0 = OperatingPoint(rng.normal(size=n1), rng.normal(size=n_lifted))
    return BilinearKoopmanModel.from_blocks(
        A21=rng.normal(scale=scale, size=(n_lifted, n1)),
        A22=rng.normal(scale=scale, size=(n_lifted, n_lifted)),
        B2=rng.normal(scale=scale, size=(n_lifted, m)),
        f0=rng.normal(scale=scale, size=n_lifted),
        H11=sym(n1), H21=rng.normal(scale=scale, size=(n_lifted, n_lifted, n1)),
        H22=sym(n_lifted), H13=rng.normal(scale=scale, size=(n_lifted, n1, m)),
        H23=rng.normal(scale=scale, size=(n_lifted, n_lifted, m)), x0=x0)


def planted_trajectory(system: RobotSystem, model, X0, z2_0, inputs) -> List[LiftedSample]:
    """Exact samples of a system whose lifted block follows ``model``."""
    X = system.check_state(X0)
    z = KoopmanState(X.copy(), np.asarray(z2_0, dtype=float).copy())
    samples = []
    for U in np.asarray(inputs, dtype=float).reshape(-1, system.input_dim):
        z2 = model.predict(z.z1, z.z2, U)
        X = system.A @ X + system.B @ U
        z_next = KoopmanState(X.copy(), z2)
        samples.append(LiftedSample(z, U.copy(), z_next))
        z = z_next
    return samples

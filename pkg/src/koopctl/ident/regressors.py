"""Regressor vectors for the linear and bilinear parametrisations.

Linear: ``zeta = [z1; z2; U]`` and ``y = z2(k+1)``.

Bilinear, around the operating point ``(z10, z20, U0 = 0)`` with deviations
``d1 = z1 - z10`` and ``d2 = z2 - z20``::

    zeta = [d1; d2; U; 1; g1(d1); g2(d2, d1); g3(d2); g4(d1, U); g5(d2, U)]

``g1``/``g3`` pack the upper triangle of ``d d^T`` with ``1/2`` on the
diagonal and ``1`` off it, so the matching parameters are exactly the
entries ``H[a, b], a <= b`` of a symmetric Hessian block and ``Phi^T g``
reproduces ``d^T H d / 2``. ``g2 = d2 (x) d1``, ``g4 = d1 (x) U`` and
``g5 = d2 (x) U`` are full Kronecker grids (first factor major).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import ConfigurationError
from ..observables import LiftedSample


@dataclass(frozen=True)
class RegressorSample:
    zeta: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class OperatingPoint:
    """Bilinear expansion point; the input part is always zero."""

    z1: np.ndarray
    lifted: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z1", np.asarray(self.z1, dtype=float).reshape(-1))
        object.__setattr__(self, "lifted", np.asarray(self.lifted, dtype=float).reshape(-1))

    @classmethod
    def zeros(cls, n1, n_lifted):
        return cls(np.zeros(n1), np.zeros(n_lifted))


@lru_cache(maxsize=None)
def _triu(n):
    rows, cols = np.triu_indices(n)
    weights = np.where(rows == cols, 0.5, 1.0)
    for a in (rows, cols, weights):
        a.setflags(write=False)
    return rows, cols, weights


@dataclass(frozen=True)
class BilinearLayout:
    """Block sizes and offsets of the bilinear regressor."""

    n1: int
    n_lifted: int
    m: int

    @property
    def sizes(self):
        n1, n2, m = self.n1, self.n_lifted, self.m
        return {
            "d1": n1, "d2": n2, "u": m, "one": 1,
            "g1": n1 * (n1 + 1) // 2, "g2": n2 * n1, "g3": n2 * (n2 + 1) // 2,
            "g4": n1 * m, "g5": n2 * m,
        }

    @property
    def slices(self):
        out, start = {}, 0
        for name, size in self.sizes.items():
            out[name] = slice(start, start + size)
            start += size
        return out

    @property
    def dim(self) -> int:
        return sum(self.sizes.values())


def linear_layout_dim(n1, n_lifted, m) -> int:
    return n1 + n_lifted + m


def quadratic_features(d) -> np.ndarray:
    """Weighted upper-triangular products of ``d`` (last axis)."""
    rows, cols, weights = _triu(d.shape[-1])
    return weights * d[..., rows] * d[..., cols]


def kron_features(a, b) -> np.ndarray:
    """``a (x) b`` along the last axis, ``a`` major."""
    return (a[..., :, None] * b[..., None, :]).reshape(*a.shape[:-1], a.shape[-1] * b.shape[-1])


def linear_regressor(z1, lifted, U) -> np.ndarray:
    """``[z1; z2; U]`` for single vectors or row-stacked batches."""
    return np.concatenate([np.asarray(z1, float), np.asarray(lifted, float),
                           np.asarray(U, float)], axis=-1)


def bilinear_regressor(z1, lifted, U, x0: OperatingPoint) -> np.ndarray:
    """Bilinear regressor for single vectors or row-stacked batches."""
    z1 = np.asarray(z1, dtype=float)
    lifted = np.asarray(lifted, dtype=float)
    U = np.asarray(U, dtype=float)
    if z1.shape[-1] != x0.z1.size or lifted.shape[-1] != x0.lifted.size:
        raise ConfigurationError("operating point does not match the sample dimensions")
    d1 = z1 - x0.z1
    d2 = lifted - x0.lifted
    one = np.ones(d1.shape[:-1] + (1,))
    return np.concatenate([
        d1, d2, U, one,
        quadratic_features(d1), kron_features(d2, d1), quadratic_features(d2),
        kron_features(d1, U), kron_features(d2, U),
    ], axis=-1)


def build_linear_regressor(sample: LiftedSample) -> RegressorSample:
    if sample.z.z1.size != sample.z_next.z1.size or sample.z.lifted.size != sample.z_next.lifted.size:
        raise ConfigurationError("sample states have inconsistent dimensions")
    return RegressorSample(linear_regressor(sample.z.z1, sample.z.lifted, sample.u),
                           sample.z_next.lifted.copy())


def build_bilinear_regressor(sample: LiftedSample, x0: OperatingPoint) -> RegressorSample:
    if sample.z.lifted.size != sample.z_next.lifted.size:
        raise ConfigurationError("sample states have inconsistent dimensions")
    return RegressorSample(bilinear_regressor(sample.z.z1, sample.z.lifted, sample.u, x0),
                           sample.z_next.lifted.copy())


def pack_symmetric(H) -> np.ndarray:
    """Upper-triangular entries of (the symmetric part of) ``H``, row-major."""
    H = np.asarray(H, dtype=float)
    rows, cols, _ = _triu(H.shape[-1])
    Hs = 0.5 * (H + np.swapaxes(H, -1, -2))
    return Hs[..., rows, cols]


def unpack_symmetric(packed, n) -> np.ndarray:
    """Inverse of :func:`pack_symmetric` along the last axis."""
    packed = np.asarray(packed, dtype=float)
    rows, cols, _ = _triu(n)
    H = np.zeros(packed.shape[:-1] + (n, n))
    H[..., rows, cols] = packed
    H[..., cols, rows] = packed
    return H

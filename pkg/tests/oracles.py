"""Reference computations written independently of the package internals."""

import itertools

import numpy as np


def random_blocks(rng, n1, n2, m, scale=0.1):
    """Planted bilinear blocks with symmetric H11/H22."""
    def sym(n):
        H = rng.normal(scale=scale, size=(n2, n, n))
        return H + H.transpose(0, 2, 1)

    return {
        "A21": rng.normal(scale=scale, size=(n2, n1)),
        "A22": rng.normal(scale=scale, size=(n2, n2)),
        "B2": rng.normal(scale=scale, size=(n2, m)),
        "f0": rng.normal(scale=scale, size=n2),
        "H11": sym(n1),
        "H21": rng.normal(scale=scale, size=(n2, n2, n1)),
        "H22": sym(n2),
        "H13": rng.normal(scale=scale, size=(n2, n1, m)),
        "H23": rng.normal(scale=scale, size=(n2, n2, m)),
    }


def direct_bilinear(b, z1, z2, U, z10, z20):
    """Row-by-row quadratic-form evaluation of the bilinear map."""
    d1 = np.asarray(z1) - z10
    d2 = np.asarray(z2) - z20
    out = np.empty(b["A22"].shape[0])
    for i in range(out.size):
        out[i] = (b["f0"][i] + b["A21"][i] @ d1 + b["A22"][i] @ d2 + b["B2"][i] @ U
                  + 0.5 * d1 @ b["H11"][i] @ d1 + d2 @ b["H21"][i] @ d1
                  + 0.5 * d2 @ b["H22"][i] @ d2 + d1 @ b["H13"][i] @ U
                  + d2 @ b["H23"][i] @ U)
    return out


def corner_argmax(c, lower, upper):
    """Exhaustive search over the 2^m box corners; returns (corner, value)."""
    best, best_val = None, -np.inf
    for pick in itertools.product((0, 1), repeat=len(c)):
        U = np.where(np.array(pick) == 1, upper, lower).astype(float)
        val = float(np.dot(c, U))
        if val > best_val:
            best, best_val = U, val
    return best, best_val


def naive_rls(theta, P, Z, Y, rho=1.0):
    """Textbook recursion, one sample at a time, no resets or projection."""
    theta, P = theta.copy(), P.copy()
    for z, y in zip(Z, Y):
        Pz = P @ z
        m2 = rho + z @ Pz
        eps = theta.T @ z - y
        theta = theta - np.outer(Pz, eps) / m2
        P = P - np.outer(Pz, Pz) / m2
    return theta, P

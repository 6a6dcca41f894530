"""Pure-numpy recursive least-squares block kernel.

Reference implementation of the update loop; the compiled ``_rls_ext``
module exposes the same ``rls_block`` function.
"""

import numpy as np


def rls_block(theta, P, Z, Y, rho, bound, trip, lo, hi,
              eps, eps_a, m2, rejected, start):
    """Process samples ``start, start+1, ...`` in place.

    Stops after the first sample whose information bound reaches ``trip``
    so the caller can run the exact minimum-eigenvalue check.

    Returns
    -------
    (next_index, bound, tripped)
    """
    n = Z.shape[0]
    project = lo is not None
    for k in range(start, n):
        z = Z[k]
        y = Y[k]
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(y))):
            rejected[k] = True
            eps[k] = np.nan
            eps_a[k] = np.nan
            m2[k] = np.nan
            continue
        pz = P @ z
        mk = rho + z @ pz
        e = z @ theta - y
        theta -= np.outer(pz, e) / mk
        P -= np.outer(pz, pz) / mk
        if project:
            np.clip(theta, lo, hi, out=theta)
        eps[k] = e
        eps_a[k] = z @ theta - y
        m2[k] = mk
        bound += (z @ z) / rho
        if bound >= trip:
            return k + 1, bound, True
    return n, bound, False

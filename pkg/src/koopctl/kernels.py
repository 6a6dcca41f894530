"""Backend selection for the hot recursive least-squares loop.

The compiled extension ``koopctl._rls_ext`` is used when it was built;
otherwise, or when ``KOOPCTL_PURE_PYTHON=1`` is set, the numpy fallback
``koopctl._rls_py`` runs instead. Both expose ``rls_block`` with identical
semantics.
"""

import os

from . import _rls_py

BACKEND = "python"
rls_block = _rls_py.rls_block

if os.environ.get("KOOPCTL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _rls_ext
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        rls_block = _rls_ext.rls_block


def get_kernel(backend=None):
    """Return ``rls_block`` for ``backend`` (``"python"``, ``"cython"`` or the default)."""
    if backend is None:
        return rls_block
    if backend == "python":
        return _rls_py.rls_block
    if backend == "cython":
        from . import _rls_ext
        return _rls_ext.rls_block
    raise ValueError(f"unknown backend {backend!r}")

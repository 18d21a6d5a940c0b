"""Kernel backend selection.

The compiled Cython module is preferred; the numpy module is used when it is
missing or when the environment variable ``HILFSPLINE_PURE_PYTHON`` is set to
a non-empty value. Both expose ``NAME``, ``inc_beta_vec`` and
``integration_tensor``.
"""
import os

from . import _pykernels

if os.environ.get("HILFSPLINE_PURE_PYTHON"):
    kernels = _pykernels
else:
    try:
        from . import _ckernels as kernels
    except ImportError:  # extension not built
        kernels = _pykernels

BACKEND = kernels.NAME


def available_backends():
    """Return ``{name: module}`` for every importable kernel backend."""
    found = {_pykernels.NAME: _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found[_ckernels.NAME] = _ckernels
    return found

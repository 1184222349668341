"""Kernel backend selection.

The compiled extension is used when it imports; ``NNLAD_BACKEND=python``
forces the numpy fallback and ``NNLAD_BACKEND=compiled`` makes a missing
extension an error.
"""

import os

from nnlad import _fallback

try:
    from nnlad import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _select(name):
    if name == "python":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise ImportError("nnlad._kernels is not built; run `pip install -e .`")
        return _compiled
    if name in (None, "", "auto"):
        return _compiled if _compiled is not None else _fallback
    raise ValueError(f"unknown backend {name!r}")


kernels = _select(os.environ.get("NNLAD_BACKEND"))


def available():
    """Names of the importable backends."""
    return ["python"] + (["compiled"] if _compiled is not None else [])


def get(name=None):
    """Kernel module by name; ``None`` gives the active one."""
    return kernels if name is None else _select(name)


def use(name):
    """Switch the active backend for this process."""
    global kernels
    kernels = _select(name)
    return kernels

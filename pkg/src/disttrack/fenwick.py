"""Fenwick-tree backend selection.

The compiled kernel is used when it was built at install time; otherwise the
pure-Python implementation is used.  ``use_backend`` switches explicitly (the
benchmark and the backend-parity tests rely on it).
"""
from . import _fenwick_py

try:
    from . import _fenwick_ext
except ImportError:  # extension not built
    _fenwick_ext = None

BACKENDS = {"python": _fenwick_py.FenwickTree}
if _fenwick_ext is not None:
    BACKENDS["compiled"] = _fenwick_ext.FenwickTree

FenwickTree = BACKENDS.get("compiled", _fenwick_py.FenwickTree)
backend = "compiled" if "compiled" in BACKENDS else "python"


def use_backend(name):
    """Select the Fenwick implementation used by structures created afterwards."""
    global FenwickTree, backend
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    FenwickTree = BACKENDS[name]
    backend = name
    return FenwickTree

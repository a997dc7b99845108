"""Propagation kernels.

``_dop853_cy`` is the compiled core built by ``setup.py``; ``_dop853_py`` is a
numpy implementation of the same algorithm.  The compiled one is used when it
imports, unless ``LINGRID_PURE_PYTHON`` is set to a non-empty value other
than ``0``.
"""

import os

from . import _dop853_py

try:
    from . import _dop853_cy
except ImportError:  # extension not built
    _dop853_cy = None

BACKENDS = {"python": _dop853_py}
if _dop853_cy is not None:
    BACKENDS["compiled"] = _dop853_cy

_forced = os.environ.get("LINGRID_PURE_PYTHON", "") not in ("", "0")
DEFAULT_BACKEND = "compiled" if ("compiled" in BACKENDS and not _forced) else "python"


def get_kernel(name="auto"):
    """Return the kernel module for backend ``name`` ('auto', 'compiled', 'python')."""
    if name == "auto":
        name = DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {sorted(BACKENDS)}") from None

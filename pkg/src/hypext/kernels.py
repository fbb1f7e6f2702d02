"""Kernel backend selection.

The compiled Cython core is used when it imports; otherwise the numpy
fallback. Set ``HYPEXT_PURE=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("HYPEXT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

asinh_sinh_scaled = _impl.asinh_sinh_scaled
asinh_from_log = _impl.asinh_from_log
chart_components = _impl.chart_components
join_ambient = _impl.join_ambient
stencil_sup = _impl.stencil_sup

# scalar helpers with no hot loop stay in numpy
log_cosh = _kernels_py.log_cosh
log_sinh = _kernels_py.log_sinh


def backends():
    """Return the available backend modules keyed by name."""
    out = {"python": _kernels_py}
    try:
        from . import _core

        out["cython"] = _core
    except ImportError:
        pass
    return out

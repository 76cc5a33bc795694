"""Backend selection for the hot loops.

The compiled extension ``fracpat._kernels`` is used when importable;
otherwise, or when the environment variable ``FRACPAT_PURE_PYTHON`` is set
to a non-empty value other than ``0``, the numpy fallback is used.
"""
import os

from . import _fallback

_force_pure = os.environ.get("FRACPAT_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

cell_sum = _impl.cell_sum
trilinear_sums = _impl.trilinear_sums
pattern_scan = _impl.pattern_scan
spline_eval = _fallback.spline_eval


def backends():
    """Mapping of available backend name -> module, fallback always included."""
    out = {"python": _fallback}
    try:
        from . import _kernels  # type: ignore[attr-defined]
        out["compiled"] = _kernels
    except ImportError:
        pass
    return out

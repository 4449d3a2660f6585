"""Segmentation kernels with a compiled core and a NumPy fallback.

The Cython extension `_speed` is selected when it was built; otherwise the
pure implementation `_pure` is used.  Set PRESSCLAIMS_PURE_KERNELS=1 to
force the fallback (benchmarks and differential tests rely on this).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("PRESSCLAIMS_PURE_KERNELS"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _speed as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

seg_norm = _impl.seg_norm
best_split = _impl.best_split
exact_dp = _impl.exact_dp


def available_backends() -> dict[str, object]:
    """All importable kernel implementations, keyed by name."""
    backends: dict[str, object] = {"pure": _pure}
    try:
        from . import _speed

        backends["compiled"] = _speed
    except ImportError:
        pass
    return backends

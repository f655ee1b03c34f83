"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting
``FISHERINFO_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("FISHERINFO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

gauss_moments = _impl.gauss_moments
orthogonality_sum = _impl.orthogonality_sum
binned_regression_stats = _impl.binned_regression_stats
binned_residual_sums = _impl.binned_residual_sums

__all__ = [
    "BACKEND",
    "gauss_moments",
    "orthogonality_sum",
    "binned_regression_stats",
    "binned_residual_sums",
]

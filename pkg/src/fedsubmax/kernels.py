"""Backend selection for the hot loops.

The numba backend is used when numba imports cleanly, unless the
``FEDSUBMAX_DISABLE_NUMBA`` environment variable is set to a truthy value,
in which case the pure-numpy implementations are used. The choice is made
once, at import time.
"""

import os

from . import _kernels_numpy

_DISABLED = os.environ.get("FEDSUBMAX_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

if _DISABLED:
    _impl = _kernels_numpy
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _kernels_numpy
        BACKEND = "numpy"

subset_probabilities = _impl.subset_probabilities
extension_gradient = _impl.extension_gradient
extension_gradients_stacked = _impl.extension_gradients_stacked
sampled_gradient = _impl.sampled_gradient
facility_table = _impl.facility_table
masks_from_rows = _impl.masks_from_rows

__all__ = [
    "BACKEND",
    "subset_probabilities",
    "extension_gradient",
    "extension_gradients_stacked",
    "sampled_gradient",
    "facility_table",
    "masks_from_rows",
]

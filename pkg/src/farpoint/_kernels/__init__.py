"""Kernel selection: compiled extension when present, numpy fallback otherwise.

Set ``FARPOINT_PURE=1`` to force the fallback (useful for benchmarking and
for debugging suspected extension issues).
"""

import os

from . import fallback

if os.environ.get("FARPOINT_PURE", "").strip() not in ("", "0"):
    _impl = fallback
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = fallback

IMPLEMENTATION = _impl.IMPLEMENTATION
OPTIMAL = fallback.OPTIMAL
UNBOUNDED = fallback.UNBOUNDED
ITERATION_LIMIT = fallback.ITERATION_LIMIT

run_simplex = _impl.run_simplex
batch_affine_max = _impl.batch_affine_max

__all__ = [
    "IMPLEMENTATION",
    "OPTIMAL",
    "UNBOUNDED",
    "ITERATION_LIMIT",
    "run_simplex",
    "batch_affine_max",
    "fallback",
]

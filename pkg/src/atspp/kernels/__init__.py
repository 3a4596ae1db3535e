"""Hot kernels: exact path DP, partition enumeration, swap rounding.

A compiled Cython core is used when available; otherwise the pure-Python
twin takes over.  Both produce bit-identical results (same arithmetic, same
iteration order, same splitmix64 stream), which the test suite asserts.
Set ATSPP_PURE=1 to force the pure backend.
"""

import os

if os.environ.get("ATSPP_PURE"):
    from . import _pure as _impl

    BACKEND = "pure"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _pure as _impl

        BACKEND = "pure"

held_karp_path = _impl.held_karp_path
partition_min_excess = _impl.partition_min_excess
swap_round = _impl.swap_round
splitmix64_stream = _impl.splitmix64_stream


def backend() -> str:
    """Name of the active kernel backend ('compiled' or 'pure')."""
    return BACKEND

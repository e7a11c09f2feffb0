"""Select the compiled kernel when available, else the pure-Python twin.

Set WREATHCERT_PURE=1 to force the pure implementation (used by the
benchmark and by kernel parity tests).
"""

from __future__ import annotations

import os

from wreathcert import _purekernel

if os.environ.get("WREATHCERT_PURE"):
    impl = _purekernel
else:
    try:
        from wreathcert import _speedups as impl  # type: ignore[no-redef]
    except ImportError:
        impl = _purekernel

IMPL = impl.IMPL

free_mul = impl.free_mul
free_inv = impl.free_inv
free_ball = impl.free_ball
shortlex_next = impl.shortlex_next
free_window_scan = impl.free_window_scan
free_mul_many = impl.free_mul_many

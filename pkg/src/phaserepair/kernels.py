"""Backend selection for the hot loops (biquad cascade, polyphase FIR).

At import time we pick the compiled Cython extension when it is
available and fall back to the pure-numpy implementations otherwise.
Set the environment variable ``PHASEREPAIR_NO_EXT`` to any non-empty
value to force the fallback (useful for benchmarking and debugging).

``BACKEND`` reports which implementation is active: ``"compiled"`` or
``"numpy"``.
"""

import os

from . import _fallback

BACKEND = "numpy"
_impl = _fallback

if not os.environ.get("PHASEREPAIR_NO_EXT"):
    try:
        from . import _kernels as _ext
    except ImportError:
        pass
    else:
        _impl = _ext
        BACKEND = "compiled"

sosfilt = _impl.sosfilt
polyphase_filter = _impl.polyphase_filter

__all__ = ["BACKEND", "sosfilt", "polyphase_filter"]

"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``SHIFTPRIMES_KERNELS=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SHIFTPRIMES_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

sieve_segment = _impl.sieve_segment
prefix_char_scan = _impl.prefix_char_scan
pair_histograms = _impl.pair_histograms
bv_scan = _impl.bv_scan


def backends() -> dict:
    """All importable kernel modules by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out

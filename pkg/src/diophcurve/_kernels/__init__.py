"""Kernel backend selection.

The compiled backend is used when importable; set DIOPH_PURE=1 to force the
numpy fallback.  Both export the same functions with identical signatures
and decision rules (see pyfallback's module docstring for the contract).
"""

import os

if os.environ.get("DIOPH_PURE") == "1":
    from . import pyfallback as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pyfallback as _impl

BACKEND = _impl.BACKEND

near_count_chunk = _impl.near_count_chunk
window_count_chunk = _impl.window_count_chunk
rect_cover_sim_chunk = _impl.rect_cover_sim_chunk
rect_cover_mult_chunk = _impl.rect_cover_mult_chunk
strip_cover_chunk = _impl.strip_cover_chunk
measure_chunk = _impl.measure_chunk
unit_coords = _impl.unit_coords
mc_chunk = _impl.mc_chunk

__all__ = [
    "BACKEND", "near_count_chunk", "window_count_chunk",
    "rect_cover_sim_chunk", "rect_cover_mult_chunk", "strip_cover_chunk",
    "measure_chunk", "unit_coords", "mc_chunk",
]

"""Selects the Monte Carlo kernel: compiled if importable, numpy otherwise.

Set ``MIXEDADC_BACKEND=python`` to force the numpy fallback.
"""

from __future__ import annotations

import os

from . import _fallback

try:
    from . import _kernels
except ImportError:  # extension not built
    _kernels = None

AVAILABLE = {"python": _fallback.accumulate}
if _kernels is not None:
    if _kernels.N_STATS != _fallback.N_STATS:
        raise ImportError("compiled kernel is out of date; rebuild the extension")
    AVAILABLE["cython"] = _kernels.accumulate

_forced = os.environ.get("MIXEDADC_BACKEND", "").strip().lower()
if _forced and _forced not in AVAILABLE:
    raise ImportError(f"MIXEDADC_BACKEND={_forced!r} is not available: {sorted(AVAILABLE)}")
DEFAULT = _forced or ("cython" if "cython" in AVAILABLE else "python")


def get(name: str | None = None):
    """Return ``(name, accumulate)`` for the requested or default backend."""
    name = name or DEFAULT
    try:
        return name, AVAILABLE[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; available: {sorted(AVAILABLE)}") from None

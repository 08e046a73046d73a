"""Counter-based random streams (SplitMix64) for order-independent trials.

Word ``p`` of the stream keyed by ``seed`` is ``mix(key + (p + 1) * GAMMA)``,
so any trial can be regenerated from ``(seed, position)`` alone. The compiled
kernel implements the same arithmetic in C; keep the two in lockstep.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_PI = 2.0 * np.pi
_INV53 = 1.0 / (1 << 53)


def _mix_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int) -> int:
    """Scramble a user seed into a 64-bit stream key."""
    return _mix_int((int(seed) * GAMMA + 0x2545F4914F6CDD1D) & MASK64)


def raw_words(key: int, start: int, count: int) -> np.ndarray:
    pos = np.arange(start + 1, start + 1 + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + pos * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def unit_open_closed(words: np.ndarray) -> np.ndarray:
    """Map words to doubles in (0, 1]."""
    return ((words >> np.uint64(11)).astype(np.float64) + 1.0) * _INV53


def unit_closed_open(words: np.ndarray) -> np.ndarray:
    """Map words to doubles in [0, 1)."""
    return (words >> np.uint64(11)).astype(np.float64) * _INV53


def complex_normals(words: np.ndarray) -> np.ndarray:
    """CN(0, 1) samples from consecutive word pairs (Box-Muller).

    ``words`` has an even-length last axis; the result has half that length.
    """
    u1 = unit_open_closed(words[..., 0::2])
    u2 = unit_closed_open(words[..., 1::2])
    r = np.sqrt(-np.log(u1))
    phase = _TWO_PI * u2
    return r * np.cos(phase) + 1j * (r * np.sin(phase))


def unit_phases(words: np.ndarray) -> np.ndarray:
    phase = _TWO_PI * unit_closed_open(words)
    return np.cos(phase) + 1j * np.sin(phase)

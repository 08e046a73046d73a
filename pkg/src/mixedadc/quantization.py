"""Additive quantization noise model (AQNM) for low-resolution ADCs.

A ``B``-bit converter is replaced by a linear gain ``alpha`` plus additive
noise uncorrelated with its input. ``alpha`` is one minus the normalized
distortion of the optimal (Lloyd-Max) quantizer for a unit Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from . import _rng

MAX_BITS = 16
MAX_ITERATIONS = 10_000
TOLERANCE = 1e-10


class ConvergenceError(RuntimeError):
    pass


def lloyd_max_gaussian(bits: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Design the MMSE quantizer of N(0, 1) with ``2**bits`` levels.

    Returns ``(thresholds, levels, distortion)``. Only the positive half is
    iterated, the quantizer being symmetric. Initial thresholds follow the
    high-resolution compander (quantiles of N(0, 3)), which puts the start
    close enough to the optimum that the fixed point is reached quickly even
    for thousands of cells.
    """
    if not 1 <= bits <= MAX_BITS:
        raise ValueError(f"bits must be in [1, {MAX_BITS}], got {bits}")
    half = 2 ** (bits - 1)
    t = np.sqrt(3.0) * norm.ppf(0.5 + 0.5 * np.arange(half + 1) / half)
    t[0], t[-1] = 0.0, np.inf

    prev = np.inf
    for _ in range(MAX_ITERATIONS):
        # cell mass and first moment; sf differences stay accurate in the tail
        mass = norm.sf(t[:-1]) - norm.sf(t[1:])
        first = norm.pdf(t[:-1]) - norm.pdf(t[1:])
        levels = first / mass
        distortion = 1.0 - 2.0 * np.sum(first * levels)
        t[1:-1] = 0.5 * (levels[:-1] + levels[1:])
        if abs(prev - distortion) < TOLERANCE:
            break
        prev = distortion
    else:
        raise ConvergenceError(f"Lloyd-Max did not converge for {bits} bits")

    thresholds = np.concatenate([-t[-2:0:-1], [0.0], t[1:-1]])
    levels = np.concatenate([-levels[::-1], levels])
    return thresholds, levels, float(distortion)


@lru_cache(maxsize=None)
def lloyd_max_alpha(bits: int) -> float:
    """AQNM gain ``1 - D(bits)``; memoized, safe to call from many threads."""
    return 1.0 - lloyd_max_gaussian(bits)[2]


@dataclass(frozen=True)
class QuantizerSpec:
    """Bit depth of a converter class; ``bits=None`` means full resolution."""

    bits: int | None = None

    def __post_init__(self):
        if self.bits is not None and not 1 <= self.bits <= MAX_BITS:
            raise ValueError(f"bits must be in [1, {MAX_BITS}] or None")

    @property
    def full_resolution(self) -> bool:
        return self.bits is None

    @property
    def alpha(self) -> float:
        return 1.0 if self.bits is None else lloyd_max_alpha(self.bits)

    @classmethod
    def parse(cls, value) -> QuantizerSpec:
        if value is None or (isinstance(value, str) and value.lower() in {"full", "fullres"}):
            return cls(None)
        return cls(int(value))

    def __str__(self):
        return "full" if self.bits is None else str(self.bits)


def alpha_table_text(max_bits: int = 12) -> str:
    lines = ["bits\talpha"]
    lines += [f"{b}\t{lloyd_max_alpha(b):.12g}" for b in range(1, max_bits + 1)]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class QuantNoiseCov:
    """Diagonal of the quantization-noise covariance, one entry per L-RRH."""

    diag: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)


def quant_noise_cov(g_low, g_hat_low, alpha: float, rho: float) -> QuantNoiseCov:
    """``alpha (1 - alpha) (1 + rho * sum_i |conj(g_hat) g|)`` per L-RRH row."""
    g_low = np.asarray(g_low)
    g_hat_low = np.asarray(g_hat_low)
    if g_low.shape != g_hat_low.shape:
        raise ValueError(f"shape mismatch {g_low.shape} vs {g_hat_low.shape}")
    if not 0 < alpha <= 1 or rho < 0:
        raise ValueError("need 0 < alpha <= 1 and rho >= 0")
    load = np.abs(np.conj(g_hat_low) * g_low).sum(axis=-1)
    return QuantNoiseCov(alpha * (1.0 - alpha) * (1.0 + rho * load))


def apply_aqnm(y_low, cov: QuantNoiseCov, alpha: float, seed: int) -> np.ndarray:
    """Return ``alpha * y_low + w_q`` with ``w_q ~ CN(0, diag(cov))``.

    ``y_low`` may carry leading batch axes; each row gets an independent noise
    draw from the stream keyed by ``seed``.
    """
    y_low = np.asarray(y_low, dtype=complex)
    if y_low.shape[-1] != len(cov.diag):
        raise ValueError("y_low and covariance lengths differ")
    if alpha == 1.0:
        return y_low.copy()
    words = _rng.raw_words(_rng.stream_key(seed), 0, 2 * y_low.size)
    noise = _rng.complex_normals(words).reshape(y_low.shape)
    return alpha * y_low + noise * np.sqrt(cov.diag)

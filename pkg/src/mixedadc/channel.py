"""Large-scale fading and Rayleigh small-scale channel draws."""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _rng
from .topology import DistanceMatrix


@dataclass(frozen=True)
class FadingParams:
    gamma: float = 3.8
    sigma_shad_db: float = 8.0
    seed: int = 0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("path-loss exponent must be positive")
        if not self.sigma_shad_db >= 0:
            raise ValueError("shadowing deviation must be non-negative")


@dataclass(frozen=True, eq=False)
class LargeScaleMatrix:
    """Linear-scale ``beta`` (M x K) with full-resolution rows ``[:m_full]``."""

    beta: np.ndarray
    m_full: int
    params: FadingParams | None = None

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float, ndmin=2)
        if beta.ndim != 2:
            raise ValueError("beta must be a 2-D array")
        if not 0 <= self.m_full <= beta.shape[0]:
            raise ValueError(f"m_full={self.m_full} outside [0, {beta.shape[0]}]")
        if not np.all(np.isfinite(beta)) or np.any(beta <= 0):
            raise ValueError("beta entries must be positive and finite")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)

    @property
    def m_total(self) -> int:
        return self.beta.shape[0]

    @property
    def m_low(self) -> int:
        return self.beta.shape[0] - self.m_full

    @property
    def k_users(self) -> int:
        return self.beta.shape[1]

    @property
    def full(self) -> np.ndarray:
        return self.beta[: self.m_full]

    @property
    def low(self) -> np.ndarray:
        return self.beta[self.m_full :]

    def with_partition(self, m_full: int) -> LargeScaleMatrix:
        return LargeScaleMatrix(self.beta, m_full, self.params)

    def to_text(self) -> str:
        p = self.params
        header = f"# m_full={self.m_full} m_low={self.m_low} k_users={self.k_users}"
        if p is not None:
            header += f" gamma={p.gamma!r} sigma_shad_db={p.sigma_shad_db!r} seed={p.seed}"
        buf = io.StringIO()
        buf.write(header + "\n")
        buf.write("\t".join(f"user{k}" for k in range(self.k_users)) + "\n")
        for row in self.beta:
            buf.write("\t".join(f"{v:.17e}" for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> LargeScaleMatrix:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        meta = dict(item.split("=", 1) for item in lines[0][1:].split())
        rows = [[float(v) for v in ln.split("\t")] for ln in lines[2:]]
        params = None
        if "gamma" in meta:
            params = FadingParams(
                float(meta["gamma"]), float(meta["sigma_shad_db"]), int(meta["seed"])
            )
        beta = np.array(rows).reshape(-1, int(meta["k_users"]))
        return cls(beta, int(meta["m_full"]), params)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> LargeScaleMatrix:
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    g_full: np.ndarray
    g_low: np.ndarray
    beta_ref: LargeScaleMatrix

    @property
    def g(self) -> np.ndarray:
        return np.vstack([self.g_full, self.g_low])


def large_scale_fading(
    distances: DistanceMatrix, params: FadingParams, per_user_shadowing: bool = False
) -> LargeScaleMatrix:
    """``beta = z * d**-gamma`` with ``10 log10 z ~ N(0, sigma_shad_db**2)``.

    With ``per_user_shadowing`` one shadowing value is drawn per user and
    shared by every head, which is what a collocated array sees.
    """
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0):
        raise ValueError("zero distance between a radio head and a user")
    rng = np.random.default_rng(params.seed)
    shape = (1, d.shape[1]) if per_user_shadowing else d.shape
    shadow_db = params.sigma_shad_db * rng.standard_normal(shape)
    beta = 10.0 ** (shadow_db / 10.0) * d ** (-params.gamma)
    m_full = getattr(distances, "m_full", d.shape[0])
    return LargeScaleMatrix(np.broadcast_to(beta, d.shape), m_full, params)


def draw_small_scale(m_rows: int, k_cols: int, seed: int) -> np.ndarray:
    """I.i.d. CN(0, 1) matrix; the same words open Monte Carlo trial 0 of ``seed``."""
    if m_rows < 1 or k_cols < 1:
        raise ValueError("dimensions must be at least 1")
    words = _rng.raw_words(_rng.stream_key(seed), 0, 2 * m_rows * k_cols)
    return _rng.complex_normals(words).reshape(m_rows, k_cols)


def compose_channel(beta: LargeScaleMatrix, h: np.ndarray) -> ChannelRealization:
    h = np.asarray(h)
    if h.shape != beta.beta.shape:
        raise ValueError(f"h has shape {h.shape}, beta has {beta.beta.shape}")
    g = h * np.sqrt(beta.beta)
    return ChannelRealization(g[: beta.m_full], g[beta.m_full :], beta)

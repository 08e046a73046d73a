"""Closed-form worst-case uplink spectral efficiency under MRC.

All powers are in the units of the received MRC output, i.e. they carry the
factor ``rho`` where the signal does. Sums over radio heads go through
``_colsum`` so they are pairwise-summed even for very tall ``beta``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, fields

import numpy as np

from .channel import LargeScaleMatrix


@dataclass(frozen=True)
class SystemConfig:
    rho: float
    alpha: float
    k_users: int
    m_full: int
    m_low: int
    bandwidth_hz: float = 10e6
    bits: int | None = None  # metadata only; alpha is authoritative

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.k_users < 1 or self.m_full < 0 or self.m_low < 0:
            raise ValueError("invalid counts")
        if self.m_full + self.m_low < 1:
            raise ValueError("need at least one radio head")

    @property
    def m_total(self) -> int:
        return self.m_full + self.m_low

    @property
    def kappa(self) -> float:
        return self.m_full / self.m_total

    @classmethod
    def for_beta(cls, beta: LargeScaleMatrix, rho: float, alpha: float, **kw) -> SystemConfig:
        return cls(rho, alpha, beta.k_users, beta.m_full, beta.m_low, **kw)

    def replace(self, **changes) -> SystemConfig:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SystemConfig(**values)


def _check(beta: LargeScaleMatrix, config: SystemConfig) -> None:
    if (beta.m_full, beta.m_low, beta.k_users) != (config.m_full, config.m_low, config.k_users):
        raise ValueError(
            f"beta partition ({beta.m_full}, {beta.m_low}, K={beta.k_users}) does not match "
            f"config ({config.m_full}, {config.m_low}, K={config.k_users})"
        )


def _sum_others(b: np.ndarray) -> np.ndarray:
    """``out[..., k] = sum_{i != k} b[..., i]`` without cancellation."""
    zero = np.zeros_like(b[..., :1])
    before = np.concatenate([zero, np.cumsum(b[..., :-1], axis=-1)], axis=-1)
    after = np.concatenate([np.cumsum(b[..., :0:-1], axis=-1)[..., ::-1], zero], axis=-1)
    return before + after


def _colsum(a: np.ndarray) -> np.ndarray:
    # numpy only sums pairwise along a contiguous last axis
    return np.ascontiguousarray(np.asarray(a).T).sum(axis=1)


@dataclass(frozen=True)
class _Sums:
    """Per-user sums over one class of radio heads."""

    lin: np.ndarray  # sum_m beta_mk
    sq: np.ndarray  # sum_m beta_mk**2
    cross: np.ndarray  # sum_m sum_{i != k} beta_mk beta_mi

    @classmethod
    def of(cls, b: np.ndarray) -> _Sums:
        others = _sum_others(b)
        return cls(_colsum(b), _colsum(b * b), _colsum(b * others))


@dataclass(frozen=True, eq=False)
class SinrBreakdown:
    """Expected powers of every MRC output term, one array entry per user."""

    fs_ls_power: np.ndarray
    fu_power: np.ndarray
    lu_power: np.ndarray
    fi_power: np.ndarray
    li_power: np.ndarray
    qn_power: np.ndarray
    n_power: np.ndarray

    TERMS = ("fs_ls", "fu", "lu", "fi", "li", "qn", "n")

    def term(self, name: str) -> np.ndarray:
        return getattr(self, f"{name}_power")

    @property
    def npi_power(self) -> np.ndarray:
        return self.fu_power + self.lu_power + self.fi_power + self.li_power + self.qn_power + self.n_power

    @property
    def sinr(self) -> np.ndarray:
        return self.fs_ls_power / self.npi_power

    def user(self, k: int) -> dict[str, float]:
        return {name: float(self.term(name)[k]) for name in self.TERMS}


def sinr_breakdown(beta: LargeScaleMatrix, config: SystemConfig) -> SinrBreakdown:
    """Closed-form term powers for every user at once."""
    _check(beta, config)
    rho, a = config.rho, config.alpha
    f, l = _Sums.of(beta.full), _Sums.of(beta.low)
    return SinrBreakdown(
        fs_ls_power=rho * (f.lin + a * l.lin) ** 2,
        fu_power=rho * f.sq,
        lu_power=a * a * rho * l.sq,
        fi_power=rho * f.cross,
        li_power=a * a * rho * l.cross,
        qn_power=a * (1.0 - a) * (l.lin + rho * l.cross + 2.0 * rho * l.sq),
        n_power=f.lin + a * a * l.lin,
    )


def sinr_components(beta: LargeScaleMatrix, config: SystemConfig, user_k: int) -> dict[str, float]:
    if not 0 <= user_k < beta.k_users:
        raise IndexError(f"user {user_k} out of range for K={beta.k_users}")
    return sinr_breakdown(beta, config).user(user_k)


@dataclass(frozen=True, eq=False)
class SEReport:
    per_user_rate: np.ndarray  # bits/s/Hz
    bandwidth_hz: float
    metadata: dict = field(default_factory=dict)

    @property
    def per_user_throughput(self) -> np.ndarray:
        return self.bandwidth_hz * self.per_user_rate

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.per_user_rate))

    def to_text(self) -> str:
        buf = io.StringIO()
        meta = " ".join(f"{k}={v!r}" for k, v in self.metadata.items())
        buf.write(f"# bandwidth_hz={self.bandwidth_hz!r} {meta}".rstrip() + "\n")
        buf.write("user_id\trate_bps_hz\tthroughput_bps\n")
        for k, (r, t) in enumerate(zip(self.per_user_rate, self.per_user_throughput)):
            buf.write(f"{k}\t{float(r)!r}\t{float(t)!r}\n")
        return buf.getvalue()


def _report(sinr: np.ndarray, config: SystemConfig, **extra) -> SEReport:
    meta = {
        "m_full": config.m_full,
        "m_low": config.m_low,
        "k_users": config.k_users,
        "bits": config.bits,
        "alpha": config.alpha,
        "rho": config.rho,
    }
    meta.update(extra)
    return SEReport(np.log2(1.0 + sinr), config.bandwidth_hz, meta)


def sinr_theorem1(beta: LargeScaleMatrix, config: SystemConfig) -> np.ndarray:
    _check(beta, config)
    a, rho = config.alpha, config.rho
    bf, bl = beta.full, beta.low
    f, l = _Sums.of(bf), _Sums.of(bl)
    num = f.lin**2 + 2 * a * f.lin * l.lin + a * a * l.lin**2
    # F-RRH sum runs over all users i, including k (FU and FI merged)
    f_all = _colsum(bf * bf.sum(axis=1, keepdims=True))
    den = f_all + (2 * a - a * a) * l.sq + a * l.cross + (f.lin + a * l.lin) / rho
    return num / den


def se_theorem1(beta: LargeScaleMatrix, config: SystemConfig) -> SEReport:
    return _report(sinr_theorem1(beta, config), config)


def se_all_low(beta: LargeScaleMatrix, config: SystemConfig) -> SEReport:
    """All heads low-resolution (``M_f = 0``)."""
    _check(beta, config)
    if config.m_full != 0:
        raise ValueError("se_all_low requires m_full == 0")
    a, rho = config.alpha, config.rho
    s = _Sums.of(beta.beta)
    j = s.sq + s.cross + s.lin / rho
    return _report(a * s.lin**2 / (j + (1 - a) * s.sq), config)


def se_all_full(beta: LargeScaleMatrix, config: SystemConfig) -> SEReport:
    """No quantization anywhere; ``alpha`` and the partition are ignored."""
    if beta.k_users != config.k_users or beta.m_total != config.m_total:
        raise ValueError("beta shape does not match config")
    s = _Sums.of(beta.beta)
    j = s.sq + s.cross + s.lin / config.rho
    return _report(s.lin**2 / j, config)


def se_colocated(beta_users, kappa: float, config: SystemConfig, m_total: int) -> SEReport:
    """Centralized array: every head sees user ``k`` through the same ``beta_k``."""
    b = np.asarray(beta_users, dtype=float)
    if np.any(b <= 0):
        raise ValueError("beta_users must be strictly positive")
    if not 0 <= kappa <= 1:
        raise ValueError("kappa must lie in [0, 1]")
    a = config.alpha
    gain = kappa + a * (1 - kappa)
    self_term = (kappa + (1 - kappa) * (2 * a - a * a)) / gain
    others = _sum_others(b)
    sinr = m_total * gain * b / (1 / config.rho + others + self_term * b)
    return _report(sinr, config, kappa=kappa)

"""Random spatial layouts of radio heads and users in a square area.

Distances are in kilometres throughout. Full-resolution radio heads are
always stored before low-resolution ones, so row ``m`` of every derived
matrix refers to the same head.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_USER_REDRAWS = 10_000

FULL = "F"
LOW = "L"
USER = "U"


class InfeasibleGuardError(RuntimeError):
    """Rejection sampling could not place a user outside every guard zone."""


@dataclass(frozen=True)
class NetworkTopology:
    area_side: float
    rrh_positions: np.ndarray  # (M, 2), full-resolution rows first
    m_full: int
    user_positions: np.ndarray  # (K, 2)
    guard_radius: float = 0.0
    rrh_tags: tuple[str, ...] = field(init=False, repr=False)

    def __post_init__(self):
        rrh = np.asarray(self.rrh_positions, dtype=float).reshape(-1, 2)
        users = np.asarray(self.user_positions, dtype=float).reshape(-1, 2)
        if not 0 <= self.m_full <= len(rrh):
            raise ValueError(f"m_full={self.m_full} outside [0, {len(rrh)}]")
        rrh.setflags(write=False)
        users.setflags(write=False)
        object.__setattr__(self, "rrh_positions", rrh)
        object.__setattr__(self, "user_positions", users)
        tags = (FULL,) * self.m_full + (LOW,) * (len(rrh) - self.m_full)
        object.__setattr__(self, "rrh_tags", tags)

    @property
    def m_low(self) -> int:
        return len(self.rrh_positions) - self.m_full

    @property
    def m_total(self) -> int:
        return len(self.rrh_positions)

    @property
    def k_users(self) -> int:
        return len(self.user_positions)

    def __eq__(self, other):
        if not isinstance(other, NetworkTopology):
            return NotImplemented
        return (
            self.area_side == other.area_side
            and self.m_full == other.m_full
            and self.guard_radius == other.guard_radius
            and np.array_equal(self.rrh_positions, other.rrh_positions)
            and np.array_equal(self.user_positions, other.user_positions)
        )

    __hash__ = None

    def check(self) -> None:
        """Raise ``ValueError`` if any layout invariant is violated."""
        pts = np.vstack([self.rrh_positions, self.user_positions])
        if np.any(pts < 0) or np.any(pts > self.area_side):
            raise ValueError("node outside the square area")
        if self.m_total and self.k_users:
            d = pairwise_distances(self)
            if d.min() < self.guard_radius:
                raise ValueError(
                    f"guard violated: min distance {d.min():.6g} < {self.guard_radius}"
                )

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# area_side_km={self.area_side!r} guard_radius_km={self.guard_radius!r}\n")
        buf.write("kind\tx_km\ty_km\n")
        for tag, (x, y) in zip(self.rrh_tags, self.rrh_positions):
            buf.write(f"{tag}\t{float(x)!r}\t{float(y)!r}\n")
        for x, y in self.user_positions:
            buf.write(f"{USER}\t{float(x)!r}\t{float(y)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> NetworkTopology:
        meta = {}
        rows = {FULL: [], LOW: [], USER: []}
        saw_header = False
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                for item in line[1:].split():
                    key, _, value = item.partition("=")
                    meta[key] = float(value)
                continue
            if not saw_header:
                saw_header = True
                continue
            kind, x, y = line.split("\t")
            rows[kind].append((float(x), float(y)))
        return cls(
            area_side=meta["area_side_km"],
            rrh_positions=np.array(rows[FULL] + rows[LOW]).reshape(-1, 2),
            m_full=len(rows[FULL]),
            user_positions=np.array(rows[USER]).reshape(-1, 2),
            guard_radius=meta.get("guard_radius_km", 0.0),
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> NetworkTopology:
        return cls.from_text(Path(path).read_text())


def generate_topology(
    area_side: float,
    m_full: int,
    m_low: int,
    k_users: int,
    guard_radius: float,
    seed: int,
    max_redraws: int = MAX_USER_REDRAWS,
) -> NetworkTopology:
    """Draw radio heads and users uniformly over ``[0, area_side]^2``.

    Heads are placed unconditionally. Each user is redrawn until it sits at
    least ``guard_radius`` from every head. Full-resolution heads, low-resolution
    heads and users come from independent child streams of ``seed``, so adding
    low-resolution heads never moves the full-resolution ones.
    """
    if area_side <= 0:
        raise ValueError("area_side must be positive")
    if m_full < 0 or m_low < 0 or m_full + m_low < 1:
        raise ValueError("need at least one radio head")
    if k_users < 1:
        raise ValueError("need at least one user")
    if not 0 <= guard_radius < area_side / 2:
        raise ValueError("guard_radius must lie in [0, area_side/2)")

    ss_full, ss_low, ss_users = np.random.SeedSequence(seed).spawn(3)
    full = np.random.default_rng(ss_full).random((m_full, 2)) * area_side
    low = np.random.default_rng(ss_low).random((m_low, 2)) * area_side
    rrh = np.vstack([full, low])

    rng = np.random.default_rng(ss_users)
    users = np.empty((k_users, 2))
    for k in range(k_users):
        for _ in range(max_redraws):
            u = rng.random(2) * area_side
            if guard_radius == 0 or np.hypot(*(rrh - u).T).min() >= guard_radius:
                users[k] = u
                break
        else:
            raise InfeasibleGuardError(
                f"user {k}: no guard-feasible position after {max_redraws} draws"
            )
    return NetworkTopology(area_side, rrh, m_full, users, guard_radius)


@dataclass(frozen=True)
class DistanceMatrix:
    """Head-to-user distances (km); rows ``[:m_full]`` are full-resolution heads."""

    values: np.ndarray
    m_full: int

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def shape(self):
        return self.values.shape

    def min(self) -> float:
        return float(self.values.min())


def pairwise_distances(topology: NetworkTopology) -> DistanceMatrix:
    """M x K Euclidean distances, rows in head order (full-resolution first)."""
    diff = topology.rrh_positions[:, None, :] - topology.user_positions[None, :, :]
    return DistanceMatrix(np.hypot(diff[..., 0], diff[..., 1]), topology.m_full)


def collocate(topology: NetworkTopology) -> NetworkTopology:
    """Move every radio head to the centre of the area (centralized array)."""
    c = topology.area_side / 2
    rrh = np.full_like(topology.rrh_positions, c)
    return NetworkTopology(
        topology.area_side, rrh, topology.m_full, topology.user_positions, topology.guard_radius
    )

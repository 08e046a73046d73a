"""Topology-plus-fading recipe shared by the experiment runner and EE search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import FadingParams, LargeScaleMatrix, large_scale_fading
from .seeds import derive_seed
from .topology import NetworkTopology, collocate, generate_topology, pairwise_distances


@dataclass(frozen=True)
class ScenarioRecipe:
    """Draws layouts and ``beta`` for a given number of L-RRHs and seed.

    The topology and the shadowing use separate seeds derived from ``seed``;
    the distributed and the collocated variants of one seed share users and
    per-user shadowing of the first head, so they can be compared pairwise.
    """

    area_side: float = 1.0
    m_full: int = 20
    k_users: int = 20
    guard_radius: float = 0.05
    gamma: float = 3.8
    sigma_shad_db: float = 8.0

    def topology(self, m_low: int, seed: int) -> NetworkTopology:
        return generate_topology(
            self.area_side, self.m_full, m_low, self.k_users, self.guard_radius,
            derive_seed(seed, 0),
        )  # fmt: skip

    def fading(self, seed: int) -> FadingParams:
        return FadingParams(self.gamma, self.sigma_shad_db, derive_seed(seed, 1))

    def beta(self, m_low: int, seed: int) -> LargeScaleMatrix:
        return large_scale_fading(pairwise_distances(self.topology(m_low, seed)), self.fading(seed))

    def collocated_beta_users(self, m_low: int, seed: int) -> np.ndarray:
        """Per-user ``beta_k`` seen by an array at the area centre."""
        topo = collocate(self.topology(m_low, seed))
        beta = large_scale_fading(pairwise_distances(topo), self.fading(seed), per_user_shadowing=True)
        return beta.beta[0].copy()

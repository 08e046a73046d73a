"""Power model, energy efficiency and the (M_l, B) grid search."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .closed_form import SystemConfig, sinr_theorem1
from .quantization import lloyd_max_alpha
from .scenario import ScenarioRecipe
from .seeds import derive_seed


@dataclass(frozen=True)
class PowerModel:
    c0: float = 1e-4  # W per 2**(2B)
    c1: float = 2.0  # W per radio head
    b_full: int = 12  # bit depth charged to full-resolution converters

    def __post_init__(self):
        if not (self.c0 > 0 and self.c1 > 0 and self.b_full >= 1):
            raise ValueError("need c0 > 0, c1 > 0 and b_full >= 1")


def power_consumption(m_count: int, bits: int, model: PowerModel) -> float:
    if bits < 1:
        raise ValueError("bits must be at least 1")
    return m_count * (model.c0 * 2.0 ** (2 * bits) + model.c1)


def energy_efficiency(sum_rate_bps_hz: float, bandwidth_hz: float, p_full: float, p_low: float) -> float:
    """Delivered bits per Joule."""
    total = p_full + p_low
    if not total > 0:
        raise ValueError("total power must be positive")
    return bandwidth_hz * sum_rate_bps_hz / total


@dataclass(frozen=True)
class GridPoint:
    m_low: int
    bits: int
    mean_throughput_bps: float
    power_w: float
    eta: float
    feasible: bool


@dataclass(eq=False)
class EEGridResult:
    points: list[GridPoint]
    threshold_bps: float

    @property
    def feasible_points(self) -> list[GridPoint]:
        return [p for p in self.points if p.feasible]

    @property
    def best(self) -> GridPoint | None:
        """Feasible point with the largest efficiency, or ``None``."""
        feasible = self.feasible_points
        return max(feasible, key=lambda p: p.eta) if feasible else None

    def at(self, m_low: int, bits: int) -> GridPoint:
        return next(p for p in self.points if p.m_low == m_low and p.bits == bits)

    def surface(self, field: str = "eta") -> tuple[list[int], list[int], np.ndarray]:
        mls = sorted({p.m_low for p in self.points})
        bs = sorted({p.bits for p in self.points})
        z = np.array([[getattr(self.at(ml, b), field) for b in bs] for ml in mls], dtype=float)
        return mls, bs, z

    def to_text(self) -> str:
        buf = io.StringIO()
        best = self.best
        buf.write(
            f"# threshold_bps={self.threshold_bps!r} best="
            + ("none" if best is None else f"m_low={best.m_low},bits={best.bits}")
            + "\n"
        )
        buf.write("m_low\tbits\tmean_throughput_bps\tpower_w\teta_bits_per_joule\tfeasible\n")
        for p in self.points:
            buf.write(
                f"{p.m_low}\t{p.bits}\t{p.mean_throughput_bps!r}\t{p.power_w!r}\t{p.eta!r}\t"
                f"{int(p.feasible)}\n"
            )
        return buf.getvalue()


def optimize_config(
    recipe: ScenarioRecipe,
    model: PowerModel,
    grid_ml,
    grid_b,
    threshold_bps: float,
    n_topologies: int,
    seed: int,
    rho: float = 10.0,
    bandwidth_hz: float = 10e6,
) -> EEGridResult:
    """Evaluate mean sum throughput, power and efficiency on the grid.

    Topology ``t`` uses the same derived seed at every grid point, so the
    surface compares configurations on common random numbers.
    """
    grid_ml, grid_b = list(grid_ml), list(grid_b)
    if not grid_ml or not grid_b:
        raise ValueError("grids must be non-empty")
    if n_topologies < 1:
        raise ValueError("n_topologies must be at least 1")

    alphas = {b: lloyd_max_alpha(b) for b in grid_b}
    p_full = power_consumption(recipe.m_full, model.b_full, model) if recipe.m_full else 0.0
    points = []
    for ml in grid_ml:
        totals = {b: 0.0 for b in grid_b}
        for t in range(n_topologies):
            beta = recipe.beta(ml, derive_seed(seed, t))
            for b in grid_b:
                cfg = SystemConfig.for_beta(beta, rho, alphas[b], bandwidth_hz=bandwidth_hz, bits=b)
                totals[b] += float(np.sum(np.log2(1.0 + sinr_theorem1(beta, cfg))))
        for b in grid_b:
            mean_rate = totals[b] / n_topologies
            throughput = bandwidth_hz * mean_rate
            p_low = power_consumption(ml, b, model)
            power = p_full + p_low
            eta = energy_efficiency(mean_rate, bandwidth_hz, p_full, p_low)
            points.append(GridPoint(ml, b, throughput, power, eta, throughput >= threshold_bps))
    return EEGridResult(points, threshold_bps)

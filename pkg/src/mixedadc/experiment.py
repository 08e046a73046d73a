"""Seeded experiment execution, CDF statistics and scenario comparison."""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import monte_carlo
from .closed_form import SystemConfig, se_colocated, se_theorem1
from .energy import PowerModel, optimize_config
from .quantization import MAX_BITS, QuantizerSpec
from .scenario import ScenarioRecipe
from .seeds import derive_seed

MODES = ("closed_form", "monte_carlo", "verify", "ee_grid", "centralized_baseline")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "default"
    mode: str = "closed_form"
    area_side_km: float = 1.0
    m_full: int = 20
    m_low: int = 80
    k_users: int = 20
    guard_radius_km: float = 0.05
    gamma: float = 3.8
    sigma_shad_db: float = 8.0
    rho_db: float = 10.0
    bits: int | str = 3  # or "full"
    bandwidth_hz: float = 10e6
    n_topologies: int = 200
    n_trials: int = 100_000
    base_seed: int = 0
    rel_tol: float = 1e-3
    ee_grid_ml: tuple[int, ...] = tuple(range(0, 101, 10))
    ee_grid_b: tuple[int, ...] = tuple(range(1, 9))
    threshold_bps: float = 100e6
    c0: float = 1e-4
    c1: float = 2.0
    b_full: int = 12

    def __post_init__(self):
        self._validate()

    def _validate(self):
        def need(ok, name, msg):
            if not ok:
                raise ConfigError(name, msg)

        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("ee_grid_ml", "ee_grid_b"):
                need(
                    isinstance(v, (list, tuple)) and len(v) > 0
                    and all(isinstance(x, int) and not isinstance(x, bool) for x in v),
                    f.name, "must be a non-empty list of integers",
                )  # fmt: skip
                object.__setattr__(self, f.name, tuple(v))
            elif f.type in ("int",):
                need(isinstance(v, int) and not isinstance(v, bool), f.name, "must be an integer")
            elif f.type in ("float",):
                need(
                    isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
                    f.name, "must be a finite number",
                )  # fmt: skip
                object.__setattr__(self, f.name, float(v))
        need(self.mode in MODES, "mode", f"must be one of {MODES}")
        need(self.area_side_km > 0, "area_side_km", "must be positive")
        need(self.m_full >= 0, "m_full", "must be >= 0")
        need(self.m_low >= 0, "m_low", "must be >= 0")
        need(self.m_full + self.m_low >= 1, "m_low", "need at least one radio head")
        need(self.k_users >= 1, "k_users", "must be >= 1")
        need(0 <= self.guard_radius_km < self.area_side_km / 2, "guard_radius_km", "must lie in [0, area/2)")
        need(self.gamma > 0, "gamma", "must be positive")
        need(self.sigma_shad_db >= 0, "sigma_shad_db", "must be >= 0")
        need(self.bandwidth_hz > 0, "bandwidth_hz", "must be positive")
        need(self.n_topologies >= 1, "n_topologies", "must be >= 1")
        need(self.n_trials >= 100, "n_trials", "must be >= 100")
        need(self.rel_tol > 0, "rel_tol", "must be positive")
        need(self.threshold_bps >= 0, "threshold_bps", "must be >= 0")
        need(self.c0 > 0 and self.c1 > 0, "c0", "power constants must be positive")
        need(self.b_full >= 1, "b_full", "must be >= 1")
        need(all(1 <= b <= MAX_BITS for b in self.ee_grid_b), "ee_grid_b", f"bits in [1, {MAX_BITS}]")
        need(all(m >= 0 for m in self.ee_grid_ml), "ee_grid_ml", "counts must be >= 0")
        try:
            QuantizerSpec.parse(self.bits)
        except (TypeError, ValueError):
            raise ConfigError("bits", f"must be an integer in [1, {MAX_BITS}] or 'full'") from None
        if isinstance(self.bits, str) and self.bits.lower() != "full":
            object.__setattr__(self, "bits", int(self.bits))

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        return cls(**data)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"{path}: not valid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError("<file>", "top level must be an object")
        return cls.from_dict(data)

    def replace(self, **changes) -> ExperimentConfig:
        d = asdict(self)
        d.update(changes)
        return ExperimentConfig(**d)

    def to_json(self) -> str:
        d = asdict(self)
        d["ee_grid_ml"] = list(self.ee_grid_ml)
        d["ee_grid_b"] = list(self.ee_grid_b)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @property
    def rho(self) -> float:
        return 10.0 ** (self.rho_db / 10.0)

    @property
    def quantizer(self) -> QuantizerSpec:
        return QuantizerSpec.parse(self.bits)

    @property
    def recipe(self) -> ScenarioRecipe:
        return ScenarioRecipe(
            self.area_side_km, self.m_full, self.k_users, self.guard_radius_km,
            self.gamma, self.sigma_shad_db,
        )  # fmt: skip

    def system(self) -> SystemConfig:
        q = self.quantizer
        return SystemConfig(
            self.rho, q.alpha, self.k_users, self.m_full, self.m_low, self.bandwidth_hz, q.bits
        )

    def topology_seed(self, t: int) -> int:
        return derive_seed(self.base_seed, t)


@dataclass(frozen=True, eq=False)
class CdfTable:
    values: np.ndarray
    levels: np.ndarray
    likely95: float  # 5th percentile, lower interpolation

    @property
    def median(self) -> float:
        return float(np.quantile(self.values, 0.5, method="lower"))

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# n={len(self.values)} likely95={self.likely95!r}\n")
        buf.write("throughput_bps\tcdf\n")
        for v, p in zip(self.values, self.levels):
            buf.write(f"{float(v)!r}\t{float(p)!r}\n")
        return buf.getvalue()


def compute_cdf(samples) -> CdfTable:
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("no samples")
    levels = np.arange(1, x.size + 1) / x.size
    return CdfTable(x, levels, float(np.quantile(x, 0.05, method="lower")))


@dataclass(eq=False)
class ThroughputRun:
    """Per-user rates for every topology draw, ``rates[t, k]`` in bits/s/Hz."""

    rates: np.ndarray
    bandwidth_hz: float
    extra: dict = field(default_factory=dict)

    @property
    def throughputs(self) -> np.ndarray:
        return self.bandwidth_hz * self.rates

    def cdf(self) -> CdfTable:
        return compute_cdf(self.throughputs)

    def to_text(self, header: str) -> str:
        buf = io.StringIO()
        buf.write(header)
        buf.write("topology\tuser_id\trate_bps_hz\tthroughput_bps\n")
        for t, (row, trow) in enumerate(zip(self.rates, self.throughputs)):
            for k, (r, v) in enumerate(zip(row, trow)):
                buf.write(f"{t}\t{k}\t{float(r)!r}\t{float(v)!r}\n")
        return buf.getvalue()


def throughput_run(config: ExperimentConfig, workers: int = 1) -> ThroughputRun:
    """Per-user rates over ``n_topologies`` seeded draws for the rate modes."""
    recipe, system = config.recipe, config.system()
    rates = np.empty((config.n_topologies, config.k_users))
    for t in range(config.n_topologies):
        seed = config.topology_seed(t)
        if config.mode == "centralized_baseline":
            b = recipe.collocated_beta_users(config.m_low, seed)
            rates[t] = se_colocated(b, system.kappa, system, system.m_total).per_user_rate
            continue
        beta = recipe.beta(config.m_low, seed)
        if config.mode == "monte_carlo":
            moments = monte_carlo.estimate_moments(
                beta, system, config.n_trials, derive_seed(seed, 2), workers
            )
            rates[t] = monte_carlo.empirical_se(moments, beta, system).per_user_rate
        else:
            rates[t] = se_theorem1(beta, system).per_user_rate
    return ThroughputRun(rates, config.bandwidth_hz)


@dataclass(eq=False)
class Comparison:
    cdf_a: CdfTable
    cdf_b: CdfTable
    ratio: float  # likely95(a) / likely95(b)

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(
            f"# likely95_a={self.cdf_a.likely95!r} likely95_b={self.cdf_b.likely95!r} "
            f"ratio={self.ratio!r}\n"
        )
        buf.write("cdf\tthroughput_a_bps\tthroughput_b_bps\n")
        n = max(len(self.cdf_a.values), len(self.cdf_b.values))
        qs = np.arange(1, n + 1) / n
        qa = np.quantile(self.cdf_a.values, qs, method="lower")
        qb = np.quantile(self.cdf_b.values, qs, method="lower")
        for q, a, b in zip(qs, qa, qb):
            buf.write(f"{float(q)!r}\t{float(a)!r}\t{float(b)!r}\n")
        return buf.getvalue()


def compare_scenarios(config_a: ExperimentConfig, config_b: ExperimentConfig, workers: int = 1) -> Comparison:
    """Paired CDFs and the ratio of 95%-likely throughputs.

    Draw ``t`` of both runs uses the seed derived from each config's
    ``base_seed``; with equal seeds the layouts are shared wherever the
    topology parameters coincide.
    """
    if config_a.k_users != config_b.k_users:
        raise ConfigError("k_users", "compared scenarios must have the same number of users")
    if config_a.bandwidth_hz != config_b.bandwidth_hz:
        raise ConfigError("bandwidth_hz", "compared scenarios must have the same bandwidth")
    for cfg in (config_a, config_b):
        if cfg.mode not in ("closed_form", "monte_carlo", "centralized_baseline"):
            raise ConfigError("mode", f"cannot compare a {cfg.mode!r} run")
    a = throughput_run(config_a, workers).cdf()
    b = throughput_run(config_b, workers).cdf()
    return Comparison(a, b, a.likely95 / b.likely95)


class VerificationFailed(RuntimeError):
    pass


def _meta_header(config: ExperimentConfig) -> str:
    system = config.system()
    return (
        f"# scenario={config.scenario} mode={config.mode} m_full={config.m_full} "
        f"m_low={config.m_low} k_users={config.k_users} bits={config.bits} "
        f"alpha={system.alpha!r} rho={system.rho!r} bandwidth_hz={config.bandwidth_hz!r} "
        f"base_seed={config.base_seed} n_topologies={config.n_topologies}\n"
    )


def run_experiment(config: ExperimentConfig, out_dir, workers: int = 1) -> dict[str, Path]:
    """Execute ``config.mode`` and write its tables into ``out_dir``.

    Returns the written paths keyed by role. A failed verification writes its
    table and then raises :class:`VerificationFailed`.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {"config": out / "resolved_config.json"}
    outputs = {"config": config.to_json()}
    failed = False

    if config.mode in ("closed_form", "monte_carlo", "centralized_baseline"):
        run = throughput_run(config, workers)
        cdf = run.cdf()
        outputs["se_report"] = run.to_text(_meta_header(config))
        outputs["cdf"] = cdf.to_text()
        written["se_report"] = out / "se_report.tsv"
        written["cdf"] = out / "cdf.tsv"
    elif config.mode == "verify":
        system = config.system()
        buf = io.StringIO()
        buf.write(_meta_header(config))
        buf.write("topology\tuser\tterm\tclosed_form\tempirical\tstd_err\tz_score\tpass\n")
        for t in range(config.n_topologies):
            seed = config.topology_seed(t)
            beta = config.recipe.beta(config.m_low, seed)
            report = monte_carlo.verify_bound(
                beta, system, config.n_trials, derive_seed(seed, 2), config.rel_tol, workers=workers
            )
            failed |= not report.passed
            for r in report.rows:
                buf.write(
                    f"{t}\t{r.user}\t{r.term}\t{r.closed_form!r}\t{r.empirical!r}\t"
                    f"{r.std_err!r}\t{r.z_score!r}\t{int(r.passed)}\n"
                )
        buf.write(f"# overall_pass={not failed}\n")
        outputs["verify"] = buf.getvalue()
        written["verify"] = out / "verify.tsv"
    elif config.mode == "ee_grid":
        result = optimize_config(
            config.recipe,
            PowerModel(config.c0, config.c1, config.b_full),
            config.ee_grid_ml,
            config.ee_grid_b,
            config.threshold_bps,
            config.n_topologies,
            config.base_seed,
            rho=config.rho,
            bandwidth_hz=config.bandwidth_hz,
        )
        outputs["ee_grid"] = result.to_text()
        written["ee_grid"] = out / "ee_grid.tsv"

    # all files are written once, after every computation has finished
    for role, text in outputs.items():
        written[role].write_text(text)
    if failed:
        raise VerificationFailed(f"term-wise verification failed; see {written['verify']}")
    return written

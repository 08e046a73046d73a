"""Uplink spectral efficiency of distributed massive MIMO with mixed-resolution ADCs."""

from .backend import DEFAULT as BACKEND
from .channel import (
    ChannelRealization,
    FadingParams,
    LargeScaleMatrix,
    compose_channel,
    draw_small_scale,
    large_scale_fading,
)
from .closed_form import (
    SEReport,
    SinrBreakdown,
    SystemConfig,
    se_all_full,
    se_all_low,
    se_colocated,
    se_theorem1,
    sinr_breakdown,
    sinr_components,
)
from .energy import EEGridResult, PowerModel, energy_efficiency, optimize_config, power_consumption
from .experiment import CdfTable, ExperimentConfig, compare_scenarios, compute_cdf, run_experiment
from .monte_carlo import (
    MomentEstimate,
    TrialSample,
    empirical_se,
    estimate_moments,
    simulate_mrc_trial,
    verify_bound,
)
from .quantization import QuantizerSpec, apply_aqnm, lloyd_max_alpha, quant_noise_cov
from .scenario import ScenarioRecipe
from .topology import NetworkTopology, collocate, generate_topology, pairwise_distances

__version__ = "0.1.0"

"""Latency-optimal power split for two-stream semantic image transmission."""

__version__ = "0.1.0"

from .channel import ChannelParams, gain_for_average_snr, mean_gain, sample_fading
from .config import LoadedConfig, SystemConfig, default_system, load_config
from .errors import (
    ConfigError,
    DomainError,
    InfeasibleError,
    InfeasibleQualityError,
    InfiniteDelayError,
    SemlatError,
)
from .optimizer import (
    OptimizationResult,
    PowerAllocation,
    baseline_single_stream,
    feasibility,
    solve,
    solve_continuous,
    solve_discrete,
)
from .quality import PRESET_TARGETS, QualityCurve, QualityRequirement, TargetSet, default_curves
from .simulator import SimSpec, SimStats, simulate_end_to_end

__all__ = [
    "ChannelParams", "ConfigError", "DomainError", "InfeasibleError", "InfeasibleQualityError",
    "InfiniteDelayError", "LoadedConfig", "OptimizationResult", "PRESET_TARGETS", "PowerAllocation",
    "QualityCurve", "QualityRequirement", "SemlatError", "SimSpec", "SimStats", "SystemConfig",
    "TargetSet", "baseline_single_stream", "default_curves", "default_system", "feasibility",
    "gain_for_average_snr", "load_config", "mean_gain", "sample_fading", "simulate_end_to_end",
    "solve", "solve_continuous", "solve_discrete",
]

"""User-subchannel swap matching for uplink NOMA/SCMA resource allocation."""

from .config import ConfigError, ScenarioConfig
from .channel import ChannelState, build_channel, hata_path_loss, place_users
from .matching import (
    InvalidSwapError,
    Matching,
    MatchingError,
    SwapSpec,
    apply_swap,
    enumerate_swap_candidates,
    init_random,
)
from .rate import PowerAllocation, RateReport, equal_power_split, evaluate, interference
from .usma import RunStats, is_swap_blocking, run

__all__ = [
    "ChannelState",
    "ConfigError",
    "InvalidSwapError",
    "Matching",
    "MatchingError",
    "PowerAllocation",
    "RateReport",
    "RunStats",
    "ScenarioConfig",
    "SwapSpec",
    "apply_swap",
    "build_channel",
    "enumerate_swap_candidates",
    "equal_power_split",
    "evaluate",
    "hata_path_loss",
    "init_random",
    "interference",
    "is_swap_blocking",
    "place_users",
    "run",
]

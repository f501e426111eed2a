"""Scenario parameters shared by every stage of the simulator."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

SWAP_MODES = ("sum-rate", "pareto")

HATA_MIN_FREQ_MHZ = 150.0
HATA_MAX_FREQ_MHZ = 1500.0


class ConfigError(ValueError):
    """Raised when a scenario parameter is out of range.

    ``field`` names the offending parameter so callers can report it.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ScenarioConfig:
    """All parameters of one uplink scenario.

    Powers are in watts, lengths in meters, the carrier in MHz. ``d_v`` caps
    the subchannels a user may hold and ``d_f`` caps the users sharing one
    subchannel. ``max_iterations=None`` resolves to ``10 * N * K`` sweeps.
    """

    n_users: int = 100
    n_subchannels: int = 10
    d_v: int = 3
    d_f: int = 5
    area_side: float = 350.0
    carrier_freq: float = 900.0
    bs_height: float = 30.0
    ms_height: float = 1.5
    user_tx_power: float = 0.2
    noise_power: float = 1e-13
    swap_epsilon: float = 1e-9
    max_iterations: int | None = None
    seed: int = 0
    fading: bool = True
    swap_mode: str = "sum-rate"
    min_user_rate: float = 0.0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        def _int(name: str) -> None:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(name, f"must be an integer, got {value!r}")

        for name in ("n_users", "n_subchannels", "d_v", "d_f", "seed"):
            _int(name)
        if self.n_users < 1:
            raise ConfigError("n_users", "must be >= 1")
        if self.n_subchannels < 1:
            raise ConfigError("n_subchannels", "must be >= 1")
        if not 1 <= self.d_v <= self.n_subchannels:
            raise ConfigError(
                "d_v", f"must lie in [1, n_subchannels={self.n_subchannels}], got {self.d_v}"
            )
        if not 1 <= self.d_f <= self.n_users:
            raise ConfigError("d_f", f"must lie in [1, n_users={self.n_users}], got {self.d_f}")
        if not self.area_side > 0:
            raise ConfigError("area_side", "must be > 0")
        if not HATA_MIN_FREQ_MHZ <= self.carrier_freq <= HATA_MAX_FREQ_MHZ:
            raise ConfigError(
                "carrier_freq",
                f"Okumura-Hata is valid for 150-1500 MHz, got {self.carrier_freq}",
            )
        if not self.bs_height > 0:
            raise ConfigError("bs_height", "must be > 0")
        if not self.ms_height > 0:
            raise ConfigError("ms_height", "must be > 0")
        if not self.user_tx_power > 0:
            raise ConfigError("user_tx_power", "must be > 0")
        if not self.noise_power > 0:
            raise ConfigError("noise_power", "must be > 0")
        if not self.swap_epsilon >= 0:
            raise ConfigError("swap_epsilon", "must be >= 0")
        if self.max_iterations is not None:
            _int("max_iterations")
            if self.max_iterations < 1:
                raise ConfigError("max_iterations", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        if self.swap_mode not in SWAP_MODES:
            raise ConfigError("swap_mode", f"must be one of {SWAP_MODES}, got {self.swap_mode!r}")
        if not self.min_user_rate >= 0:
            raise ConfigError("min_user_rate", "must be >= 0")

    @property
    def iteration_limit(self) -> int:
        if self.max_iterations is None:
            return 10 * self.n_users * self.n_subchannels
        return self.max_iterations

    def replace(self, **changes: Any) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ScenarioConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        return cls(**data)


def load_config(path: str | Path, **overrides: Any) -> ScenarioConfig:
    """Read a JSON config file; non-None ``overrides`` win over file values."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("<file>", "top level must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig.from_dict(data)

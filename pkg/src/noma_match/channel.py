"""User placement, Okumura-Hata path loss and Rayleigh block fading."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import HATA_MAX_FREQ_MHZ, HATA_MIN_FREQ_MHZ, ConfigError, ScenarioConfig

MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class ChannelState:
    """Positions of the users and the K x N matrix of linear power gains."""

    positions: np.ndarray  # (N, 2) meters
    gains: np.ndarray  # (K, N) |h_kj|^2

    @property
    def n_subchannels(self) -> int:
        return self.gains.shape[0]

    @property
    def n_users(self) -> int:
        return self.gains.shape[1]


def base_station(cfg: ScenarioConfig) -> np.ndarray:
    half = cfg.area_side / 2.0
    return np.array([half, half])


def place_users(cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Drop ``n_users`` points uniformly in the square ``[0, area_side]^2``."""
    return rng.uniform(0.0, cfg.area_side, size=(cfg.n_users, 2))


def _mobile_correction(freq_mhz: float, ms_height: float) -> float:
    # small/medium city antenna height correction a(h_m)
    log_f = np.log10(freq_mhz)
    return (1.1 * log_f - 0.7) * ms_height - (1.56 * log_f - 0.8)


def hata_path_loss(distance, cfg: ScenarioConfig):
    """Urban Okumura-Hata path loss in dB for ``distance`` in meters.

    Accepts a scalar or an array. Distances below one meter are clamped.
    """
    f = cfg.carrier_freq
    if not HATA_MIN_FREQ_MHZ <= f <= HATA_MAX_FREQ_MHZ:
        raise ConfigError("carrier_freq", f"outside the Okumura-Hata range: {f}")
    d_km = np.maximum(np.asarray(distance, dtype=float), MIN_DISTANCE_M) / 1000.0
    log_hb = np.log10(cfg.bs_height)
    loss = (
        69.55
        + 26.16 * np.log10(f)
        - 13.82 * log_hb
        - _mobile_correction(f, cfg.ms_height)
        + (44.9 - 6.55 * log_hb) * np.log10(d_km)
    )
    if np.ndim(loss) == 0:
        return float(loss)
    return loss


def gains_from_positions(
    positions: np.ndarray, cfg: ScenarioConfig, fading: np.ndarray | None = None
) -> np.ndarray:
    """Return the (K, N) gain matrix; ``fading=None`` means all-ones fading."""
    distance = np.linalg.norm(positions - base_station(cfg), axis=1)
    large_scale = 10.0 ** (-hata_path_loss(distance, cfg) / 10.0)
    gains = np.tile(large_scale, (cfg.n_subchannels, 1))
    if fading is not None:
        gains = gains * fading
    return gains


def build_channel(cfg: ScenarioConfig, rng: np.random.Generator) -> ChannelState:
    """Place users and draw one exponential (Rayleigh power) fade per (k, j).

    With ``cfg.fading`` off no fading samples are drawn and every subchannel
    sees the pure path-loss gain.
    """
    positions = place_users(cfg, rng)
    fading = None
    if cfg.fading:
        fading = rng.exponential(1.0, size=(cfg.n_subchannels, cfg.n_users))
        # an exact zero draw would break strict positivity of the gains
        fading = np.maximum(fading, np.finfo(float).tiny)
    return ChannelState(positions=positions, gains=gains_from_positions(positions, cfg, fading))

"""Equal power split, SIC interference and the sum-rate objective.

The base station decodes the users sharing a subchannel in descending gain
order (equal gains: lower index first) and cancels each decoded signal, so a
user is interfered only by the co-users decoded after it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelState
from .config import ScenarioConfig
from .matching import Matching


@dataclass(frozen=True)
class PowerAllocation:
    p: np.ndarray  # (K, N) watts


@dataclass(frozen=True)
class RateReport:
    """Spectral efficiencies in bit/s/Hz."""

    link_rate: np.ndarray  # (K, N)
    user_rate: np.ndarray  # (N,)
    sub_rate: np.ndarray  # (K,)
    sum_rate: float
    scheduled_users: int


def equal_power_split(m: Matching, cfg: ScenarioConfig) -> PowerAllocation:
    p = np.zeros((m.n_subchannels, m.n_users))
    for j, subs in enumerate(m.user_to_subs):
        if subs:
            p[sorted(subs), j] = cfg.user_tx_power / len(subs)
    return PowerAllocation(p)


def decode_order(users: Sequence[int], gains_k: Sequence[float]) -> list[int]:
    """Users of one subchannel in SIC decoding order (first decoded first)."""
    return sorted(users, key=lambda j: (-gains_k[j], j))


def subchannel_link_rates(
    users: Sequence[int],
    power: Sequence[float],
    gains_k: Sequence[float],
    noise: float,
) -> dict[int, float]:
    """Link rates of the users sharing one subchannel.

    ``power[j]`` is user j's transmit power on this subchannel and
    ``gains_k[j]`` its gain; both are indexed by user.
    """
    rates = {}
    residual = 0.0
    # walk from the last decoded user back to the first, accumulating interference
    for j in reversed(decode_order(users, gains_k)):
        rx = power[j] * gains_k[j]
        rates[j] = math.log2(1.0 + rx / (noise + residual))
        residual += rx
    return rates


def interference(
    k: int, j: int, m: Matching, pa: PowerAllocation, ch: ChannelState
) -> float:
    """Received power on subchannel ``k`` that user ``j`` still sees after SIC."""
    if not m.is_matched(k, j):
        raise ValueError(f"user {j} is not matched to subchannel {k}")
    g = ch.gains[k]
    total = 0.0
    for i in m.sub_to_users[k]:
        if i == j:
            continue
        if g[i] < g[j] or (g[i] == g[j] and i > j):
            total += pa.p[k, i] * g[i]
    return float(total)


def evaluate(
    m: Matching, pa: PowerAllocation, ch: ChannelState, cfg: ScenarioConfig
) -> RateReport:
    link = np.zeros((m.n_subchannels, m.n_users))
    sub_rate = np.zeros(m.n_subchannels)
    for k, users in enumerate(m.sub_to_users):
        if not users:
            continue
        rates = subchannel_link_rates(
            list(users), pa.p[k].tolist(), ch.gains[k].tolist(), cfg.noise_power
        )
        for j, r in rates.items():
            link[k, j] = r
        sub_rate[k] = math.fsum(rates[j] for j in sorted(rates))
    user_rate = np.array([math.fsum(link[:, j]) for j in range(m.n_users)])
    return RateReport(
        link_rate=link,
        user_rate=user_rate,
        sub_rate=sub_rate,
        sum_rate=math.fsum(sub_rate),
        scheduled_users=count_scheduled(m, user_rate, cfg.min_user_rate),
    )


def count_scheduled(m: Matching, user_rate: Sequence[float], min_user_rate: float = 0.0) -> int:
    """Users holding at least one subchannel, and, when ``min_user_rate`` > 0,
    reaching that rate."""
    return sum(
        1
        for j, subs in enumerate(m.user_to_subs)
        if subs and (min_user_rate <= 0 or user_rate[j] >= min_user_rate)
    )


def sum_rate(m: Matching, ch: ChannelState, cfg: ScenarioConfig) -> float:
    return evaluate(m, equal_power_split(m, cfg), ch, cfg).sum_rate

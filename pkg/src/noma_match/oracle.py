"""Exhaustive ground truth for tiny instances.

Nothing here reuses the USMA sweep: matchings are enumerated as F matrices,
and stability is re-checked by flipping entries of F directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .channel import ChannelState
from .config import ScenarioConfig
from .matching import Matching
from .rate import equal_power_split, evaluate

MAX_LINKS = 20


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleReport:
    n_feasible: int
    best_matching: Matching
    best_sum_rate: float
    usma_gap: float | None = None


def _guard(cfg: ScenarioConfig) -> None:
    if cfg.n_users * cfg.n_subchannels > MAX_LINKS:
        raise InstanceTooLarge(
            f"instance too large: N*K = {cfg.n_users * cfg.n_subchannels} > {MAX_LINKS}"
        )


def iter_matchings(cfg: ScenarioConfig) -> Iterator[Matching]:
    """Every K x N binary matrix meeting both degree caps, exactly once."""
    _guard(cfg)
    K, N = cfg.n_subchannels, cfg.n_users
    column_choices = [
        c for r in range(cfg.d_v + 1) for c in itertools.combinations(range(K), r)
    ]
    for cols in itertools.product(column_choices, repeat=N):
        load = [0] * K
        for subs in cols:
            for k in subs:
                load[k] += 1
        if max(load) > cfg.d_f:
            continue
        pairs = [(k, j) for j, subs in enumerate(cols) for k in subs]
        yield Matching.from_pairs(pairs, N, K, cfg.d_v, cfg.d_f)


def enumerate_matchings(cfg: ScenarioConfig) -> list[Matching]:
    return list(iter_matchings(cfg))


def _sum_rate(m: Matching, ch: ChannelState, cfg: ScenarioConfig) -> float:
    return evaluate(m, equal_power_split(m, cfg), ch, cfg).sum_rate


def optimal(
    ch: ChannelState, cfg: ScenarioConfig, usma_sum_rate: float | None = None
) -> OracleReport:
    """Best equal-split matching; ties go to the first in enumeration order."""
    count = 0
    best, best_rate = None, -np.inf
    for m in iter_matchings(cfg):
        count += 1
        r = _sum_rate(m, ch, cfg)
        if r > best_rate:
            best, best_rate = m, r
    gap = None
    if usma_sum_rate is not None:
        gap = (best_rate - usma_sum_rate) / best_rate if best_rate > 0 else 0.0
    return OracleReport(count, best, best_rate, gap)


def certify_stable(m: Matching, ch: ChannelState, cfg: ScenarioConfig) -> bool:
    """True iff no pair of users can make a blocking one-for-one exchange."""
    f = m.to_array()
    base = evaluate(m, equal_power_split(m, cfg), ch, cfg)
    K, N = f.shape
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            for p in range(K):
                for q in range(K):
                    if p == q:
                        continue
                    if not (f[p, i] and f[q, j] and not f[q, i] and not f[p, j]):
                        continue
                    g = f.copy()
                    g[p, i], g[q, j], g[q, i], g[p, j] = 0, 0, 1, 1
                    other = Matching.from_array(g, m.d_v, m.d_f)
                    rep = evaluate(other, equal_power_split(other, cfg), ch, cfg)
                    if _blocks(cfg, base, rep, i, j, p, q):
                        return False
    return True


def _blocks(cfg, before, after, i, j, p, q) -> bool:
    eps = cfg.swap_epsilon
    if cfg.swap_mode == "sum-rate":
        return after.sum_rate - before.sum_rate > eps
    deltas = [
        after.user_rate[i] - before.user_rate[i],
        after.user_rate[j] - before.user_rate[j],
        after.sub_rate[p] - before.sub_rate[p],
        after.sub_rate[q] - before.sub_rate[q],
    ]
    return min(deltas) >= 0.0 and max(deltas) > eps

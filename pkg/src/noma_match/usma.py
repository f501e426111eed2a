"""User-subchannel swap matching (USMA).

Start from a random degree-feasible matching with equal power split, then
repeatedly scan the swap candidates in canonical order, execute the first
swap-blocking one and rescan, until a full scan finds none.

Two acceptance rules are available through ``ScenarioConfig.swap_mode``:

``"sum-rate"``
    the swap raises the total sum-rate by more than ``swap_epsilon``. The
    sum-rate is a strictly increasing potential, so runs always terminate.
``"pareto"``
    none of the four players involved (both users, both subchannels) loses
    utility and at least one gains more than ``swap_epsilon``. User utility
    is the user's rate, subchannel utility the subchannel's rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelState
from .config import ScenarioConfig
from .matching import Matching, SwapSpec, apply_swap, check_swap, init_random, iter_swap_candidates
from .rate import RateReport, equal_power_split, evaluate, subchannel_link_rates


@dataclass
class RunStats:
    iterations: int
    swaps_executed: int
    sum_rate_trajectory: list[float]
    converged: bool
    final_report: RateReport
    initial_sum_rate: float
    initial_scheduled: int
    swaps: list[SwapSpec] = field(default_factory=list, repr=False)


def _utilities(m: Matching, ch: ChannelState, cfg: ScenarioConfig, s: SwapSpec):
    rep = evaluate(m, equal_power_split(m, cfg), ch, cfg)
    return (
        rep.sum_rate,
        (
            rep.user_rate[s.user_i],
            rep.user_rate[s.user_j],
            rep.sub_rate[s.sub_p],
            rep.sub_rate[s.sub_q],
        ),
    )


def _accept(mode: str, eps: float, old_total, new_total, old_players, new_players) -> bool:
    if mode == "sum-rate":
        return new_total - old_total > eps
    gains = [new - old for old, new in zip(old_players, new_players)]
    return all(g >= 0.0 for g in gains) and any(g > eps for g in gains)


def is_swap_blocking(s: SwapSpec, m: Matching, ch: ChannelState, cfg: ScenarioConfig) -> bool:
    """Whether executing ``s`` on ``m`` is approved by the configured rule.

    Both matchings are evaluated from scratch, powers re-split equally.
    """
    check_swap(m, s)
    old_total, old_players = _utilities(m, ch, cfg, s)
    new_total, new_players = _utilities(apply_swap(m, s), ch, cfg, s)
    return _accept(cfg.swap_mode, cfg.swap_epsilon, old_total, new_total, old_players, new_players)


class _SwapEvaluator:
    """Incremental twin of :func:`is_swap_blocking` for the main loop.

    Swaps keep every degree, hence every transmit power, fixed for the whole
    run, and only touch the two subchannels involved. Per-subchannel results
    are memoised on the user set; the arithmetic is the same as
    :func:`~noma_match.rate.evaluate`, so decisions agree bit for bit.
    """

    def __init__(self, m: Matching, ch: ChannelState, cfg: ScenarioConfig):
        self.cfg = cfg
        self.gains = ch.gains.tolist()
        self.power = [
            cfg.user_tx_power / len(subs) if subs else 0.0 for subs in m.user_to_subs
        ]
        self._memo: dict[tuple[int, frozenset], tuple[dict[int, float], float]] = {}
        self.sub_rates = [self._sub(k, users)[1] for k, users in enumerate(m.sub_to_users)]
        self.total = math.fsum(self.sub_rates)

    def _sub(self, k: int, users: frozenset) -> tuple[dict[int, float], float]:
        key = (k, users)
        hit = self._memo.get(key)
        if hit is None:
            links = subchannel_link_rates(users, self.power, self.gains[k], self.cfg.noise_power)
            hit = (links, math.fsum(links[j] for j in sorted(links)))
            self._memo[key] = hit
        return hit

    def propose(self, m: Matching, s: SwapSpec) -> tuple[bool, float, list[float]]:
        i, p, j, q = s.user_i, s.sub_p, s.user_j, s.sub_q
        new_p = (m.sub_to_users[p] - {i}) | {j}
        new_q = (m.sub_to_users[q] - {j}) | {i}
        links_p, rate_p = self._sub(p, new_p)
        links_q, rate_q = self._sub(q, new_q)
        rates = list(self.sub_rates)
        rates[p] = rate_p
        rates[q] = rate_q
        new_total = math.fsum(rates)
        if self.cfg.swap_mode == "sum-rate":
            ok = new_total - self.total > self.cfg.swap_epsilon
        else:
            old_players = (
                self._user(m.user_to_subs[i], m.sub_to_users, i, {}),
                self._user(m.user_to_subs[j], m.sub_to_users, j, {}),
                self.sub_rates[p],
                self.sub_rates[q],
            )
            changed = {p: links_p, q: links_q}
            new_players = (
                self._user((m.user_to_subs[i] - {p}) | {q}, m.sub_to_users, i, changed),
                self._user((m.user_to_subs[j] - {q}) | {p}, m.sub_to_users, j, changed),
                rate_p,
                rate_q,
            )
            ok = _accept("pareto", self.cfg.swap_epsilon, 0.0, 0.0, old_players, new_players)
        return ok, new_total, rates

    def _user(self, subs, sub_to_users, j: int, changed: dict[int, dict[int, float]]) -> float:
        vals = []
        for k in sorted(subs):
            links = changed[k] if k in changed else self._sub(k, sub_to_users[k])[0]
            vals.append(links[j])
        return math.fsum(vals)

    def commit(self, new_total: float, rates: list[float]) -> None:
        self.sub_rates = rates
        self.total = new_total


def run(
    ch: ChannelState,
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    initial: Matching | None = None,
) -> tuple[Matching, RunStats]:
    """Run USMA to a swap-stable matching or until ``cfg.iteration_limit`` sweeps.

    ``initial`` overrides the random starting matching (no draws are made from
    ``rng`` then). Every sweep, completed or cut short by a swap, counts as one
    iteration.
    """
    if ch.gains.shape != (cfg.n_subchannels, cfg.n_users):
        raise ValueError(
            f"channel shape {ch.gains.shape} does not match (K, N)="
            f"({cfg.n_subchannels}, {cfg.n_users})"
        )
    m = init_random(cfg, rng) if initial is None else initial
    start = evaluate(m, equal_power_split(m, cfg), ch, cfg)
    ev = _SwapEvaluator(m, ch, cfg)

    iterations = 0
    executed: list[SwapSpec] = []
    trajectory: list[float] = []
    converged = False
    while iterations < cfg.iteration_limit:
        iterations += 1
        for s in iter_swap_candidates(m):
            ok, new_total, rates = ev.propose(m, s)
            if ok:
                m = apply_swap(m, s)
                ev.commit(new_total, rates)
                executed.append(s)
                trajectory.append(new_total)
                break
        else:
            converged = True
            break

    final = evaluate(m, equal_power_split(m, cfg), ch, cfg)
    stats = RunStats(
        iterations=iterations,
        swaps_executed=len(executed),
        sum_rate_trajectory=trajectory,
        converged=converged,
        final_report=final,
        initial_sum_rate=start.sum_rate,
        initial_scheduled=start.scheduled_users,
        swaps=executed,
    )
    return m, stats

"""Randomised invariant suite on tiny instances, checked against the oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .channel import build_channel
from .config import ScenarioConfig
from .matching import Matching, MatchingError, apply_swap, enumerate_swap_candidates, init_random
from .usma import run

GAP_SLACK = 1e-12


def random_tiny_config(
    rng: np.random.Generator,
    max_users: int = 6,
    max_subchannels: int = 3,
    max_d: int = 2,
    swap_mode: str = "sum-rate",
) -> ScenarioConfig:
    n = int(rng.integers(1, max_users + 1))
    k = int(rng.integers(1, max_subchannels + 1))
    return ScenarioConfig(
        n_users=n,
        n_subchannels=k,
        d_v=int(rng.integers(1, min(max_d, k) + 1)),
        d_f=int(rng.integers(1, min(max_d, n) + 1)),
        seed=int(rng.integers(0, 2**63)),
        swap_mode=swap_mode,
    )


def matching_violations(m: Matching) -> list[str]:
    """Re-derive the Matching invariants from scratch (the constructor also checks)."""
    out = []
    for j, subs in enumerate(m.user_to_subs):
        if len(subs) > m.d_v:
            out.append(f"user {j} degree {len(subs)} > d_v")
        for k in subs:
            if j not in m.sub_to_users[k]:
                out.append(f"({k},{j}) missing from subchannel view")
    for k, users in enumerate(m.sub_to_users):
        if len(users) > m.d_f:
            out.append(f"subchannel {k} degree {len(users)} > d_f")
        for j in users:
            if k not in m.user_to_subs[j]:
                out.append(f"({k},{j}) missing from user view")
    return out


@dataclass
class SuiteResult:
    instances: int = 0
    converged: int = 0
    swaps: int = 0
    gaps: list[float] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def mean_gap(self) -> float:
        return math.fsum(self.gaps) / len(self.gaps) if self.gaps else 0.0

    @property
    def max_gap(self) -> float:
        return max(self.gaps) if self.gaps else 0.0


def check_instance(cfg: ScenarioConfig, result: SuiteResult, with_oracle: bool = True) -> None:
    rng = np.random.default_rng(cfg.seed)
    ch = build_channel(cfg, rng)
    m, stats = run(ch, cfg, rng)
    tag = f"[N={cfg.n_users} K={cfg.n_subchannels} d_v={cfg.d_v} d_f={cfg.d_f} seed={cfg.seed}]"
    result.instances += 1
    result.swaps += stats.swaps_executed

    result.violations.extend(f"{tag} {v}" for v in matching_violations(m))
    final = stats.final_report.sum_rate
    if final < stats.initial_sum_rate:
        result.violations.append(f"{tag} final sum-rate below initial")
    if cfg.swap_mode == "sum-rate":
        prev = stats.initial_sum_rate
        for step, value in enumerate(stats.sum_rate_trajectory):
            if not value - prev > cfg.swap_epsilon:
                result.violations.append(f"{tag} swap {step} did not raise sum-rate by > eps")
            prev = value
        if not stats.converged:
            result.violations.append(f"{tag} did not converge")
    if stats.converged:
        result.converged += 1
        if not oracle.certify_stable(m, ch, cfg):
            result.violations.append(f"{tag} converged matching is not swap-stable")
    if with_oracle:
        rep = oracle.optimal(ch, cfg, usma_sum_rate=final)
        if final > rep.best_sum_rate + GAP_SLACK:
            result.violations.append(f"{tag} USMA beats the exhaustive optimum")
        result.gaps.append(rep.usma_gap)


def fuzz_swaps(rng: np.random.Generator, n_swaps: int, result: SuiteResult) -> None:
    """Random walks of swaps from random starts; every step re-checks invariants."""
    done = 0
    while done < n_swaps:
        cfg = random_tiny_config(rng, max_users=8, max_subchannels=5, max_d=3)
        m = init_random(cfg, rng)
        degrees = (m.user_degrees(), m.sub_degrees())
        for _ in range(200):
            cands = enumerate_swap_candidates(m)
            if not cands:
                break
            try:
                m = apply_swap(m, cands[int(rng.integers(len(cands)))])
            except MatchingError as exc:
                result.violations.append(f"fuzz: {exc}")
                return
            result.violations.extend(f"fuzz: {v}" for v in matching_violations(m))
            if (m.user_degrees(), m.sub_degrees()) != degrees:
                result.violations.append("fuzz: degrees changed under a swap")
            done += 1


def run_suite(
    n_instances: int, seed: int, with_oracle: bool = True, fuzz: int = 0
) -> SuiteResult:
    rng = np.random.default_rng(seed)
    result = SuiteResult()
    for t in range(n_instances):
        mode = "pareto" if t % 4 == 3 else "sum-rate"
        check_instance(random_tiny_config(rng, swap_mode=mode), result, with_oracle)
    if fuzz:
        fuzz_swaps(rng, fuzz, result)
    return result


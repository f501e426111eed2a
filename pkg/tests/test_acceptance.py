"""Exit criteria for the package, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists a
PASS/FAIL line for each criterion.
"""

import math
import time
from dataclasses import dataclass

import numpy as np
import pytest

from conftest import make_channel
from noma_match import harness, oracle
from noma_match.channel import build_channel, hata_path_loss
from noma_match.cli import main
from noma_match.config import ScenarioConfig
from noma_match.matching import Matching, MatchingError, apply_swap, enumerate_swap_candidates, init_random
from noma_match.rate import equal_power_split, evaluate
from noma_match.usma import run

TINY_INSTANCES = 1000
PARETO_INSTANCES = 250
FUZZ_SWAPS = 100_000
GAP_SLACK = 1e-12
STABILITY_BUDGET_S = 60.0
SWEEP_BUDGET_S = 300.0
TREND_NOISE = 0.5
CAPACITY = 10 * 5


@dataclass
class TinyRun:
    cfg: ScenarioConfig
    converged: bool
    stable: bool
    initial: float
    final: float
    trajectory: list
    optimum: float
    gap: float


def tiny_config(rng, mode):
    n = int(rng.integers(1, 7))
    k = int(rng.integers(1, 4))
    return ScenarioConfig(
        n_users=n,
        n_subchannels=k,
        d_v=int(rng.integers(1, min(2, k) + 1)),
        d_f=int(rng.integers(1, min(2, n) + 1)),
        seed=int(rng.integers(0, 2**63)),
        swap_mode=mode,
    )


@pytest.fixture(scope="module")
def tiny_runs():
    rng = np.random.default_rng(20240611)
    runs = []
    start = time.perf_counter()
    modes = ["sum-rate"] * TINY_INSTANCES + ["pareto"] * PARETO_INSTANCES
    for mode in modes:
        cfg = tiny_config(rng, mode)
        r = np.random.default_rng(cfg.seed)
        ch = build_channel(cfg, r)
        m, stats = run(ch, cfg, r)
        stable = oracle.certify_stable(m, ch, cfg) if stats.converged else False
        rep = oracle.optimal(ch, cfg, usma_sum_rate=stats.final_report.sum_rate)
        runs.append(
            TinyRun(cfg, stats.converged, stable, stats.initial_sum_rate, stats.final_report.sum_rate,
                    stats.sum_rate_trajectory, rep.best_sum_rate, rep.usma_gap)
        )
    return runs, time.perf_counter() - start


def test_1_stability_suite(tiny_runs, acceptance_line):
    runs, elapsed = tiny_runs
    converged = [r for r in runs if r.converged]
    unstable = [r.cfg for r in converged if not r.stable]
    sum_rate_runs = [r for r in runs if r.cfg.swap_mode == "sum-rate"]
    ok = (
        len(sum_rate_runs) >= 1000
        and not unstable
        and all(r.converged for r in sum_rate_runs)
        and elapsed < STABILITY_BUDGET_S
    )
    acceptance_line(
        1, "stability suite", ok,
        f"{len(converged)}/{len(runs)} converged, {len(unstable)} not certified stable, {elapsed:.1f}s",
    )
    assert ok


def test_2_monotone_improvement(tiny_runs, acceptance_line):
    runs, _ = tiny_runs
    swaps = violations = 0
    for r in runs:
        if r.cfg.swap_mode != "sum-rate":
            continue
        prev = r.initial
        for value in r.trajectory:
            swaps += 1
            if not value - prev > r.cfg.swap_epsilon:
                violations += 1
            prev = value
    ok = violations == 0 and swaps > 0
    acceptance_line(2, "monotone improvement", ok, f"{swaps} swaps, {violations} violations")
    assert ok


def test_3_oracle_gap(tiny_runs, acceptance_line):
    runs, _ = tiny_runs
    above_opt = [r.cfg for r in runs if r.final > r.optimum + GAP_SLACK]
    below_init = [r.cfg for r in runs if r.final < r.initial]
    gaps = [r.gap for r in runs]
    mean_gap, max_gap = math.fsum(gaps) / len(gaps), max(gaps)
    ok = not above_opt and not below_init and math.isfinite(mean_gap)
    acceptance_line(
        3, "oracle gap", ok,
        f"mean gap {mean_gap:.4f}, max gap {max_gap:.4f}, {len(above_opt)} above optimum, "
        f"{len(below_init)} below initial",
    )
    assert ok


def test_4_swap_fuzzing(acceptance_line):
    rng = np.random.default_rng(4)
    swaps = bad = 0
    while swaps < FUZZ_SWAPS:
        n, k = int(rng.integers(2, 9)), int(rng.integers(2, 6))
        cfg = ScenarioConfig(n_users=n, n_subchannels=k, d_v=int(rng.integers(1, k + 1)),
                             d_f=int(rng.integers(1, n + 1)))
        m = init_random(cfg, rng)
        user_deg, sub_deg = m.user_degrees(), m.sub_degrees()
        for _ in range(100):
            cands = enumerate_swap_candidates(m)
            if not cands:
                break
            try:
                m = apply_swap(m, cands[int(rng.integers(len(cands)))])
            except MatchingError:
                bad += 1
                break
            swaps += 1
            f = m.to_array()
            consistent = all(
                (k_ in m.user_to_subs[j]) == (j in m.sub_to_users[k_]) == bool(f[k_, j])
                for k_ in range(k) for j in range(n)
            )
            if not (consistent and f.sum(axis=0).max() <= cfg.d_v and f.sum(axis=1).max() <= cfg.d_f
                    and m.user_degrees() == user_deg and m.sub_degrees() == sub_deg):
                bad += 1
    ok = bad == 0 and swaps >= FUZZ_SWAPS
    acceptance_line(4, "degree/consistency fuzzing", ok, f"{swaps} swaps, {bad} violations")
    assert ok


def test_5_scheduled_users_trend(acceptance_line):
    start = time.perf_counter()
    result = harness.sweep(ScenarioConfig(seed=2024), n_values=list(range(10, 101, 10)), trials=50)
    elapsed = time.perf_counter() - start
    avg = [row.sched_avg for row in result.rows]
    drops = [a - b for a, b in zip(avg, avg[1:]) if b < a]
    ok = (
        all(d <= TREND_NOISE for d in drops)
        and all(row.sched_max <= CAPACITY for row in result.rows)
        and all(t.scheduled <= CAPACITY for t in result.trials)
        and elapsed < SWEEP_BUDGET_S
    )
    acceptance_line(
        5, "scheduled-users trend", ok,
        "avg " + " ".join(f"{a:.2f}" for a in avg) + f", max drop {max(drops, default=0.0):.2f}, {elapsed:.1f}s",
    )
    assert ok


def test_6_rate_formula(acceptance_line):
    # unit SNR, no interference
    cfg = ScenarioConfig(n_users=1, n_subchannels=1, d_v=1, d_f=1, user_tx_power=1.0, noise_power=1e-13)
    m = Matching.from_pairs([(0, 0)], 1, 1, 1, 1)
    unit = evaluate(m, equal_power_split(m, cfg), make_channel([[1e-13]]), cfg).link_rate[0, 0]
    unit_ok = abs(unit - 1.0) <= 1e-12

    rng = np.random.default_rng(6)
    worst_scale = 0.0
    mono_fail = 0
    for t in range(10_000):
        n, k = int(rng.integers(2, 7)), int(rng.integers(1, 4))
        cfg = ScenarioConfig(n_users=n, n_subchannels=k, d_v=int(rng.integers(1, k + 1)),
                             d_f=int(rng.integers(2, n + 1)))
        m = init_random(cfg, rng)
        ch = make_channel(rng.exponential(1e-11, size=(k, n)))
        rep = evaluate(m, equal_power_split(m, cfg), ch, cfg)

        if t < 1000:
            c = 10.0 ** rng.uniform(-6, 6)
            scaled_cfg = cfg.replace(noise_power=cfg.noise_power * c)
            scaled = evaluate(m, equal_power_split(m, scaled_cfg), make_channel(ch.gains * c), scaled_cfg)
            mask = rep.link_rate > 0
            if mask.any():
                rel = np.abs(scaled.link_rate[mask] - rep.link_rate[mask]) / rep.link_rate[mask]
                worst_scale = max(worst_scale, float(rel.max()))

        pairs = m.pairs()
        if not pairs:
            continue
        kk, jj = pairs[int(rng.integers(len(pairs)))]
        reduced = Matching.from_pairs([p for p in pairs if p != (kk, jj)], n, k, cfg.d_v, cfg.d_f)
        after = evaluate(reduced, equal_power_split(reduced, cfg), ch, cfg)
        for j in m.sub_to_users[kk] - {jj}:
            if after.link_rate[kk, j] < rep.link_rate[kk, j]:
                mono_fail += 1

    ok = unit_ok and worst_scale <= 1e-9 and mono_fail == 0
    acceptance_line(
        6, "rate formula", ok,
        f"unit-SNR error {abs(unit - 1.0):.1e}, worst scaling rel err {worst_scale:.1e}, "
        f"{mono_fail} monotonicity violations",
    )
    assert ok


def test_7_determinism(tmp_path, acceptance_line):
    args = ["sweep", "--seed", "777", "--trials", "5", "--no-chart"]
    outputs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 4)):
        out = tmp_path / tag
        assert main(args + ["--workers", str(workers), "--out", str(out)]) == 0
        outputs.append(((out / "summary.csv").read_bytes(), (out / "trials.csv").read_bytes()))
    ok = outputs[0] == outputs[1] == outputs[2]
    acceptance_line(7, "determinism", ok, "2 serial runs and a 4-worker run compared byte for byte")
    assert ok


def test_8_hata_spot_check(acceptance_line):
    # hand evaluation of the urban formula at the documented defaults, d = 350 m
    f, hb, hm, d_km = 900.0, 30.0, 1.5, 0.35
    log_f, log_hb = math.log10(f), math.log10(hb)
    a_hm = (1.1 * log_f - 0.7) * hm - (1.56 * log_f - 0.8)
    hand = 69.55 + 26.16 * log_f - 13.82 * log_hb - a_hm + (44.9 - 6.55 * log_hb) * math.log10(d_km)
    got = hata_path_loss(350.0, ScenarioConfig())
    ok = abs(got - hand) <= 0.01 and abs(got - 110.343149) <= 0.01
    acceptance_line(8, "HATA spot check", ok, f"{got:.4f} dB vs hand {hand:.4f} dB")
    assert ok

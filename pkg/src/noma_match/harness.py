"""Seeded Monte Carlo experiments: single scenarios, N sweeps, CSV and chart output."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel import ChannelState, build_channel
from .config import ScenarioConfig
from .matching import Matching
from .rate import equal_power_split, evaluate
from .usma import RunStats, run

log = logging.getLogger(__name__)

SUMMARY_HEADER = (
    "n_users,trials,sched_min,sched_avg,sched_max,rate_min,rate_avg,rate_max,"
    "avg_swaps,avg_iters,converged_frac"
)
DEFAULT_N_VALUES = tuple(range(10, 101, 10))


def derive_seed(base_seed: int, n_users: int, trial: int) -> int:
    """Per-trial 64-bit seed, independent of execution order."""
    ss = np.random.SeedSequence([base_seed, n_users, trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_scenario(cfg: ScenarioConfig) -> tuple[Matching, RunStats]:
    m, stats, _ = _run_with_channel(cfg)
    return m, stats


def _run_with_channel(cfg: ScenarioConfig) -> tuple[Matching, RunStats, ChannelState]:
    rng = np.random.default_rng(cfg.seed)
    ch = build_channel(cfg, rng)
    m, stats = run(ch, cfg, rng)
    return m, stats, ch


def ofdma_baseline(ch: ChannelState, cfg: ScenarioConfig) -> Matching:
    """One user per subchannel and one subchannel per user, greedy by gain.

    Stand-in for an orthogonal (OFDMA-like) allocation to compare against.
    """
    K, N = ch.gains.shape
    order = np.argsort(-ch.gains, axis=None, kind="stable")
    used_sub, used_user, pairs = set(), set(), []
    for flat in order.tolist():
        k, j = divmod(flat, N)
        if k in used_sub or j in used_user:
            continue
        used_sub.add(k)
        used_user.add(j)
        pairs.append((k, j))
        if len(pairs) == min(K, N):
            break
    return Matching.from_pairs(pairs, N, K, 1, 1)


@dataclass(frozen=True)
class TrialRecord:
    n_users: int
    trial: int
    seed: int
    scheduled: int
    sum_rate: float
    initial_scheduled: int
    initial_sum_rate: float
    ofdma_scheduled: int
    ofdma_sum_rate: float
    swaps: int
    iterations: int
    converged: bool


def run_trial(cfg: ScenarioConfig, trial: int = 0) -> TrialRecord:
    m, stats, ch = _run_with_channel(cfg)
    base = ofdma_baseline(ch, cfg)
    base_cfg = cfg.replace(d_v=1, d_f=1)
    base_rep = evaluate(base, equal_power_split(base, base_cfg), ch, base_cfg)
    return TrialRecord(
        n_users=cfg.n_users,
        trial=trial,
        seed=cfg.seed,
        scheduled=stats.final_report.scheduled_users,
        sum_rate=stats.final_report.sum_rate,
        initial_scheduled=stats.initial_scheduled,
        initial_sum_rate=stats.initial_sum_rate,
        ofdma_scheduled=base_rep.scheduled_users,
        ofdma_sum_rate=base_rep.sum_rate,
        swaps=stats.swaps_executed,
        iterations=stats.iterations,
        converged=stats.converged,
    )


def _trial_task(args: tuple[ScenarioConfig, int]) -> TrialRecord:
    cfg, trial = args
    return run_trial(cfg, trial)


@dataclass(frozen=True)
class SweepRow:
    n_users: int
    trials: int
    sched_min: int
    sched_avg: float
    sched_max: int
    rate_min: float
    rate_avg: float
    rate_max: float
    avg_swaps: float
    avg_iters: float
    converged_frac: float


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    trials: list[TrialRecord]


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def aggregate(records: Sequence[TrialRecord]) -> list[SweepRow]:
    """Min/avg/max per N, in ascending N. Pure function of the raw records."""
    by_n: dict[int, list[TrialRecord]] = {}
    for r in records:
        by_n.setdefault(r.n_users, []).append(r)
    rows = []
    for n in sorted(by_n):
        group = sorted(by_n[n], key=lambda r: r.trial)
        sched = [r.scheduled for r in group]
        rates = [r.sum_rate for r in group]
        rows.append(
            SweepRow(
                n_users=n,
                trials=len(group),
                sched_min=min(sched),
                sched_avg=_mean(sched),
                sched_max=max(sched),
                rate_min=min(rates),
                rate_avg=_mean(rates),
                rate_max=max(rates),
                avg_swaps=_mean([r.swaps for r in group]),
                avg_iters=_mean([r.iterations for r in group]),
                converged_frac=_mean([1.0 if r.converged else 0.0 for r in group]),
            )
        )
    return rows


def sweep(
    base_cfg: ScenarioConfig,
    n_values: Sequence[int] = DEFAULT_N_VALUES,
    trials: int = 50,
    workers: int = 1,
) -> SweepResult:
    """Run ``trials`` seeded scenarios for every N in ``n_values``.

    Trial seeds come from :func:`derive_seed`, so the result does not depend
    on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tasks = []
    for n in n_values:
        # keep d_f feasible for small N
        cfg_n = base_cfg.replace(n_users=n, d_f=min(base_cfg.d_f, n))
        for t in range(trials):
            tasks.append((cfg_n.replace(seed=derive_seed(base_cfg.seed, n, t)), t))
    log.info("sweep: %d scenarios on %d worker(s)", len(tasks), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_trial_task, tasks, chunksize=8))
    else:
        records = [_trial_task(task) for task in tasks]
    return SweepResult(rows=aggregate(records), trials=records)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6f}"


def summary_csv(rows: Sequence[SweepRow]) -> str:
    lines = [SUMMARY_HEADER]
    for row in rows:
        lines.append(",".join(_fmt(getattr(row, f.name)) for f in fields(SweepRow)))
    return "\n".join(lines) + "\n"


def trials_csv(records: Sequence[TrialRecord]) -> str:
    """Raw per-trial rows; floats use ``repr`` so they parse back exactly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in fields(TrialRecord)]
    writer.writerow(names)
    for r in records:
        row = []
        for name in names:
            v = getattr(r, name)
            row.append(repr(v) if isinstance(v, float) else _fmt(v))
        writer.writerow(row)
    return buf.getvalue()


def read_trials_csv(text: str) -> list[TrialRecord]:
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for raw in reader:
        values = {}
        for f in fields(TrialRecord):
            s = raw[f.name]
            if f.type in ("float", float):
                values[f.name] = float(s)
            elif f.type in ("bool", bool):
                values[f.name] = s == "1"
            else:
                values[f.name] = int(s)
        out.append(TrialRecord(**values))
    return out


def plot_sweep(result: SweepResult, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "noma-match"
    rows = result.rows
    n = [r.n_users for r in rows]
    by_n: dict[int, list[TrialRecord]] = {}
    for r in result.trials:
        by_n.setdefault(r.n_users, []).append(r)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
    ax1.plot(n, [r.sched_max for r in rows], "^-", label="maximum")
    ax1.plot(n, [r.sched_avg for r in rows], "o-", label="average")
    ax1.plot(n, [r.sched_min for r in rows], "v-", label="minimum")
    ax1.set_xlabel("number of users")
    ax1.set_ylabel("scheduled users")
    ax1.grid(True, alpha=0.3)
    ax1.legend()

    ax2.plot(n, [r.rate_avg for r in rows], "o-", label="USMA")
    ax2.plot(n, [_mean([t.initial_sum_rate for t in by_n[k]]) for k in n], "s--", label="initial random")
    ax2.plot(n, [_mean([t.ofdma_sum_rate for t in by_n[k]]) for k in n], "d:", label="OFDMA greedy")
    ax2.set_xlabel("number of users")
    ax2.set_ylabel("sum rate (bit/s/Hz)")
    ax2.grid(True, alpha=0.3)
    ax2.legend()

    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit(result: SweepResult, out_dir: str | Path, chart: bool = True) -> list[Path]:
    """Write ``summary.csv``, ``trials.csv`` and optionally ``sweep.svg``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (("summary.csv", summary_csv(result.rows)), ("trials.csv", trials_csv(result.trials))):
        path = out / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    if chart:
        path = out / "sweep.svg"
        plot_sweep(result, path)
        written.append(path)
    return written


def report_dict(stats: RunStats) -> dict:
    rep = stats.final_report
    return {
        "sum_rate": rep.sum_rate,
        "scheduled_users": rep.scheduled_users,
        "user_rate": rep.user_rate.tolist(),
        "sub_rate": rep.sub_rate.tolist(),
        "iterations": stats.iterations,
        "swaps_executed": stats.swaps_executed,
        "converged": stats.converged,
        "initial_sum_rate": stats.initial_sum_rate,
        "initial_scheduled": stats.initial_scheduled,
        "sum_rate_trajectory": stats.sum_rate_trajectory,
    }


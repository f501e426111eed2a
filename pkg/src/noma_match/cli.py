"""Command line entry point: ``noma-match run|sweep|oracle|check``.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 invariant
violation reported by ``check``.
"""

from __future__ import annotations

import json
import logging
import os
import sys

import click
import numpy as np

from . import checks, harness, oracle
from .channel import build_channel
from .config import ConfigError, ScenarioConfig, load_config
from .usma import run as run_usma

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3


class InvariantViolation(Exception):
    pass


def scenario_options(fn):
    """Per-field overrides shared by every subcommand."""
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), help="JSON scenario file."),
        click.option("--n-users", type=int),
        click.option("--n-subchannels", type=int),
        click.option("--d-v", type=int, help="Max subchannels per user."),
        click.option("--d-f", type=int, help="Max users per subchannel."),
        click.option("--area-side", type=float),
        click.option("--carrier-freq", type=float, help="MHz."),
        click.option("--bs-height", type=float),
        click.option("--ms-height", type=float),
        click.option("--user-tx-power", type=float, help="Watts per user."),
        click.option("--noise-power", type=float, help="Watts."),
        click.option("--swap-epsilon", type=float),
        click.option("--max-iterations", type=int),
        click.option("--seed", type=int),
        click.option("--fading/--no-fading", default=None),
        click.option("--swap-mode", type=click.Choice(["sum-rate", "pareto"])),
        click.option("--min-user-rate", type=float),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


_FIELD_NAMES = [
    "n_users", "n_subchannels", "d_v", "d_f", "area_side", "carrier_freq", "bs_height",
    "ms_height", "user_tx_power", "noise_power", "swap_epsilon", "max_iterations", "seed",
    "fading", "swap_mode", "min_user_rate",
]


def build_config(config_path: str | None, **kwargs) -> ScenarioConfig:
    overrides = {k: kwargs.pop(k) for k in _FIELD_NAMES if k in kwargs}
    if config_path:
        return load_config(config_path, **overrides)
    return ScenarioConfig.from_dict({k: v for k, v in overrides.items() if v is not None})


def _split_scenario(kwargs: dict) -> tuple[ScenarioConfig, dict]:
    config_path = kwargs.pop("config_path")
    fields = {k: kwargs.pop(k) for k in _FIELD_NAMES}
    return build_config(config_path, **fields), kwargs


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose: bool) -> None:
    """Swap matching for uplink NOMA subchannel allocation."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@cli.command("run")
@scenario_options
def run_cmd(**kwargs) -> None:
    """Run one scenario and print the rate report and run statistics as JSON."""
    cfg, _ = _split_scenario(kwargs)
    _, stats = harness.run_scenario(cfg)
    click.echo(json.dumps({"config": cfg.to_dict(), **harness.report_dict(stats)}, indent=2))


@cli.command("sweep")
@scenario_options
@click.option("--n-values", default=",".join(map(str, harness.DEFAULT_N_VALUES)), show_default=True,
              help="Comma-separated user counts.")
@click.option("--trials", default=50, show_default=True, type=int)
@click.option("--workers", default=1, show_default=True, type=int, help="Worker processes.")
@click.option("--out", "out_dir", default="results", show_default=True, type=click.Path(file_okay=False))
@click.option("--chart/--no-chart", default=True, show_default=True)
@click.option("--ci", is_flag=True, help="CI mode: --seed becomes mandatory (also set by CI=true).")
def sweep_cmd(**kwargs) -> None:
    """Scheduled users and sum-rate versus N, min/avg/max over seeded trials."""
    ci = kwargs.pop("ci") or os.environ.get("CI", "").lower() in ("1", "true", "yes")
    if ci and kwargs["seed"] is None:
        raise ConfigError("seed", "--seed is mandatory for sweep in CI mode")
    cfg, rest = _split_scenario(kwargs)
    try:
        n_values = [int(v) for v in rest["n_values"].split(",") if v.strip()]
    except ValueError:
        raise ConfigError("n_values", f"not a comma-separated integer list: {rest['n_values']!r}") from None
    if rest["trials"] < 1:
        raise ConfigError("trials", "must be >= 1")
    result = harness.sweep(cfg, n_values, rest["trials"], workers=rest["workers"])
    for path in harness.emit(result, rest["out_dir"], chart=rest["chart"]):
        click.echo(f"wrote {path}")
    click.echo(harness.summary_csv(result.rows), nl=False)


@cli.command("oracle")
@scenario_options
@click.option("--instances", default=200, show_default=True, type=int,
              help="Random tiny instances when no scenario size is given.")
def oracle_cmd(instances: int, **kwargs) -> None:
    """Optimality gap of USMA against exhaustive enumeration on tiny instances.

    With explicit --n-users/--n-subchannels a single scenario is reported;
    otherwise random instances (N<=6, K<=3, caps<=2) are drawn from --seed.
    """
    single = kwargs["n_users"] is not None or kwargs["config_path"] is not None
    cfg, _ = _split_scenario(kwargs)
    if single:
        rng = np.random.default_rng(cfg.seed)
        ch = build_channel(cfg, rng)
        _, stats = run_usma(ch, cfg, rng)
        try:
            rep = oracle.optimal(ch, cfg, usma_sum_rate=stats.final_report.sum_rate)
        except oracle.InstanceTooLarge as exc:
            raise ConfigError("n_users", str(exc)) from None
        click.echo(json.dumps({
            "n_feasible": rep.n_feasible,
            "optimal_sum_rate": rep.best_sum_rate,
            "usma_sum_rate": stats.final_report.sum_rate,
            "initial_sum_rate": stats.initial_sum_rate,
            "gap": rep.usma_gap,
            "optimal_pairs": rep.best_matching.pairs(),
        }, indent=2))
        return
    result = checks.run_suite(instances, cfg.seed, with_oracle=True)
    click.echo(f"instances={result.instances} mean_gap={result.mean_gap:.6f} max_gap={result.max_gap:.6f}")


@cli.command("check")
@click.option("--instances", default=1000, show_default=True, type=int)
@click.option("--fuzz", default=100_000, show_default=True, type=int, help="Random swaps to fuzz.")
@click.option("--seed", default=0, show_default=True, type=int)
def check_cmd(instances: int, fuzz: int, seed: int) -> None:
    """Run the randomised invariant suite; exit 3 on any violation."""
    result = checks.run_suite(instances, seed, with_oracle=True, fuzz=fuzz)
    click.echo(
        f"instances={result.instances} converged={result.converged} swaps={result.swaps} "
        f"mean_gap={result.mean_gap:.6f} max_gap={result.max_gap:.6f} violations={len(result.violations)}"
    )
    if result.violations:
        for v in result.violations[:20]:
            click.echo(v, err=True)
        raise InvariantViolation(f"{len(result.violations)} invariant violation(s)")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="noma-match", standalone_mode=False)
    except click.exceptions.Abort:
        return EXIT_VALIDATION
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except (ConfigError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    except InvariantViolation as exc:
        click.echo(f"check failed: {exc}", err=True)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

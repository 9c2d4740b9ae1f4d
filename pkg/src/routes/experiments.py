from pathlib import Path
from typing import Optional

import typer
from rich.table import Table

from src.conf.config import settings
from src.exceptions import ConfigValidationError
from src.repository.configs import load_config
from src.routes.common import console, exit_on_error, global_seed
from src.services import harness


def _fmt(value: Optional[float], digits: int = 4) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


@exit_on_error
def run(
    ctx: typer.Context,
    config: Path = typer.Argument(..., help="Experiment config (JSON)."),
    out: Path = typer.Option(Path(settings.output_dir), "--out", help="Output directory."),
):
    """
    Run one experiment and write its artifacts to OUT/<name>/.
    """
    cfg = harness.with_seed(load_config(config), global_seed(ctx))
    result = harness.run_experiment(cfg, out)

    table = Table(title=f"{result.name} ({result.config_digest})")
    table.add_column("quantity")
    table.add_column("value", justify="right")
    table.add_row("points", str(result.n_points))
    table.add_row("probabilities", ", ".join(f"{p:.4f}" for p in result.probs))
    for estimator, estimate in result.dimension_estimates.items():
        table.add_row(f"{estimator.value} dimension", f"{estimate.value:.4f} (R² {estimate.r_squared:.4f})")
    if result.stability:
        table.add_row("lyapunov", f"{result.stability.lyapunov_estimate:.4f} ± {result.stability.std_error:.4f}")
        table.add_row("verdict", result.stability.verdict.value)
    table.add_row("wall time", f"{result.wall_time:.2f}s")
    console.print(table)


@exit_on_error
def suite(
    ctx: typer.Context,
    config_dir: Path = typer.Argument(Path(settings.config_dir), help="Directory of experiment configs."),
    out: Path = typer.Option(Path(settings.output_dir), "--out", help="Output directory."),
    workers: int = typer.Option(settings.workers, "--workers", min=1, help="Worker processes."),
):
    """
    Run every config of a directory and write OUT/summary.csv.
    """
    rows = harness.run_suite(config_dir, out, workers=workers, seed=global_seed(ctx))

    table = Table(title=f"Suite ({len(rows)} experiments)")
    for column in ("name", "box_dim", "r_squared", "lyapunov", "verdict", "wall_time"):
        table.add_column(column)
    for row in rows:
        verdict = f"[red]FAILED[/]: {row.error}" if row.failed else row.verdict.value if row.verdict else "-"
        table.add_row(row.name, _fmt(row.box_dim), _fmt(row.r_squared), _fmt(row.lyapunov), verdict, f"{row.wall_time:.2f}s")
    console.print(table)


@exit_on_error
def sweep(
    config: Path = typer.Argument(..., help="Experiment config (JSON)."),
    seeds: str = typer.Option("1,2,3,4,5", "--seeds", help="Comma-separated seeds."),
):
    """
    Box dimension of one config across several seeds.
    """
    try:
        seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    except ValueError:
        raise ConfigValidationError(f"--seeds must be comma-separated integers, got '{seeds}'") from None
    if not seed_list:
        raise ConfigValidationError("--seeds is empty")
    report = harness.seed_sweep(load_config(config), seed_list)

    table = Table(title=f"Seed sweep of {report.name}")
    table.add_column("seed", justify="right")
    table.add_column("box dimension", justify="right")
    table.add_column("R²", justify="right")
    for seed, value, r2 in zip(report.seeds, report.values, report.r_squared):
        table.add_row(str(seed), f"{value:.4f}", f"{r2:.4f}")
    console.print(table)
    console.print(f"mean {report.mean:.4f}, spread {report.spread:.4f}")


@exit_on_error
def case_study(
    ctx: typer.Context,
    out: Path = typer.Option(Path(settings.output_dir) / "case_study", "--out", help="Output directory."),
):
    """
    Classical Sierpinski system against its nonlinear extension.
    """
    report = harness.case_study(out, seed=global_seed(ctx))
    console.print(f"classical dimension  {report.classical_dim:.4f}")
    console.print(f"extended dimension   {report.extended_dim:.4f}")
    console.print(f"delta                {report.delta:+.4f}")
    console.print(f"similarity bound     {report.similarity_dim:.4f}")

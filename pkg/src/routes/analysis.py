from pathlib import Path
from typing import Optional

import orjson
import typer
from rich.table import Table

from src.conf.config import settings
from src.exceptions import InsufficientScales
from src.repository.artifacts import read_points_csv
from src.repository.configs import load_config
from src.routes.common import console, exit_on_error, global_seed
from src.services import dimension, harness
from src.services.stability import stability_report


@exit_on_error
def dims(
    ctx: typer.Context,
    points: Path = typer.Argument(..., help="Point cloud CSV with an x,y header."),
    levels: int = typer.Option(settings.box_levels, "--levels", min=3, help="Dyadic box-counting levels."),
    max_pairs: int = typer.Option(settings.correlation_max_pairs, "--max-pairs", min=1, help="Pair budget of the correlation integral."),
):
    """
    Box-counting, information and correlation dimensions of an external point cloud.
    """
    cloud = read_points_csv(points)
    seed = global_seed(ctx) or 0
    estimators = {
        "box": lambda: dimension.fit_dimension(dimension.box_counts(cloud, levels)),
        "information": lambda: dimension.information_dimension(cloud, levels),
        "correlation": lambda: dimension.correlation_dimension(cloud, max_pairs=max_pairs, seed=seed),
    }

    table = Table(title=f"{points.name} ({len(cloud)} points)")
    for column in ("estimator", "value", "R²", "window"):
        table.add_column(column)
    for name, compute in estimators.items():
        try:
            estimate = compute()
        except InsufficientScales as exc:
            table.add_row(name, "-", "-", exc.detail)
            continue
        low, high = estimate.window
        table.add_row(name, f"{estimate.value:.4f}", f"{estimate.r_squared:.4f}", f"[{low:.3g}, {high:.3g}]")
    console.print(table)


@exit_on_error
def stability(
    ctx: typer.Context,
    config: Path = typer.Argument(..., help="Experiment config (JSON)."),
    orbit_length: Optional[int] = typer.Option(None, "--orbit-length", min=100, help="Averaged orbit steps."),
):
    """
    Stability report of a config's system, printed as JSON.
    """
    cfg = harness.with_seed(load_config(config), global_seed(ctx))
    sys = harness.build_system(cfg)
    report = stability_report(sys, orbit_length=orbit_length, seed=cfg.seed, x0=cfg.x0, burn_in=cfg.burn_in)
    typer.echo(orjson.dumps(report.model_dump(mode="json"), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode())

from typing import Optional

import typer

from src.conf.logging import setup_logging
from src.routes import analysis, experiments, maps


app = typer.Typer(help="Random nonlinear iterated function systems: orbits, stability and fractal dimension.",
                  no_args_is_help=True, add_completion=False)

app.command("list-maps")(maps.list_maps)
app.command("run")(experiments.run)
app.command("suite")(experiments.suite)
app.command("sweep")(experiments.sweep)
app.command("case-study")(experiments.case_study)
app.command("dims")(analysis.dims)
app.command("stability")(analysis.stability)


@app.callback()
def main(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the seed of every config."),
    quiet: bool = typer.Option(False, "--quiet", help="Only log warnings and errors."),
):
    setup_logging(quiet)
    ctx.obj = {"seed": seed}


if __name__ == "__main__":
    app()

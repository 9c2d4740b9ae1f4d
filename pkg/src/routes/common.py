import functools
from typing import Optional

import typer
from rich.console import Console

from src.exceptions import RnifsError


console = Console()
err_console = Console(stderr=True)


def exit_on_error(command):
    """
    Print the detail of a package error to stderr and exit with its code.
    """
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except RnifsError as exc:
            err_console.print(f"[bold red]{type(exc).__name__}[/]: {exc.detail}")
            raise typer.Exit(code=exc.exit_code)
    return wrapper


def global_seed(ctx: typer.Context) -> Optional[int]:
    return (ctx.obj or {}).get("seed")

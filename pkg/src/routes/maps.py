import typer
from rich.table import Table

from src.repository.maps import catalog, render_catalog
from src.routes.common import console


def list_maps(markdown: bool = typer.Option(False, "--markdown", help="Print the catalog as a Markdown document.")):
    """
    List every registered map with its closed form.
    """
    if markdown:
        typer.echo(render_catalog(), nl=False)
        return

    table = Table(title="Registered maps")
    table.add_column("id", style="bold")
    table.add_column("closed form")
    table.add_column("constraint")
    table.add_column("affine")
    for m in catalog():
        table.add_row(m.id, m.formula, m.description, "yes" if m.is_affine else "no")
    console.print(table)

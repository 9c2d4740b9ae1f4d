import logging

from rich.console import Console
from rich.logging import RichHandler

from src.conf.config import settings


def setup_logging(quiet: bool = False) -> None:
    """
    Install a single rich handler on the root logger.

    :param quiet: Raise the level to WARNING regardless of configuration.
    :type quiet: bool
    """
    level = logging.WARNING if quiet else getattr(logging, settings.log_level.upper(), logging.INFO)
    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
    logging.basicConfig(level=level, format="%(message)s", datefmt="[%X]", handlers=[handler], force=True)

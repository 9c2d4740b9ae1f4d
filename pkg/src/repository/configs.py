import hashlib
import logging
from pathlib import Path
from typing import Union

import orjson
from pydantic import ValidationError

from src.exceptions import ArtifactIOError, ConfigParseError, ConfigValidationError
from src.schemas import ExperimentConfig


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        loc = ".".join(str(p) for p in error["loc"]) or "config"
        parts.append(f"{loc}: {error['msg']}")
    return "; ".join(parts)


def parse_config(raw: bytes, source: str = "<config>") -> ExperimentConfig:
    """
    Parse and validate raw JSON config bytes.

    :param raw: The document.
    :type raw: bytes
    :param source: Name used in error messages.
    :type source: str
    :return: The validated config with defaults applied.
    :rtype: ExperimentConfig
    """
    try:
        data = orjson.loads(raw)
    except orjson.JSONDecodeError as exc:
        raise ConfigParseError(source, exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigValidationError(f"{source}: top level must be an object")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigValidationError(f"{source}: {_describe(exc)}") from None


def load_config(path: PathLike) -> ExperimentConfig:
    """
    Load an experiment config from a JSON file.

    :param path: The config file.
    :type path: str | Path
    :return: The validated config.
    :rtype: ExperimentConfig
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ArtifactIOError(str(path), exc.strerror or str(exc)) from None
    cfg = parse_config(raw, str(path))
    logger.debug("Loaded config %s from %s", cfg.name, path)
    return cfg


def dump_config(cfg: ExperimentConfig) -> bytes:
    return orjson.dumps(cfg.model_dump(mode="json", exclude_none=True), option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS)


def write_config(cfg: ExperimentConfig, path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(dump_config(cfg) + b"\n")
    except OSError as exc:
        raise ArtifactIOError(str(path), exc.strerror or str(exc)) from None
    return path


def config_digest(cfg: ExperimentConfig) -> str:
    """
    Stable hex digest of a config's canonical JSON form.
    """
    return hashlib.sha256(dump_config(cfg)).hexdigest()[:16]


def list_configs(config_dir: PathLike) -> list[Path]:
    config_dir = Path(config_dir)
    if not config_dir.is_dir():
        raise ArtifactIOError(str(config_dir), "not a directory")
    return sorted(config_dir.glob("*.json"))

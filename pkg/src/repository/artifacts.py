import csv
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np
import orjson
from pydantic import BaseModel

from src.core.models import PointCloud
from src.exceptions import ArtifactIOError
from src.schemas import SuiteRow


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FULL_PRECISION = "%.17g"
SUMMARY_HEADER = ["name", "box_dim", "r_squared", "lyapunov", "verdict", "wall_time"]


@contextmanager
def io_guard(path: PathLike) -> Iterator[Path]:
    """
    Create the parent directory and turn any OSError into ArtifactIOError.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        yield path
    except OSError as exc:
        raise ArtifactIOError(str(path), exc.strerror or str(exc)) from None


def write_table(path: PathLike, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
    """
    Write numeric columns as CSV with a one-line header and 17 significant digits.

    :param path: Target file.
    :type path: str | Path
    :param header: Column names.
    :type header: Sequence[str]
    :param columns: Equal-length numeric columns.
    :type columns: Sequence[np.ndarray]
    :return: The written path.
    :rtype: Path
    """
    table = np.column_stack([np.asarray(c, dtype=float) for c in columns]) if len(columns[0]) else np.empty((0, len(header)))
    with io_guard(path) as target:
        np.savetxt(target, table, fmt=FULL_PRECISION, delimiter=",", header=",".join(header), comments="")
    return target


def write_points_csv(cloud: PointCloud, path: PathLike) -> Path:
    return write_table(path, ["x", "y"], [cloud.x, cloud.y])


def read_points_csv(path: PathLike) -> PointCloud:
    """
    Read a point cloud written by :func:`write_points_csv` (or any ``x,y`` CSV).

    :param path: Source file.
    :type path: str | Path
    :return: The cloud, with no burn-in recorded.
    :rtype: PointCloud
    """
    path = Path(path)
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, usecols=(0, 1))
    except OSError as exc:
        raise ArtifactIOError(str(path), exc.strerror or str(exc)) from None
    except ValueError as exc:
        raise ArtifactIOError(str(path), f"malformed points file ({exc})") from None
    return PointCloud(table.reshape(-1, 2), config_digest=path.stem)


def write_series_csv(series, path: PathLike) -> Path:
    return write_table(path, series.csv_header.split(","), [series.epsilons, series.values])


def write_json(payload: Union[BaseModel, dict], path: PathLike) -> Path:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    with io_guard(path) as target:
        target.write_bytes(orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS) + b"\n")
    return target


def read_json(path: PathLike) -> dict:
    path = Path(path)
    try:
        return orjson.loads(path.read_bytes())
    except OSError as exc:
        raise ArtifactIOError(str(path), exc.strerror or str(exc)) from None
    except orjson.JSONDecodeError as exc:
        raise ArtifactIOError(str(path), exc.msg) from None


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(getattr(value, "value", value))


def write_summary_csv(rows: Sequence[SuiteRow], path: PathLike) -> Path:
    """
    Suite summary: one row per experiment, failures flagged in the verdict column.
    """
    with io_guard(path) as target:
        with target.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SUMMARY_HEADER)
            for row in rows:
                verdict = f"FAILED: {row.error}" if row.failed else row.verdict
                writer.writerow([
                    row.name,
                    _cell(row.box_dim),
                    _cell(row.r_squared),
                    _cell(row.lyapunov),
                    _cell(verdict),
                    f"{row.wall_time:.3f}",
                ])
    logger.debug("Summary with %d rows written to %s", len(rows), target)
    return target

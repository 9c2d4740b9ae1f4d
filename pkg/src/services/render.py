import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from PIL import Image

from src.conf.config import settings
from src.core.models import DensityGrid, PointCloud, Point2
from src.exceptions import DomainError
from src.repository.artifacts import io_guard, write_table
from src.schemas import DimensionEstimate


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PAD = 0.02

PLASMA_ANCHORS = np.array([
    (13, 8, 135),
    (126, 3, 168),
    (204, 71, 120),
    (248, 149, 64),
    (240, 249, 33),
], dtype=float)


def _palette() -> np.ndarray:
    knots = np.linspace(0.0, 1.0, len(PLASMA_ANCHORS))
    t = np.linspace(0.0, 1.0, 256)
    channels = [np.interp(t, knots, PLASMA_ANCHORS[:, c]) for c in range(3)]
    return np.rint(np.column_stack(channels)).astype(np.uint8)


PALETTE = _palette()


def _frame(cloud: PointCloud) -> tuple[np.ndarray, np.ndarray]:
    """
    Origin and extent of the cloud's bounding box padded by 2% per side; a flat axis gets a unit extent.
    """
    lo, hi = cloud.bounds()
    width = hi - lo
    width = np.where(width > 0, width, 1.0)
    return lo - PAD * width, width * (1 + 2 * PAD)


def _check_size(cols: int, rows: int) -> None:
    if cols < 1 or rows < 1:
        raise DomainError(f"Raster size must be positive, got {cols}x{rows}")


def _cells(cloud: PointCloud, origin: np.ndarray, extent: np.ndarray, nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
    ix = np.floor((cloud.x - origin[0]) / (extent[0] / nx)).astype(np.int64)
    iy = np.floor((cloud.y - origin[1]) / (extent[1] / ny)).astype(np.int64)
    return np.clip(ix, 0, nx - 1), np.clip(iy, 0, ny - 1)


def density_grid(cloud: PointCloud, nx: Optional[int] = None, ny: Optional[int] = None) -> DensityGrid:
    """
    Square-cell histogram over the padded bounding box. Every point lands in exactly one cell.

    :param cloud: The point cloud.
    :type cloud: PointCloud
    :param nx: Columns.
    :type nx: int, optional
    :param ny: Rows.
    :type ny: int, optional
    :return: The grid, counts indexed [ix, iy].
    :rtype: DensityGrid
    """
    nx = settings.density_resolution if nx is None else nx
    ny = settings.density_resolution if ny is None else ny
    _check_size(nx, ny)
    cloud.require_points()
    origin, extent = _frame(cloud)
    ix, iy = _cells(cloud, origin, extent, nx, ny)
    counts = np.bincount(ix * ny + iy, minlength=nx * ny).reshape(nx, ny)
    return DensityGrid(nx, ny, Point2(float(origin[0]), float(origin[1])), float(extent[0] / nx), float(extent[1] / ny), counts)


def _save_ppm(rgb: np.ndarray, path: PathLike) -> Path:
    with io_guard(path) as target:
        Image.fromarray(rgb).save(target, format="PPM")
    return target


def density_pixels(grid: DensityGrid) -> np.ndarray:
    top = int(grid.counts.max())
    if top == 0:
        level = np.zeros_like(grid.counts, dtype=float)
    else:
        level = np.log1p(grid.counts) / np.log1p(top)
    index = np.rint(level * 255).astype(np.int64)
    # rows run top to bottom, so y is flipped
    return PALETTE[index.T[::-1]]


def write_density_image(grid: DensityGrid, path: PathLike) -> Path:
    """
    Binary PPM of log-scaled density, ln(1 + c) / ln(1 + max), through a 256-entry plasma table.

    :param grid: The density grid.
    :type grid: DensityGrid
    :param path: Target file.
    :type path: str | Path
    :return: The written path.
    :rtype: Path
    """
    return _save_ppm(np.ascontiguousarray(density_pixels(grid)), path)


def write_scatter_image(cloud: PointCloud, width: Optional[int], height: Optional[int], path: PathLike) -> Path:
    """
    Binary PPM with one white pixel per occupied position on a black canvas.
    """
    width = settings.scatter_size if width is None else width
    height = settings.scatter_size if height is None else height
    _check_size(width, height)
    cloud.require_points()
    origin, extent = _frame(cloud)
    ix, iy = _cells(cloud, origin, extent, width, height)
    canvas = np.zeros((height, width, 3), dtype=np.uint8)
    canvas[height - 1 - iy, ix] = 255
    return _save_ppm(canvas, path)


def write_side_by_side(paths: Sequence[PathLike], target: PathLike, gap: int = 8) -> Path:
    """
    Paste images left to right on a black strip.
    """
    with io_guard(target) as out:
        images = [Image.open(p).convert("RGB") for p in paths]
        canvas = Image.new("RGB", (sum(i.width for i in images) + gap * (len(images) - 1), max(i.height for i in images)))
        offset = 0
        for image in images:
            canvas.paste(image, (offset, 0))
            offset += image.width + gap
        canvas.save(out, format="PPM")
    return out


def write_loglog_csv(series, fit: DimensionEstimate, path: PathLike) -> Path:
    """
    Log-log rows plus the fitted line for external plotting. Columns follow the
    series kind: ``log_inv_eps,log_count`` for box counts, ``log_inv_eps,entropy``
    for entropies, ``log_r,log_correlation`` for the correlation integral. Scales
    with no finite log measure (empty correlation bins) are left out.

    :param series: Box-count, entropy or correlation series.
    :param fit: The regression fitted to that series.
    :type fit: DimensionEstimate
    :param path: Target file.
    :type path: str | Path
    :return: The written path.
    :rtype: Path
    """
    x = series.log_scale
    y = series.log_measure
    keep = np.isfinite(y)
    x, y = x[keep], y[keep]
    return write_table(path, [*series.loglog_header, "fit_line"], [x, y, fit.intercept + fit.value * x])

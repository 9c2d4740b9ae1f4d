import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import linregress

from src.conf.config import settings
from src.core.models import BoxCountSeries, CorrelationSeries, EntropySeries, PointCloud, ProbabilityVector
from src.core.rng import Xoshiro256StarStar
from src.exceptions import DomainError, InsufficientScales, LengthMismatch
from src.schemas import DimensionEstimate, Estimator


logger = logging.getLogger(__name__)

MIN_SCALES = 3
MIN_POINTS = 100


def _grid_frame(cloud: PointCloud) -> tuple[np.ndarray, float]:
    lo, hi = cloud.bounds()
    span = float((hi - lo).max())
    return lo, span if span > 0 else 1.0


def _occupancy(points: np.ndarray, lo: np.ndarray, span: float, level: int) -> np.ndarray:
    """
    Point counts of the occupied cells of the 2**level x 2**level grid anchored at ``lo``.
    """
    side = 1 << level
    eps = span / side
    cells = np.floor((points - lo) / eps).astype(np.int64)
    np.clip(cells, 0, side - 1, out=cells)
    keys = cells[:, 0] * side + cells[:, 1]
    _, counts = np.unique(keys, return_counts=True)
    return counts


def box_counts(cloud: PointCloud, levels: Optional[int] = None) -> BoxCountSeries:
    """
    Occupied-box counts N(eps) at eps_k = span / 2**k, k = 1..levels.

    The grid is anchored at the minimum corner of the cloud's bounding box and
    ``span`` is the longer side of that box. Points on the upper edge fall in the
    last cell.

    :param cloud: The point cloud.
    :type cloud: PointCloud
    :param levels: Number of dyadic scales, at least 3.
    :type levels: int, optional
    :return: The series, finest scale last.
    :rtype: BoxCountSeries
    """
    levels = settings.box_levels if levels is None else levels
    if levels < MIN_SCALES:
        raise InsufficientScales(f"Box counting needs at least {MIN_SCALES} levels, got {levels}")
    cloud.require_points()
    lo, span = _grid_frame(cloud)

    epsilons = np.array([span / (1 << k) for k in range(1, levels + 1)])
    counts = np.array([_occupancy(cloud.points, lo, span, k).size for k in range(1, levels + 1)], dtype=np.int64)
    logger.debug("Box counts: %s", counts.tolist())
    return BoxCountSeries(epsilons, counts, len(cloud))


def _regress(x: np.ndarray, y: np.ndarray, scales: np.ndarray, estimator: Estimator) -> DimensionEstimate:
    fit = linregress(x, y)
    return DimensionEstimate(
        estimator=estimator,
        value=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
        window=(float(scales.min()), float(scales.max())),
    )


def _degenerate(scales: np.ndarray, estimator: Estimator) -> DimensionEstimate:
    return DimensionEstimate(
        estimator=estimator, value=0.0, intercept=0.0, r_squared=1.0,
        window=(float(scales.min()), float(scales.max())),
    )


def saturation_window(counts: np.ndarray, n_points: int) -> np.ndarray:
    return (counts >= 10) & (counts <= n_points / 10)


def fit_dimension(series: BoxCountSeries) -> DimensionEstimate:
    """
    Least-squares slope of log N(eps) against log(1/eps) over the scales with
    10 <= N(eps) <= n_points / 10.

    :param series: Box counts.
    :type series: BoxCountSeries
    :return: The box-counting dimension estimate.
    :rtype: DimensionEstimate
    """
    if np.all(series.counts == 1):
        return _degenerate(series.epsilons, Estimator.box)
    mask = saturation_window(series.counts, series.n_points)
    if mask.sum() < MIN_SCALES:
        raise InsufficientScales(f"Only {int(mask.sum())} box scales inside the fit window")
    return _regress(series.log_scale[mask], series.log_measure[mask], series.epsilons[mask], Estimator.box)


def entropy_series(cloud: PointCloud, levels: Optional[int] = None) -> EntropySeries:
    levels = settings.box_levels if levels is None else levels
    if levels < MIN_SCALES:
        raise InsufficientScales(f"Entropy series needs at least {MIN_SCALES} levels, got {levels}")
    if len(cloud) < MIN_POINTS:
        raise InsufficientScales(f"Information dimension needs at least {MIN_POINTS} points, got {len(cloud)}")
    lo, span = _grid_frame(cloud)

    n = len(cloud)
    entropies, counts = [], []
    for k in range(1, levels + 1):
        occupied = _occupancy(cloud.points, lo, span, k)
        freq = occupied / n
        entropies.append(float(-(freq * np.log(freq)).sum()))
        counts.append(occupied.size)
    epsilons = np.array([span / (1 << k) for k in range(1, levels + 1)])
    return EntropySeries(epsilons, np.array(entropies), np.array(counts, dtype=np.int64), n)


def fit_information(series: EntropySeries) -> DimensionEstimate:
    if np.all(series.entropies == 0):
        return _degenerate(series.epsilons, Estimator.information)
    mask = saturation_window(series.counts, series.n_points)
    if mask.sum() < MIN_SCALES:
        raise InsufficientScales(f"Only {int(mask.sum())} entropy scales inside the fit window")
    return _regress(series.log_scale[mask], series.log_measure[mask], series.epsilons[mask], Estimator.information)


def information_dimension(cloud: PointCloud, levels: Optional[int] = None) -> DimensionEstimate:
    """
    Slope of the occupied-cell Shannon entropy H(eps) against log(1/eps), over the box-counting window.

    :param cloud: At least 100 points.
    :type cloud: PointCloud
    :param levels: Number of dyadic scales.
    :type levels: int, optional
    :return: The information dimension estimate.
    :rtype: DimensionEstimate
    """
    return fit_information(entropy_series(cloud, levels))


def _pair_distances(points: np.ndarray, max_pairs: int, seed: int) -> np.ndarray:
    n = len(points)
    if n * (n - 1) // 2 <= max_pairs:
        return pdist(points)
    generator = Xoshiro256StarStar(seed).numpy_generator()
    i = generator.integers(0, n, max_pairs)
    # a non-zero shift keeps i != j
    j = (i + generator.integers(1, n, max_pairs)) % n
    diff = points[i] - points[j]
    return np.hypot(diff[:, 0], diff[:, 1])


def default_radii(cloud: PointCloud, levels: Optional[int] = None) -> np.ndarray:
    levels = settings.box_levels if levels is None else levels
    _, span = _grid_frame(cloud)
    r_max = span * math.sqrt(2.0)
    return r_max * 2.0 ** (-np.arange(2 * levels + 1) / 2.0)


def correlation_series(cloud: PointCloud, radii: Optional[Sequence[float]] = None, max_pairs: Optional[int] = None,
                       seed: int = 0) -> CorrelationSeries:
    if len(cloud) < MIN_POINTS:
        raise InsufficientScales(f"Correlation dimension needs at least {MIN_POINTS} points, got {len(cloud)}")
    max_pairs = settings.correlation_max_pairs if max_pairs is None else max_pairs
    if max_pairs < 1:
        raise DomainError(f"max_pairs must be at least 1, got {max_pairs}")
    radii = np.asarray(radii if radii is not None else default_radii(cloud), dtype=float)

    distances = np.sort(_pair_distances(cloud.points, max_pairs, seed))
    correlations = np.searchsorted(distances, radii, side="left") / len(distances)
    return CorrelationSeries(radii, correlations, len(distances))


def fit_correlation(series: CorrelationSeries) -> DimensionEstimate:
    if np.all(series.correlations == 1.0):
        # every sampled pair sits at distance zero
        return _degenerate(series.radii, Estimator.correlation)
    c = series.correlations
    mask = (c > 0) & (c >= 100 / series.n_pairs) & (c <= 0.1)
    if mask.sum() < MIN_SCALES:
        raise InsufficientScales(f"Only {int(mask.sum())} radii inside the correlation window")
    return _regress(series.log_scale[mask], series.log_measure[mask], series.radii[mask], Estimator.correlation)


def correlation_dimension(cloud: PointCloud, radii: Optional[Sequence[float]] = None, max_pairs: Optional[int] = None,
                          seed: int = 0) -> DimensionEstimate:
    """
    Grassberger-Procaccia estimate: slope of log C(r) against log r, where C(r) is
    the fraction of sampled point pairs closer than r, over 100 / pairs <= C(r) <= 0.1.

    :param cloud: At least 100 points.
    :type cloud: PointCloud
    :param radii: Decreasing radii; dyadic half-steps below the bounding-box diagonal by default.
    :type radii: Sequence[float], optional
    :param max_pairs: Pair budget; all pairs are used when they fit.
    :type max_pairs: int, optional
    :param seed: Seed of the pair subsampling.
    :type seed: int
    :return: The correlation dimension estimate.
    :rtype: DimensionEstimate
    """
    return fit_correlation(correlation_series(cloud, radii, max_pairs, seed))


def similarity_bound(probs: ProbabilityVector, ratios: Sequence[float], literal: bool = False) -> float:
    """
    Similarity-dimension bound of a weighted system of similitudes.

    The default form is sum(p_i ln p_i) / sum(p_i ln s_i), which gives
    ln 3 / ln 2 ~ 1.5849 for the equal-weight Sierpinski system. ``literal=True``
    returns the inverted ratio sum(p_i ln s_i) / sum(p_i ln p_i), which gives
    ln 2 / ln 3 ~ 0.6309 on the same system; it is kept for comparison only.

    :param probs: Map weights.
    :type probs: ProbabilityVector
    :param ratios: Contraction ratio of each map, each in (0, 1).
    :type ratios: Sequence[float]
    :param literal: Return the inverted ratio.
    :type literal: bool
    :return: The bound.
    :rtype: float
    """
    p = list(probs.p) if isinstance(probs, ProbabilityVector) else [float(v) for v in probs]
    ratios = [float(s) for s in ratios]
    if len(p) != len(ratios):
        raise LengthMismatch(f"{len(p)} probabilities but {len(ratios)} ratios")
    if any(not 0.0 < v <= 1.0 for v in p):
        raise DomainError(f"Probabilities must lie in (0, 1], got {p}")
    if any(not 0.0 < s < 1.0 for s in ratios):
        raise DomainError(f"Ratios must lie in (0, 1), got {ratios}")

    entropy = math.fsum(v * math.log(v) for v in p)
    contraction = math.fsum(v * math.log(s) for v, s in zip(p, ratios))
    if literal:
        if entropy == 0.0:
            raise DomainError("Inverted form is undefined for a single map (zero entropy)")
        return contraction / entropy
    return abs(entropy / contraction)

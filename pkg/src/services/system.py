import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.conf.config import settings
from src.core.models import PointCloud, ProbabilityVector, RnifsSystem, Window
from src.core.rng import Xoshiro256StarStar
from src.exceptions import Diverged, DomainError, InvalidAlphas
from src.repository.maps import estimate_lipschitz
from src.schemas import ValidationReport


logger = logging.getLogger(__name__)


def per_map_lipschitz(sys: RnifsSystem, window: Optional[Sequence[float]] = None, n_samples: Optional[int] = None,
                      seed: int = 0) -> list[float]:
    window = Window(*(settings.reference_window if window is None else window))
    n_samples = settings.lipschitz_samples if n_samples is None else n_samples
    return [estimate_lipschitz(m, window, n_samples, seed + i) for i, m in enumerate(sys.maps)]


def validate(sys: RnifsSystem, window: Optional[Sequence[float]] = None, n_samples: Optional[int] = None,
             seed: int = 0) -> ValidationReport:
    """
    Re-check the probability and length invariants of a system and report the
    empirical Lipschitz constant of each map together with the mean factor
    sum(p_i * s_i). A factor above 1 is reported, not refused.

    :param sys: The system.
    :type sys: RnifsSystem
    :param window: Box over which Lipschitz constants are estimated.
    :type window: Sequence[float], optional
    :param n_samples: Pairs sampled per map.
    :type n_samples: int, optional
    :param seed: Sampling seed.
    :type seed: int
    :return: The advisory report.
    :rtype: ValidationReport
    """
    probs = ProbabilityVector(sys.probs.p)
    RnifsSystem(sys.maps, probs)
    window = Window(*(settings.reference_window if window is None else window))
    lipschitz = per_map_lipschitz(sys, window, n_samples, seed)
    factor = math.fsum(p * s for p, s in zip(probs.p, lipschitz))
    if factor >= 1.0:
        logger.info("Mean contraction factor %.4f >= 1 over %s: global contractivity not established", factor, tuple(window))
    return ValidationReport(
        map_ids=sys.ids,
        probs=list(probs.p),
        per_map_lipschitz=lipschitz,
        mean_contraction_factor=factor,
    )


def sample_index(probs: ProbabilityVector, rng: Xoshiro256StarStar) -> int:
    """
    Inverse-CDF draw of one map index. Falls back to the last index when rounding
    leaves the cumulative sum just below the uniform draw.
    """
    u = rng.random()
    for i, c in enumerate(np.cumsum(probs.p)):
        if u < c:
            return i
    return len(probs) - 1


def sample_indices(probs: ProbabilityVector, rng: Xoshiro256StarStar, n: int) -> np.ndarray:
    """
    Draw n indices; identical to n successive :func:`sample_index` calls on the same stream.

    :param probs: Selection probabilities.
    :type probs: ProbabilityVector
    :param rng: The stream, advanced by n draws.
    :type rng: Xoshiro256StarStar
    :param n: Number of draws.
    :type n: int
    :return: Index array of length n.
    :rtype: np.ndarray
    """
    uniforms = np.fromiter((rng.random() for _ in range(n)), dtype=float, count=n)
    idx = np.searchsorted(np.cumsum(probs.p), uniforms, side="right")
    return np.minimum(idx, len(probs) - 1)


def trajectory(sys: RnifsSystem, x0: Sequence[float], total: int, seed: int,
               radius: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Run the chaos game for ``total`` steps from x0.

    :return: Points x_1..x_total (shape (total, 2)) and the map index used at each step.
    :rtype: tuple[np.ndarray, np.ndarray]
    """
    radius = settings.divergence_radius if radius is None else radius
    rng = Xoshiro256StarStar(seed)
    indices = sample_indices(sys.probs, rng, total)
    rules = [m.rule for m in sys.maps]

    out = np.empty((total, 2))
    x, y = float(x0[0]), float(x0[1])
    with np.errstate(over="ignore", invalid="ignore"):
        for step, i in enumerate(indices.tolist()):
            x, y = rules[i](x, y)
            x, y = float(x), float(y)
            if not (abs(x) <= radius and abs(y) <= radius):
                raise Diverged(step + 1, (x, y))
            out[step, 0] = x
            out[step, 1] = y
    return out, indices


def generate_orbit(sys: RnifsSystem, x0: Sequence[float], total: int, burn_in: int, seed: int,
                   config_digest: str = "") -> PointCloud:
    """
    Chaos-game orbit: iterate x_{n+1} = f_w(x_n) for ``total`` steps and drop the first ``burn_in``.

    :param sys: The system.
    :type sys: RnifsSystem
    :param x0: Starting point.
    :type x0: Sequence[float]
    :param total: Number of steps M.
    :type total: int
    :param burn_in: Number of leading points T to discard.
    :type burn_in: int
    :param seed: Seed of the index stream.
    :type seed: int
    :param config_digest: Provenance tag stored on the cloud.
    :type config_digest: str
    :return: The M - T retained points in iteration order.
    :rtype: PointCloud
    """
    if not 0 <= burn_in < total:
        raise DomainError(f"Need 0 <= burn_in < total, got burn_in={burn_in}, total={total}")
    points, _ = trajectory(sys, x0, total, seed)
    cloud = PointCloud(points[burn_in:], seed=seed, config_digest=config_digest, burn_in=burn_in, total_iterations=total)
    logger.info("Orbit of %s: %d points kept (seed %d, digest %s)", "+".join(sys.ids), len(cloud), seed, config_digest or "-")
    return cloud


def dirichlet_probabilities(alphas: Sequence[float], rng: Xoshiro256StarStar) -> ProbabilityVector:
    """
    Sample a probability vector from a Dirichlet distribution via normalized gamma variates.

    :param alphas: Concentration parameters, all positive.
    :type alphas: Sequence[float]
    :param rng: The stream.
    :type rng: Xoshiro256StarStar
    :return: The sampled vector.
    :rtype: ProbabilityVector
    """
    if not alphas or any(not a > 0 for a in alphas):
        raise InvalidAlphas(f"Dirichlet alphas must be positive, got {list(alphas)}")
    draws = [rng.gamma(a) for a in alphas]
    total = math.fsum(draws)
    return ProbabilityVector(tuple(g / total for g in draws))

import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.conf.config import settings
from src.core.models import RnifsSystem, Window, spectral_norm
from src.exceptions import DomainError, LogOfZero
from src.repository.maps import jacobian_entries
from src.schemas import StabilityReport, Verdict
from src.services.system import per_map_lipschitz, trajectory


logger = logging.getLogger(__name__)


def _norms_along(sys: RnifsSystem, points: np.ndarray, indices: np.ndarray) -> np.ndarray:
    norms = np.empty(len(points))
    for i, m in enumerate(sys.maps):
        mask = indices == i
        if mask.any():
            norms[mask] = spectral_norm(*jacobian_entries(m, points[mask, 0], points[mask, 1]))
    return norms


def lyapunov_exponent(sys: RnifsSystem, x0: Sequence[float], n: int, seed: int,
                      burn_in: Optional[int] = None) -> tuple[float, float]:
    """
    Orbit average of log ||Df_w(x)|| (spectral norm), taken over the n steps that
    follow ``burn_in`` unrecorded steps.

    :param sys: The system.
    :type sys: RnifsSystem
    :param x0: Starting point.
    :type x0: Sequence[float]
    :param n: Number of averaged steps, at least 100.
    :type n: int
    :param seed: Seed of the index stream.
    :type seed: int
    :param burn_in: Leading steps left out of the average.
    :type burn_in: int, optional
    :return: The estimate (nats per step) and its standard error.
    :rtype: tuple[float, float]
    """
    if n < 100:
        raise DomainError(f"Lyapunov estimate needs n >= 100, got {n}")
    burn_in = settings.default_burn_in if burn_in is None else burn_in

    points, indices = trajectory(sys, x0, burn_in + n, seed)
    # the Jacobian at step k is taken at the point the map was applied to
    before = np.vstack([np.asarray(x0, dtype=float).reshape(1, 2), points[:-1]])
    norms = _norms_along(sys, before[burn_in:], indices[burn_in:])

    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise LogOfZero(burn_in + int(zero[0]))

    logs = np.log(norms)
    if np.all(logs == logs[0]):
        return float(logs[0]), 0.0
    return float(logs.mean()), float(logs.std(ddof=1) / math.sqrt(n))


def mean_contraction_factor(sys: RnifsSystem, window: Optional[Sequence[float]] = None,
                            n_samples: Optional[int] = None, seed: int = 0) -> float:
    """
    sum(p_i * s_i) with s_i the empirical Lipschitz constant of map i over the window.
    """
    lipschitz = per_map_lipschitz(sys, window, n_samples, seed)
    return math.fsum(p * s for p, s in zip(sys.probs.p, lipschitz))


def worst_point_growth(sys: RnifsSystem, window: Optional[Sequence[float]] = None, grid: Optional[int] = None) -> float:
    """
    Largest one-step expected log growth sum(p_i log ||Df_i(x)||) over a grid x grid lattice of the window.

    :param sys: The system.
    :type sys: RnifsSystem
    :param window: Box (xmin, xmax, ymin, ymax).
    :type window: Sequence[float], optional
    :param grid: Lattice points per side.
    :type grid: int, optional
    :return: The worst (largest) value over the lattice.
    :rtype: float
    """
    xmin, xmax, ymin, ymax = Window(*(settings.reference_window if window is None else window)).checked()
    grid = settings.stability_grid if grid is None else grid
    if grid < 1:
        raise DomainError(f"grid must be at least 1, got {grid}")
    gx, gy = np.meshgrid(np.linspace(xmin, xmax, grid), np.linspace(ymin, ymax, grid))
    gx, gy = gx.ravel(), gy.ravel()

    growth = np.zeros_like(gx)
    with np.errstate(divide="ignore"):
        for p, m in zip(sys.probs.p, sys.maps):
            growth += p * np.log(spectral_norm(*jacobian_entries(m, gx, gy)))
    return float(growth.max())


def classify(estimate: float, std_error: float) -> Verdict:
    if estimate + 2 * std_error < 0:
        return Verdict.contractive
    if estimate - 2 * std_error > 0:
        return Verdict.expansive
    return Verdict.indeterminate


def stability_report(sys: RnifsSystem, window: Optional[Sequence[float]] = None, orbit_length: Optional[int] = None,
                     seed: int = 0, x0: Optional[Sequence[float]] = None, burn_in: Optional[int] = None) -> StabilityReport:
    """
    Lyapunov estimate, mean contraction factor and lattice worst case, with the verdict.

    :param sys: The system.
    :type sys: RnifsSystem
    :param window: Box for the Lipschitz and lattice estimates.
    :type window: Sequence[float], optional
    :param orbit_length: Averaged steps of the Lyapunov estimate.
    :type orbit_length: int, optional
    :param seed: Seed shared by the orbit and the Lipschitz sampling.
    :type seed: int
    :param x0: Orbit start.
    :type x0: Sequence[float], optional
    :param burn_in: Orbit burn-in.
    :type burn_in: int, optional
    :return: The report.
    :rtype: StabilityReport
    """
    window = Window(*(settings.reference_window if window is None else window))
    orbit_length = settings.stability_orbit_length if orbit_length is None else orbit_length
    x0 = x0 if x0 is not None else settings.default_x0

    estimate, std_error = lyapunov_exponent(sys, x0, orbit_length, seed, burn_in)
    lipschitz = per_map_lipschitz(sys, window, seed=seed)
    report = StabilityReport(
        lyapunov_estimate=estimate,
        std_error=std_error,
        mean_contraction_factor=math.fsum(p * s for p, s in zip(sys.probs.p, lipschitz)),
        per_map_lipschitz=lipschitz,
        worst_point_growth=worst_point_growth(sys, window),
        verdict=classify(estimate, std_error),
    )
    logger.info("Stability of %s: lambda=%.4f +/- %.4f -> %s", "+".join(sys.ids), estimate, std_error, report.verdict.value)
    return report

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from src.exceptions import DomainError, EmptyCloud, InvalidProbabilities, LengthMismatch


PROBABILITY_TOL = 1e-12
MASS_TOL = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


class Mat2(NamedTuple):
    a11: float
    a12: float
    a21: float
    a22: float

    def spectral_norm(self) -> float:
        return spectral_norm(self.a11, self.a12, self.a21, self.a22)


class Window(NamedTuple):
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def checked(self) -> "Window":
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise DomainError(f"Degenerate window {tuple(self)}")
        return self


def spectral_norm(a11, a12, a21, a22):
    """
    Largest singular value of a 2x2 matrix, in closed form. Accepts scalars or arrays.

    :return: The operator 2-norm, elementwise when arrays are given.
    """
    return 0.5 * (np.hypot(a11 + a22, a21 - a12) + np.hypot(a11 - a22, a12 + a21))


Rule = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
JacobianRule = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class MapDescriptor:
    """
    A named planar map. ``rule`` and ``jacobian`` take coordinate arrays (or scalars)
    and broadcast, so one definition serves single points and whole clouds.
    """
    id: str
    rule: Rule = field(repr=False, compare=False)
    formula: str
    description: str
    is_affine: bool = False
    jacobian: Optional[JacobianRule] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class ProbabilityVector:
    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        object.__setattr__(self, "p", p)
        if not p:
            raise InvalidProbabilities("Probability vector is empty")
        if any(not math.isfinite(v) or v <= 0.0 for v in p):
            raise InvalidProbabilities(f"Every probability must be strictly positive, got {p}")
        total = math.fsum(p)
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise InvalidProbabilities(f"Probabilities sum to {total!r}, not 1")

    @classmethod
    def uniform(cls, n: int) -> "ProbabilityVector":
        return cls(tuple([1.0 / n] * n))

    def __len__(self) -> int:
        return len(self.p)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)


@dataclass(frozen=True)
class RnifsSystem:
    maps: tuple[MapDescriptor, ...]
    probs: ProbabilityVector

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))
        if len(self.maps) != len(self.probs):
            raise LengthMismatch(f"{len(self.maps)} maps but {len(self.probs)} probabilities")

    @property
    def ids(self) -> list[str]:
        return [m.id for m in self.maps]


def _frozen_array(values, shape_tail: tuple = ()) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape((-1,) + shape_tail)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    seed: int = 0
    config_digest: str = ""
    burn_in: int = 0
    total_iterations: Optional[int] = None

    def __post_init__(self):
        points = _frozen_array(self.points, (2,))
        object.__setattr__(self, "points", points)
        if self.total_iterations is None:
            object.__setattr__(self, "total_iterations", len(points) + self.burn_in)
        if len(points) != self.total_iterations - self.burn_in:
            raise LengthMismatch(
                f"{len(points)} points for {self.total_iterations} iterations with burn-in {self.burn_in}"
            )
        if not np.isfinite(points).all():
            raise DomainError("Point cloud holds non-finite coordinates")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def require_points(self, minimum: int = 1) -> "PointCloud":
        if len(self.points) == 0:
            raise EmptyCloud()
        if len(self.points) < minimum:
            raise EmptyCloud(f"Need at least {minimum} points, got {len(self.points)}")
        return self

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        self.require_points()
        return self.points.min(axis=0), self.points.max(axis=0)


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        support = _frozen_array(self.support, (2,))
        weights = _frozen_array(self.weights)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)
        if len(support) != len(weights):
            raise LengthMismatch(f"{len(support)} atoms but {len(weights)} weights")
        if len(support) == 0:
            raise EmptyCloud("Measure has no atoms")
        if (weights < 0).any():
            raise InvalidProbabilities("Measure weights must be non-negative")
        total = math.fsum(weights)
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidProbabilities(f"Measure mass is {total!r}, not 1")
        if not np.isfinite(support).all():
            raise DomainError("Measure support holds non-finite coordinates")

    @classmethod
    def dirac(cls, point: Sequence[float]) -> "EmpiricalMeasure":
        return cls(np.asarray([point], dtype=float), np.ones(1))

    @classmethod
    def uniform(cls, points) -> "EmpiricalMeasure":
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls(points, np.full(len(points), 1.0 / len(points)))

    def __len__(self) -> int:
        return len(self.weights)

    def is_uniform(self) -> bool:
        return bool(np.all(self.weights == self.weights[0]))


@dataclass(frozen=True)
class ConvergenceTrace:
    step_distances: tuple[float, ...]
    ratios: tuple[float, ...]
    theoretical_factor: float
    exact: tuple[bool, ...] = ()

    @property
    def converged_distance(self) -> float:
        return self.step_distances[-1] if self.step_distances else math.inf


@dataclass(frozen=True, eq=False)
class BoxCountSeries:
    epsilons: np.ndarray
    counts: np.ndarray
    n_points: int

    csv_header = "epsilon,count"
    loglog_header = ("log_inv_eps", "log_count")

    @property
    def log_scale(self) -> np.ndarray:
        return np.log(1.0 / self.epsilons)

    @property
    def log_measure(self) -> np.ndarray:
        return np.log(self.counts)

    @property
    def values(self) -> np.ndarray:
        return self.counts


@dataclass(frozen=True, eq=False)
class EntropySeries:
    epsilons: np.ndarray
    entropies: np.ndarray
    counts: np.ndarray
    n_points: int

    csv_header = "epsilon,entropy"
    loglog_header = ("log_inv_eps", "entropy")

    @property
    def log_scale(self) -> np.ndarray:
        return np.log(1.0 / self.epsilons)

    @property
    def log_measure(self) -> np.ndarray:
        return self.entropies

    @property
    def values(self) -> np.ndarray:
        return self.entropies


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    radii: np.ndarray
    correlations: np.ndarray
    n_pairs: int

    csv_header = "radius,correlation"
    loglog_header = ("log_r", "log_correlation")

    @property
    def epsilons(self) -> np.ndarray:
        return self.radii

    @property
    def log_scale(self) -> np.ndarray:
        return np.log(self.radii)

    @property
    def log_measure(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.correlations)

    @property
    def values(self) -> np.ndarray:
        return self.correlations


@dataclass(frozen=True, eq=False)
class DensityGrid:
    nx: int
    ny: int
    origin: Point2
    cell_w: float
    cell_h: float
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

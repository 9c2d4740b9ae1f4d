from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.conf.config import settings
from src.core.models import ProbabilityVector
from src.exceptions import RnifsError
from src.repository.maps import REGISTRY


class OutputKind(str, Enum):
    points = "points"
    density = "density"
    scatter = "scatter"
    boxdim = "boxdim"
    infodim = "infodim"
    corrdim = "corrdim"
    stability = "stability"


class Estimator(str, Enum):
    box = "box"
    information = "information"
    correlation = "correlation"


class Verdict(str, Enum):
    contractive = "ContractiveOnAverage"
    indeterminate = "Indeterminate"
    expansive = "ExpansiveOnAverage"


DEFAULT_OUTPUTS = [OutputKind.points, OutputKind.density, OutputKind.scatter, OutputKind.boxdim, OutputKind.stability]


class ExperimentConfig(BaseModel):
    name: str = Field(min_length=1)
    map_ids: list[str] = Field(min_length=1)
    probs: Optional[list[float]] = None
    dirichlet_alphas: Optional[list[float]] = None
    iterations: int = Field(default_factory=lambda: settings.default_iterations)
    burn_in: int = Field(default_factory=lambda: settings.default_burn_in, ge=0)
    seed: int = 0
    x0: tuple[float, float] = Field(default_factory=lambda: tuple(settings.default_x0))
    outputs: list[OutputKind] = Field(default_factory=lambda: list(DEFAULT_OUTPUTS))

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="before")
    @classmethod
    def expand_uniform(cls, data):
        if isinstance(data, dict) and data.get("probs") == "uniform":
            n = len(data.get("map_ids") or [])
            if n == 0:
                raise ValueError("'uniform' probabilities need at least one map id")
            data = {**data, "probs": [1.0 / n] * n}
        return data

    @field_validator("map_ids")
    @classmethod
    def maps_registered(cls, value: list[str]) -> list[str]:
        unknown = [m for m in value if m not in REGISTRY]
        if unknown:
            raise ValueError(f"map_ids not registered: {', '.join(unknown)}")
        return value

    @model_validator(mode="after")
    def check_invariants(self) -> "ExperimentConfig":
        if (self.probs is None) == (self.dirichlet_alphas is None):
            raise ValueError("exactly one of probs / dirichlet_alphas must be given")
        if self.iterations <= self.burn_in:
            raise ValueError(f"iterations ({self.iterations}) must exceed burn_in ({self.burn_in})")
        weights = self.probs if self.probs is not None else self.dirichlet_alphas
        if len(weights) != len(self.map_ids):
            raise ValueError(f"{len(self.map_ids)} map_ids but {len(weights)} weights")
        if self.probs is not None:
            try:
                ProbabilityVector(tuple(self.probs))
            except RnifsError as exc:
                raise ValueError(exc.detail) from None
        elif any(a <= 0 for a in self.dirichlet_alphas):
            raise ValueError("dirichlet_alphas must all be positive")
        return self


class DimensionEstimate(BaseModel):
    estimator: Estimator
    value: float
    intercept: float
    r_squared: float
    window: tuple[float, float]


class StabilityReport(BaseModel):
    lyapunov_estimate: float
    std_error: float
    mean_contraction_factor: float
    per_map_lipschitz: list[float]
    worst_point_growth: float
    verdict: Verdict


class ValidationReport(BaseModel):
    map_ids: list[str]
    probs: list[float]
    per_map_lipschitz: list[float]
    mean_contraction_factor: float

    @property
    def contractive_on_average(self) -> bool:
        return self.mean_contraction_factor < 1.0


class ExperimentResult(BaseModel):
    name: str
    config_digest: str
    n_points: int
    probs: list[float]
    dimension_estimates: dict[Estimator, DimensionEstimate] = {}
    stability: Optional[StabilityReport] = None
    artifact_paths: list[str] = []
    wall_time: float = 0.0


class SuiteRow(BaseModel):
    name: str
    box_dim: Optional[float] = None
    r_squared: Optional[float] = None
    lyapunov: Optional[float] = None
    verdict: Optional[Verdict] = None
    wall_time: float = 0.0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


class SweepReport(BaseModel):
    name: str
    seeds: list[int]
    values: list[float]
    r_squared: list[float]
    mean: float
    spread: float

    @property
    def max_deviation(self) -> float:
        return max(abs(v - self.mean) for v in self.values)


class CaseStudyReport(BaseModel):
    classical_dim: float
    extended_dim: float
    delta: float
    similarity_dim: float
    classical_verdict: Optional[Verdict] = None
    extended_verdict: Optional[Verdict] = None
    artifact_paths: list[str] = []

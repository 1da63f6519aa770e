"""Pydantic models for experiment files.

Every precondition a `qpaths` operation would check later is checked here
first, so an invalid file fails before any run starts and the error names the
offending field.
"""

import math
from collections.abc import Mapping
try:
    from importlib.resources.abc import Traversable
except ImportError:  # Python < 3.11
    from importlib.abc import Traversable
from pathlib import Path
from typing import Annotated, Any, Literal

try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)

from core_experiments.utils.config_loader import ConfigError, read_experiment_yaml
from qpaths.densities import make_gaussian, make_student_t, nu_from_q
from qpaths.entity.density import DensityHandle, GaussianSpec, StudentTSpec
from qpaths.entity.path import Schedule
from qpaths.entity.sampling import HmcConfig
from qpaths.paths import linear_schedule

Mode = Literal["ais", "bdmc", "density-grid", "partition-mc"]
UINT64_MAX = (1 << 64) - 1

MatrixLike = list[float] | list[list[float]]


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _dimension(mean: list[float], matrix: MatrixLike, field_name: str) -> None:
    dim = len(mean)
    if dim == 0:
        raise ValueError("mean must not be empty")
    if matrix and isinstance(matrix[0], list):
        if len(matrix) != dim or any(len(row) != dim for row in matrix):  # type: ignore[arg-type]
            raise ValueError(f"{field_name} must be a {dim}x{dim} matrix")
    elif len(matrix) not in (1, dim):
        raise ValueError(f"{field_name} must have 1 or {dim} entries")


class GaussianEndpoint(_Frozen):
    """Gaussian endpoint given by `variance` (default) or `std`, never both."""

    kind: Literal["gaussian"]
    mean: list[float]
    variance: MatrixLike | None = None
    std: list[float] | None = None

    @model_validator(mode="after")
    def _check_scale(self) -> Self:
        if (self.variance is None) == (self.std is None):
            raise ValueError("give exactly one of 'variance' or 'std'")
        if self.std is not None:
            _dimension(self.mean, self.std, "std")
        else:
            assert self.variance is not None
            _dimension(self.mean, self.variance, "variance")
        self.to_spec()
        return self

    @property
    def dim(self) -> int:
        return len(self.mean)

    def to_spec(self) -> GaussianSpec:
        if self.std is not None:
            return GaussianSpec.from_std(self.mean, np.broadcast_to(self.std, (self.dim,)))
        return GaussianSpec(self.mean, self.variance)

    def to_handle(self) -> DensityHandle:
        return make_gaussian(self.to_spec())


class StudentTEndpoint(_Frozen):
    """Student-t endpoint; the order may be given as `dof` or as the family order `q`."""

    kind: Literal["student_t"]
    mean: list[float]
    scale: MatrixLike = Field(default_factory=lambda: [1.0])
    dof: PositiveFloat | None = None
    q: float | None = None

    @model_validator(mode="after")
    def _check_order(self) -> Self:
        if (self.dof is None) == (self.q is None):
            raise ValueError("give exactly one of 'dof' or 'q'")
        _dimension(self.mean, self.scale, "scale")
        self.to_spec()
        return self

    @property
    def dim(self) -> int:
        return len(self.mean)

    @property
    def degrees_of_freedom(self) -> float:
        if self.dof is not None:
            return self.dof
        assert self.q is not None
        return nu_from_q(self.q, self.dim)

    def to_spec(self) -> StudentTSpec:
        scale = self.scale if isinstance(self.scale[0], list) else np.broadcast_to(self.scale, (self.dim,))
        return StudentTSpec(self.mean, scale, self.degrees_of_freedom)

    def to_handle(self) -> DensityHandle:
        return make_student_t(self.to_spec())


Endpoint = Annotated[GaussianEndpoint | StudentTEndpoint, Field(discriminator="kind")]


class EndpointPair(_Frozen):
    base: Endpoint
    target: Endpoint

    @model_validator(mode="after")
    def _same_dimension(self) -> Self:
        if self.base.dim != self.target.dim:
            raise ValueError(f"base and target dimensions differ ({self.base.dim} vs {self.target.dim})")
        return self

    @property
    def family(self) -> str:
        kinds = {self.base.kind, self.target.kind}
        return kinds.pop() if len(kinds) == 1 else "mixed"


class ScheduleSpec(_Frozen):
    """Either `type: linear` with one or more `T`, or `type: explicit` with `betas`."""

    type: Literal["linear", "explicit"] = "linear"
    T: list[PositiveInt] = Field(default_factory=lambda: [100])
    betas: list[float] | None = None

    @field_validator("T", mode="before")
    @classmethod
    def _wrap_single_T(cls, value: object) -> object:  # noqa: N802
        return [value] if isinstance(value, int) else value

    @model_validator(mode="after")
    def _check_betas(self) -> Self:
        if self.type == "explicit":
            if self.betas is None:
                raise ValueError("an explicit schedule needs 'betas'")
            Schedule(self.betas)
        elif not self.T:
            raise ValueError("a linear schedule needs at least one T")
        return self

    def schedules(self) -> list[Schedule]:
        if self.type == "explicit":
            assert self.betas is not None
            return [Schedule(self.betas)]
        return [linear_schedule(t) for t in self.T]


class HmcSettings(_Frozen):
    step_size: PositiveFloat = 1.5
    n_leapfrog: PositiveInt = 10
    transitions_per_temperature: NonNegativeInt = 2
    mass: PositiveFloat = 1.0

    def to_config(self) -> HmcConfig:
        return HmcConfig(**self.model_dump())


class GridSpec(_Frozen):
    """1-d evaluation grid for density-grid runs."""

    lower: float = -10.0
    upper: float = 10.0
    n_points: Annotated[int, Field(ge=2)] = 201
    n_betas: Annotated[int, Field(ge=2)] = 10

    @model_validator(mode="after")
    def _ordered(self) -> Self:
        if not self.lower < self.upper:
            raise ValueError("grid lower must be below upper")
        return self

    def points(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.n_points)

    def betas(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_betas)


class PartitionSpec(_Frozen):
    beta: Annotated[float, Field(ge=0.0, le=1.0)] = 0.5
    n_samples: PositiveInt = 100_000


class ExperimentConfig(_Frozen):
    name: str = "experiment"
    mode: Mode
    endpoints: EndpointPair
    q_values: Annotated[list[float], Field(min_length=1)]
    schedule: ScheduleSpec = Field(default_factory=ScheduleSpec)
    n_chains: PositiveInt = 1000
    n_seeds: PositiveInt = 1
    base_seed: Annotated[int, Field(ge=0, le=UINT64_MAX)] = 0
    block_size: PositiveInt = 256
    hmc: HmcSettings = Field(default_factory=HmcSettings)
    grid: GridSpec = Field(default_factory=GridSpec)
    partition: PartitionSpec = Field(default_factory=PartitionSpec)
    z_true: float | None = None
    include_timings: bool = False

    @field_validator("q_values")
    @classmethod
    def _finite_q(cls, values: list[float]) -> list[float]:
        for q in values:
            if not math.isfinite(q):
                raise ValueError(f"q values must be finite, got {q}")
        return values

    @model_validator(mode="after")
    def _mode_requirements(self) -> Self:
        if self.mode == "density-grid" and self.endpoints.base.dim != 1:
            raise ValueError("density-grid runs are 1-d only")
        return self

    def with_seed(self, base_seed: int) -> "ExperimentConfig":
        return self.model_copy(update={"base_seed": base_seed})


def _field_name(error: Mapping[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"] if not str(part).startswith("function-"))


def validate_experiment(data: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a parsed mapping, reporting the first failing dotted field."""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ConfigError(first["msg"], field=_field_name(first) or None) from exc


def load_experiment_config(source: str | Path | Traversable) -> ExperimentConfig:
    """Read and validate an experiment file (path or packaged resource)."""
    return validate_experiment(read_experiment_yaml(source))

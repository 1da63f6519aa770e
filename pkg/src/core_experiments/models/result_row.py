"""Row models for every CSV the harness writes.

Field order is the CSV column order. `sort_key` gives the canonical emission
order so parallel runs always write identical bytes.
"""

from typing import ClassVar

from pydantic import BaseModel, ConfigDict


class RowModel(BaseModel):
    """Base of every CSV row model."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    csv_header: ClassVar[tuple[str, ...]]

    def sort_key(self) -> tuple:
        raise NotImplementedError


class ResultRow(RowModel):
    """One AIS or BDMC run for a `(q, T, seed)` combination.

    `log_upper` is only set for BDMC; `z_estimate` is `exp(log_lower)`.
    """

    csv_header: ClassVar[tuple[str, ...]] = (
        "mode", "q", "T", "seed", "log_lower", "log_upper", "z_estimate", "ess", "n_invalid", "wall_ms",
    )

    mode: str
    q: float
    T: int
    seed: int
    log_lower: float
    log_upper: float | None = None
    z_estimate: float
    ess: float
    n_invalid: int = 0
    wall_ms: float = 0.0

    def sort_key(self) -> tuple:
        return (self.mode, self.q, self.T, self.seed)


class GridRow(RowModel):
    csv_header: ClassVar[tuple[str, ...]] = ("family", "q", "beta", "z", "log_density")

    family: str
    q: float
    beta: float
    z: float
    log_density: float

    def sort_key(self) -> tuple:
        return (self.family, self.q, self.beta, self.z)


class PartitionRow(RowModel):
    csv_header: ClassVar[tuple[str, ...]] = ("q", "beta", "seed", "log_z", "std_error", "n_samples")

    q: float
    beta: float
    seed: int
    log_z: float
    std_error: float
    n_samples: int

    def sort_key(self) -> tuple:
        return (self.q, self.beta, self.seed)


class SummaryRow(RowModel):
    """Seed aggregate for one `(q, T)` key; `std` needs at least two seeds."""

    csv_header: ClassVar[tuple[str, ...]] = (
        "mode", "q", "T", "n_seeds", "mean", "std", "abs_error", "mean_lower", "mean_upper", "mean_gap",
    )

    mode: str
    q: float
    T: int
    n_seeds: int
    mean: float
    std: float | None = None
    abs_error: float | None = None
    mean_lower: float
    mean_upper: float | None = None
    mean_gap: float | None = None

    def sort_key(self) -> tuple:
        return (self.mode, self.q, self.T)

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from qpaths.deformed_math import QOrder, check_q
from qpaths.entity.density import DensityHandle
from qpaths.errors import PreconditionError


@dataclass(frozen=True)
class QPath:
    """Power-mean path of order `q` between `base` and `target`."""

    base: DensityHandle
    target: DensityHandle
    q: QOrder

    def __post_init__(self) -> None:
        if self.base.dim != self.target.dim:
            raise PreconditionError(
                f"Path endpoints must share a dimension, got {self.base.dim} and {self.target.dim}"
            )
        object.__setattr__(self, "q", check_q(self.q))

    @property
    def dim(self) -> int:
        return self.base.dim

    def reversed(self) -> "QPath":
        """The same path walked from target to base."""
        return QPath(base=self.target, target=self.base, q=self.q)


@dataclass(frozen=True)
class Schedule:
    """Strictly increasing temperatures from 0 to 1."""

    betas: NDArray[np.float64]

    def __init__(self, betas: ArrayLike):
        arr = np.asarray(betas, dtype=np.float64).copy()
        if arr.ndim != 1 or arr.size < 2:
            raise PreconditionError("A schedule needs at least the two temperatures 0 and 1")
        if arr[0] != 0.0 or arr[-1] != 1.0:
            raise PreconditionError(f"A schedule must start at 0 and end at 1, got {arr[0]} .. {arr[-1]}")
        if not (np.diff(arr) > 0).all():
            raise PreconditionError("Schedule temperatures must be strictly increasing")
        arr.setflags(write=False)
        object.__setattr__(self, "betas", arr)

    @classmethod
    def from_betas(cls, betas: Sequence[float]) -> "Schedule":
        return cls(betas)

    @property
    def T(self) -> int:  # noqa: N802
        return int(self.betas.size - 1)

    def reflected(self) -> "Schedule":
        """`beta -> 1 - beta` walked backwards, the schedule of a reversed path."""
        return Schedule(1.0 - self.betas[::-1])

    def __len__(self) -> int:
        return int(self.betas.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Schedule):
            return NotImplemented
        return bool(np.array_equal(self.betas, other.betas))

    def __hash__(self) -> int:
        return hash(self.betas.tobytes())


@dataclass(frozen=True)
class PartitionEstimate:
    log_z: float
    std_error: float
    n_samples: int

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise PreconditionError("A partition estimate needs at least one sample")
        if not np.isfinite(self.std_error) or self.std_error < 0:
            raise PreconditionError(f"std_error must be finite and non-negative, got {self.std_error}")

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from qpaths.errors import PreconditionError

UINT64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class HmcConfig:
    """Fixed HMC tuning shared by every temperature of a run.

    The defaults were tuned once on the N(-4, 3) -> N(4, 1) pair and frozen.
    `transitions_per_temperature = 0` disables the kernel altogether, which
    leaves plain importance sampling along the path.
    """

    step_size: float = 1.5
    n_leapfrog: int = 10
    transitions_per_temperature: int = 2
    mass: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.step_size) or self.step_size <= 0:
            raise PreconditionError(f"step_size must be positive, got {self.step_size}")
        if self.n_leapfrog < 1:
            raise PreconditionError(f"n_leapfrog must be at least 1, got {self.n_leapfrog}")
        if self.transitions_per_temperature < 0:
            raise PreconditionError(
                f"transitions_per_temperature must be non-negative, got {self.transitions_per_temperature}"
            )
        if not math.isfinite(self.mass) or self.mass <= 0:
            raise PreconditionError(f"mass must be positive, got {self.mass}")


def _as_u64(value: int, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int | np.integer):
        raise PreconditionError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if not 0 <= value <= UINT64_MASK:
        raise PreconditionError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return value


@dataclass(frozen=True)
class RngStream:
    """Seed provenance of one independent random stream.

    The stream is `SeedSequence(entropy=seed, spawn_key=(stream_id, *sub_keys))`,
    so distinct `(seed, stream_id)` pairs give independent generators and the
    same pair always reproduces the same draws.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", _as_u64(self.seed, "seed"))
        object.__setattr__(self, "stream_id", _as_u64(self.stream_id, "stream_id"))

    def generator(self, *sub_keys: int) -> np.random.Generator:
        keys = (self.stream_id, *(_as_u64(k, "sub_key") for k in sub_keys))
        return np.random.default_rng(np.random.SeedSequence(entropy=self.seed, spawn_key=keys))

    def child(self, *sub_keys: int) -> "RngStream":
        """A stream with the same seed and a stream id hashed from `sub_keys`."""
        digest = hashlib.blake2b(digest_size=8)
        for key in (self.stream_id, *sub_keys):
            digest.update(_as_u64(key, "sub_key").to_bytes(8, "little"))
        return RngStream(seed=self.seed, stream_id=int.from_bytes(digest.digest(), "little"))


@dataclass(frozen=True)
class LeapfrogResult:
    position: NDArray[np.float64]
    momentum: NDArray[np.float64]
    diverged: NDArray[np.bool_]
    gradient: NDArray[np.float64]

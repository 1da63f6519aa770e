from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from qpaths.entity.sampling import RngStream


@dataclass(frozen=True)
class AisResult:
    """Outcome of one AIS run.

    `log_weights` holds the valid chains only, in chain order; chains whose
    increments went NaN are counted in `n_invalid` and dropped.
    `acceptance_rates[t - 1]` is the mean HMC acceptance at temperature t.
    """

    log_weights: NDArray[np.float64]
    log_ratio_estimate: float
    ess: float
    seed: RngStream
    n_chains: int
    n_invalid: int = 0
    acceptance_rates: NDArray[np.float64] | None = None
    per_step_log_increments: NDArray[np.float64] | None = None

    @property
    def z_estimate(self) -> float:
        return float(np.exp(self.log_ratio_estimate))


@dataclass(frozen=True)
class BdmcResult:
    lower: float
    upper: float
    forward: AisResult
    reverse: AisResult

    @property
    def gap(self) -> float:
        return self.upper - self.lower

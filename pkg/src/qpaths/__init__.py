"""Public root API for the reusable `qpaths` package.

Only `run_ais` is re-exported from the package root.

All other building blocks are imported from their concrete modules so that
`qpaths` does not become an absolute import bucket. Examples:

- `from qpaths.deformed_math import ln_q, exp_q, log_power_mean`
- `from qpaths.densities import make_gaussian, make_student_t, q_from_nu`
- `from qpaths.entity.path import QPath, Schedule`
- `from qpaths.paths import log_density_at, linear_schedule`
- `from qpaths.divergence import alpha_divergence, gauss_legendre_grid`
- `from qpaths.sampler import hmc_transition, leapfrog`
- `from qpaths.ais_engine import run_bdmc, enumerate_discrete_ais`
"""

from qpaths.ais_engine import run_ais

__all__ = ["run_ais"]

"""Exception hierarchy shared by every `qpaths` module.

Each concrete error also subclasses the builtin exception a caller would
naturally catch, so `except ValueError` keeps working for domain and
precondition failures.
"""


class QPathsError(Exception):
    """Base class for all errors raised by `qpaths`."""


class DomainError(QPathsError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class DegenerateInputError(DomainError):
    """A denominator vanished or an exp_q clamp became active mid-computation."""


class GradientUndefinedError(DomainError):
    """The log-density gradient was requested where the density is zero."""


class PreconditionError(QPathsError, ValueError):
    """A documented caller contract was violated."""


class KernelNotInvariantError(PreconditionError):
    """A discrete transition kernel does not leave its target invariant."""

    def __init__(self, t: int, max_abs_error: float):
        super().__init__(
            f"Kernel for temperature index t={t} is not invariant for its q-path "
            f"distribution (max abs error {max_abs_error:.3e})"
        )
        self.t = t
        self.max_abs_error = max_abs_error


class ConstructionError(QPathsError, ValueError):
    """A density specification cannot be turned into a handle."""


class CapabilityError(QPathsError, TypeError):
    """A density handle lacks a capability the operation needs."""


class RoutingError(QPathsError, ValueError):
    """The request must be served by a different operation."""


class MassCaptureError(QPathsError, ValueError):
    """A quadrature grid does not capture the mass of a density."""


class NumericalFailureError(QPathsError, RuntimeError):
    """Too many AIS chains produced invalid (NaN) log-weights."""

    def __init__(self, n_invalid: int, n_chains: int, budget: float):
        super().__init__(
            f"{n_invalid} of {n_chains} chains produced NaN log-increments, "
            f"exceeding the {budget:.0%} invalid-chain budget"
        )
        self.n_invalid = n_invalid
        self.n_chains = n_chains
        self.budget = budget

"""
Exception hierarchy for spatial-mem

Every failure raised by the library derives from SpatialMemError so the CLI
can map it onto an exit code:
- ConfigError, DatasetError  -> exit 2
- NumericalError and subclasses -> exit 3
- ConvergenceError -> exit 4
"""
from typing import Optional, Sequence


class SpatialMemError(Exception):
    """Base class for all spatial-mem failures"""


class ConfigError(SpatialMemError, ValueError):
    """Invalid or incomplete run configuration"""

    def __init__(self, message: str, errors: Optional[Sequence[str]] = None):
        self.errors = list(errors or [])
        if self.errors:
            message = message + "\n" + "\n".join(f"  - {e}" for e in self.errors)
        super().__init__(message)


class DatasetError(SpatialMemError, ValueError):
    """Malformed spatial dataset or unreadable data file"""


class DuplicateLocationError(DatasetError):
    """Two observations share the same coordinates"""

    def __init__(self, i: int, j: int):
        self.indices = (i, j)
        super().__init__(f"Duplicate location at rows {i} and {j}")


class NumericalError(SpatialMemError, ArithmeticError):
    """A numerical routine could not produce a valid result"""


class NotPositiveDefiniteError(NumericalError):
    """Cholesky factorization met a non-positive pivot"""

    def __init__(self, pivot: int, value: Optional[float] = None):
        self.pivot = pivot
        self.value = value
        detail = f" (pivot value {value:.3e})" if value is not None else ""
        super().__init__(f"Matrix not positive definite at pivot {pivot}{detail}")


class SamplerError(NumericalError):
    """Numerical failure inside an MCMC sweep"""

    def __init__(self, iteration: int, cause: Exception):
        self.iteration = iteration
        self.cause = cause
        super().__init__(f"Sampler failed at iteration {iteration}: {cause}")


class ConvergenceError(SpatialMemError):
    """Chains failed the PSRF convergence gate"""

    def __init__(self, offenders: dict, threshold: float):
        self.offenders = dict(offenders)
        self.threshold = threshold
        listing = ", ".join(f"{k}={v:.3f}" for k, v in self.offenders.items())
        super().__init__(f"PSRF above {threshold}: {listing}")

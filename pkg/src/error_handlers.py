"""Module to handle errors and degeneracy flags of the measurement pipeline."""

import logging
from enum import Enum
from functools import wraps
from typing import Callable, NamedTuple

from custom_console import print_to_console
from visualisation import OutputStyle

logger = logging.getLogger(__name__)


class ProbeError(Exception):
    """Base exception for probe errors."""

    exit_code = 1

    def __init__(self, message: str) -> None:
        self.message = message
        super().__init__(self.message)


class ValidationError(ProbeError):
    """Exception for inputs that break a contract of the toolkit."""


class BundleIOError(ProbeError):
    """Exception for files that cannot be read or written."""

    exit_code = 2


class ParseError(BundleIOError):
    """Exception for malformed CSV or JSON documents."""


class NonFiniteInputError(ValidationError):
    """Exception for samples holding NaN or infinite values."""

    def __init__(self, where: str) -> None:
        super().__init__(f"Non-finite values found in {where}.")


class NonFiniteFeatureError(ValidationError):
    """Exception for feature files holding NaN or infinite values."""

    def __init__(self, row: int) -> None:
        super().__init__(f"Non-finite feature value in row {row}.")


class InvalidPercentageError(ValidationError):
    """Exception for a percentage outside (0, 100]."""

    def __init__(self, p: float) -> None:
        super().__init__(f"Percentage must be in (0, 100], got {p}.")


class InvalidNeighborhoodError(ValidationError):
    """Exception for a neighborhood size outside [1, N - 1]."""

    def __init__(self, n: int, size: int) -> None:
        super().__init__(f"Neighborhood size must be in [1, {size - 1}], got {n}.")


class DimensionMismatchError(ValidationError):
    """Exception for matrices or label lists of incompatible shapes."""


class InsufficientPointsError(ValidationError):
    """Exception for manifolds with too few samples for a measure."""


class InvalidSpecError(ValidationError):
    """Exception for synthetic manifold parameters out of range."""


class ConvergenceFailureError(ValidationError):
    """Exception for a power iteration that did not converge."""


class EmptyTrainSetError(ValidationError):
    """Exception for an empty training split."""

    def __init__(self) -> None:
        super().__init__("Training set is empty.")


class KTooLargeError(ValidationError):
    """Exception for a neighbor count larger than the training set."""

    def __init__(self, k: int, size: int) -> None:
        super().__init__(f"k={k} exceeds the training set size {size}.")


class SingleClassTrainSetError(ValidationError):
    """Exception for a training split holding a single category."""

    def __init__(self) -> None:
        super().__init__("Linear SVM needs at least 2 categories in the training set.")


class DegenerateKernelError(ValidationError):
    """Exception for a kernel whose training distances are all zero."""

    def __init__(self) -> None:
        super().__init__("All pairwise training distances are zero; the kernel is degenerate.")


class LengthMismatchError(ValidationError):
    """Exception for a feature file whose row count differs from its metadata."""

    def __init__(self, rows: int, samples: int) -> None:
        super().__init__(f"Feature file has {rows} rows but metadata lists {samples} samples.")


class DuplicatePoseError(ValidationError):
    """Exception for two samples of one instance sharing a pose."""

    def __init__(self, instance: str, pose_deg: float) -> None:
        super().__init__(f"Instance '{instance}' has more than one sample at pose {pose_deg} deg.")


class UsageError(ValidationError):
    """Exception for a command line that does not follow the grammar."""


class Flag(Enum):
    """Degeneracy markers attached to results instead of raising."""

    DEGENERATE_SPECTRUM = "degenerate-spectrum"
    DEGENERATE_MANIFOLD = "degenerate-manifold"
    BANDWIDTH_FALLBACK = "bandwidth-fallback"
    ZERO_ROW_NORM = "zero-row-norm"
    RANK_DEFICIENT = "kpls-rank-deficient"
    KPLS_SINGULAR_SYSTEM = "kpls-singular-system"
    DEGENERATE_GRAM = "degenerate-gram"
    TPS_LAMBDA_ESCALATED = "tps-lambda-escalated"
    TPS_SINGULAR_SYSTEM = "tps-singular-system"
    TPS_TOO_FEW_POINTS = "tps-too-few-points"


class FlaggedValue(NamedTuple):
    """A measure value together with the flags raised while computing it."""

    value: float
    flags: tuple[Flag, ...] = ()


def command_error(func: Callable[..., int]) -> Callable[..., int]:
    """Decorator to turn errors of a command into an exit code."""

    @wraps(func)
    def inner(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except ProbeError as e:
            print_to_console(e.message, style=OutputStyle.ERROR)
            return e.exit_code
        except OSError as e:
            print_to_console(f"I/O error: {e}", style=OutputStyle.ERROR)
            return BundleIOError.exit_code
        except (ValueError, KeyError, TypeError, IndexError) as e:
            logger.debug("Unexpected error in %s", func.__name__, exc_info=True)
            print_to_console(f"Error: Invalid input ({e}). Check it and try again.", style=OutputStyle.ERROR)
            return ValidationError.exit_code

    return inner

"""Knob defaults for the local and global measures."""

import os
from dataclasses import asdict, dataclass
from typing import Any, Optional

from error_handlers import ValidationError

THREADS_ENV_VAR = "MANIFOLD_PROBE_THREADS"

DEFAULT_P = 90.0
DEFAULT_KPLS_D = 5
DEFAULT_TPS_LAMBDA = 1e-6
DEFAULT_K_VALUES = (1, 3, 5, 7, 9)
DEFAULT_SVM_C_GRID = (0.01, 0.1, 1.0, 10.0)
DEFAULT_SVM_HOLDOUT = 0.2
DEFAULT_RIDGE = 1e-3
BANDWIDTH_POLICY = "median"


@dataclass(frozen=True)
class LocalConfig:
    """Knobs of the instance-specific measures."""

    neighborhood_n: Optional[int] = None
    """Pose neighborhood size of the kernels. None means N // 4 (at least 2) per instance."""
    p: float = DEFAULT_P
    """Percentage of the nuclear norm for Effective-p."""
    kpls_d: int = DEFAULT_KPLS_D
    """Number of KPLS components."""
    tps_lambda: float = DEFAULT_TPS_LAMBDA
    """TPS regularization before escalation."""
    bandwidth_policy: str = BANDWIDTH_POLICY
    seed: int = 0

    def as_dict(self) -> dict[str, Any]:
        """Returns the knobs as a JSON friendly dict."""
        data = asdict(self)
        data["neighborhood_n"] = "auto" if self.neighborhood_n is None else self.neighborhood_n
        return data


@dataclass(frozen=True)
class GlobalConfig:
    """Knobs of the object-view manifold probes."""

    k_values: tuple[int, ...] = DEFAULT_K_VALUES
    svm_c_grid: tuple[float, ...] = DEFAULT_SVM_C_GRID
    svm_holdout: float = DEFAULT_SVM_HOLDOUT
    ridge: float = DEFAULT_RIDGE
    bandwidth_policy: str = BANDWIDTH_POLICY
    seed: int = 0

    def as_dict(self) -> dict[str, Any]:
        """Returns the knobs as a JSON friendly dict."""
        data = asdict(self)
        data["k_values"] = list(self.k_values)
        data["svm_c_grid"] = list(self.svm_c_grid)
        return data


def resolve_neighborhood(size: int, requested: Optional[int] = None) -> int:
    """Returns the neighborhood size used for a manifold of `size` samples.

    param: size: Number of samples N.
    param: requested: Explicit size, or None for N // 4 with a minimum of 2.
    return: int: The neighborhood size, never above N - 1.
    """
    if requested is not None:
        return requested
    return min(max(2, size // 4), size - 1)


def worker_count() -> int:
    """Reads the worker cap from the environment. 0 or unset means one worker per CPU."""
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        count = int(raw)
    except ValueError as e:
        raise ValidationError(f"{THREADS_ENV_VAR} must be an integer, got '{raw}'.") from e
    if count < 0:
        raise ValidationError(f"{THREADS_ENV_VAR} must not be negative, got {count}.")
    return count or (os.cpu_count() or 1)

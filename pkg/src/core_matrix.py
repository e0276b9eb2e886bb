"""Sample matrices of view manifolds and their spectral measures."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from error_handlers import (
    DuplicatePoseError,
    InsufficientPointsError,
    InvalidPercentageError,
    NonFiniteInputError,
    ValidationError,
)

logger = logging.getLogger(__name__)

MIN_SAMPLES = 3
# Tolerance for the cumulative ratio test of Effective-p; absorbs rounding of the cumulative sum.
RATIO_TOLERANCE = 1e-12


def _frozen(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ManifoldSlice:
    """The samples of one object instance, sorted by pose.

    Row i of `samples` is the feature vector observed at pose `poses[i]` (radians in [0, 2*pi)).
    """

    instance_id: str
    category: str
    poses: np.ndarray
    samples: np.ndarray

    def __post_init__(self) -> None:
        poses = _frozen(self.poses).reshape(-1)
        samples = _frozen(self.samples)
        if samples.ndim != 2:
            raise ValidationError(f"Samples of '{self.instance_id}' must be a matrix.")
        if samples.shape[0] != poses.shape[0]:
            raise ValidationError(
                f"Instance '{self.instance_id}' has {samples.shape[0]} samples but {poses.shape[0]} poses."
            )
        if poses.shape[0] < MIN_SAMPLES:
            raise InsufficientPointsError(
                f"Instance '{self.instance_id}' needs at least {MIN_SAMPLES} samples, got {poses.shape[0]}."
            )
        if not np.all(np.isfinite(samples)):
            raise NonFiniteInputError(f"samples of '{self.instance_id}'")
        if not np.all(np.isfinite(poses)) or np.any(poses < 0) or np.any(poses >= 2 * np.pi):
            raise ValidationError(f"Poses of '{self.instance_id}' must be finite angles in [0, 2*pi).")
        steps = np.diff(poses)
        if np.any(steps == 0):
            raise DuplicatePoseError(self.instance_id, float(np.rad2deg(poses[1:][steps == 0][0])))
        if np.any(steps < 0):
            raise ValidationError(f"Samples of '{self.instance_id}' must be sorted by ascending pose.")
        object.__setattr__(self, "poses", poses)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_unsorted(
        cls, instance_id: str, category: str, poses: Sequence[float], samples: np.ndarray
    ) -> "ManifoldSlice":
        """Builds a slice after ordering rows by ascending pose.

        param: poses: Pose angles in radians, any order.
        param: samples: Matrix with one row per pose.
        return: ManifoldSlice: The pose ordered slice.
        """
        poses = np.asarray(poses, dtype=float)
        order = np.argsort(poses, kind="stable")
        return cls(instance_id, category, poses[order], np.asarray(samples, dtype=float)[order])

    @property
    def size(self) -> int:
        """Number of samples N."""
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        """Feature dimensionality d."""
        return self.samples.shape[1]


@dataclass(frozen=True)
class CenteredBasis:
    """Centered samples re-expressed in the orthonormal basis of their own span.

    `rebased` is N x N with column i holding sample i, the same convention as the sample matrix.
    """

    rebased: np.ndarray
    spectrum: np.ndarray
    mean: np.ndarray

    @property
    def size(self) -> int:
        """Number of samples N."""
        return self.rebased.shape[1]

    @property
    def points(self) -> np.ndarray:
        """The rebased samples as rows (N x N)."""
        return self.rebased.T


def center_and_rebase(manifold: ManifoldSlice) -> CenteredBasis:
    """Centers a slice and rotates it onto the basis spanning its sample matrix.

    The rotation keeps every pairwise distance, so all later measures see the same geometry
    in N dimensions whatever the original feature dimensionality.

    param: manifold: The slice to transform.
    return: CenteredBasis: Rebased samples, zero padded spectrum and the feature mean.
    """
    samples = manifold.samples
    if not np.all(np.isfinite(samples)):
        raise NonFiniteInputError(f"samples of '{manifold.instance_id}'")
    size = manifold.size
    mean = samples.mean(axis=0)
    if not np.any(np.ptp(samples, axis=0)):
        # constant rows: the mean may differ from the rows by rounding
        centered = np.zeros_like(samples)
    else:
        centered = samples - mean

    # the sample matrix holds one sample per column
    sample_matrix = centered.T
    basis, singular_values, _ = scipy.linalg.svd(sample_matrix, full_matrices=False, lapack_driver="gesvd")
    projected = basis.T @ sample_matrix

    rebased = np.zeros((size, size))
    rebased[: projected.shape[0], :] = projected
    spectrum = np.zeros(size)
    spectrum[: singular_values.shape[0]] = np.sort(singular_values)[::-1]
    return CenteredBasis(rebased=_frozen(rebased), spectrum=_frozen(spectrum), mean=_frozen(mean))


def nuclear_norm(basis: CenteredBasis) -> float:
    """Spread of the manifold: the sum of the singular values of the centered sample matrix."""
    return float(np.sum(basis.spectrum))


def effective_p(basis: CenteredBasis, p: float) -> int:
    """Smallest number of leading singular values whose sum reaches p percent of the nuclear norm.

    A zero spectrum (collapsed manifold) gives 0.

    param: basis: The centered basis.
    param: p: Percentage in (0, 100].
    return: int: Effective dimensionality in [0, N].
    """
    if not 0 < p <= 100:
        raise InvalidPercentageError(p)
    total = nuclear_norm(basis)
    if total == 0:
        return 0
    ratios = np.cumsum(basis.spectrum) / total
    reached = ratios >= p / 100 - RATIO_TOLERANCE
    return int(np.argmax(reached)) + 1

"""Pose-neighborhood kernels of view manifolds and their alignment measures."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from core_matrix import CenteredBasis
from error_handlers import DimensionMismatchError, Flag, InvalidNeighborhoodError, ValidationError

logger = logging.getLogger(__name__)

# Pose distances are compared at this many decimals so ties break by index, not by rounding noise.
POSE_DECIMALS = 9


class KernelSource(Enum):
    """Where the kernel values come from."""

    MANIFOLD = "manifold"
    IDEAL_CIRCLE = "ideal-circle"
    PREDICTED = "predicted"


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric affinity matrix with the knobs it was built with."""

    values: np.ndarray
    neighborhood_n: int
    bandwidth: float
    source: KernelSource
    flags: tuple[Flag, ...] = ()

    @property
    def size(self) -> int:
        """Number of rows N."""
        return self.values.shape[0]


KernelLike = Union[KernelMatrix, np.ndarray]


def circle_embedding(poses: Sequence[float]) -> np.ndarray:
    """Places each pose on the unit circle, one (cos, sin) row per pose."""
    angles = np.asarray(poses, dtype=float).reshape(-1)
    return np.column_stack([np.cos(angles), np.sin(angles)])


def circular_distance(poses: Sequence[float]) -> np.ndarray:
    """Matrix of wrapped absolute pose differences, in [0, pi]."""
    angles = np.asarray(poses, dtype=float).reshape(-1)
    diff = np.mod(np.abs(angles[:, None] - angles[None, :]), 2 * np.pi)
    return np.minimum(diff, 2 * np.pi - diff)


def pose_neighborhood_mask(poses: Sequence[float], neighborhood_n: int) -> np.ndarray:
    """Boolean mask of the n nearest pose neighbors of every sample, symmetrized, diagonal included.

    param: poses: Pose angles in radians.
    param: neighborhood_n: Neighbors per sample, in [1, N - 1].
    return: np.ndarray: N x N boolean mask.
    """
    distance = circular_distance(poses)
    size = distance.shape[0]
    if not 1 <= neighborhood_n <= size - 1:
        raise InvalidNeighborhoodError(neighborhood_n, size)
    rounded = np.round(distance, POSE_DECIMALS)
    np.fill_diagonal(rounded, np.inf)
    order = np.argsort(rounded, axis=1, kind="stable")[:, :neighborhood_n]
    mask = np.zeros((size, size), dtype=bool)
    mask[np.repeat(np.arange(size), neighborhood_n), order.reshape(-1)] = True
    mask |= mask.T
    np.fill_diagonal(mask, True)
    return mask


def _masked_gaussian(
    distance: np.ndarray, mask: np.ndarray, neighborhood_n: int, source: KernelSource
) -> KernelMatrix:
    flags = []
    off_diagonal = np.triu(mask, k=1)
    masked = distance[off_diagonal]
    masked = masked[masked > 0]
    bandwidth = float(np.median(masked)) if masked.size else 0.0
    if bandwidth == 0:
        bandwidth = 1.0
        flags.append(Flag.BANDWIDTH_FALLBACK)
        logger.debug("Median masked distance is zero, bandwidth set to 1")
    values = np.exp(-(distance**2) / (2 * bandwidth**2)) * mask
    values = np.maximum(values, values.T)
    np.fill_diagonal(values, 1.0)
    return KernelMatrix(values, neighborhood_n, bandwidth, source, tuple(flags))


def ideal_circle_kernel(poses: Sequence[float], neighborhood_n: int) -> KernelMatrix:
    """Kernel of the ideal view manifold: the poses placed on the unit circle.

    param: poses: Distinct pose angles in radians.
    param: neighborhood_n: Pose neighbors kept per sample.
    return: KernelMatrix: Gaussian affinities on chordal distances inside the pose neighborhood.
    """
    mask = pose_neighborhood_mask(poses, neighborhood_n)
    distance = squareform(pdist(circle_embedding(poses)))
    return _masked_gaussian(distance, mask, neighborhood_n, KernelSource.IDEAL_CIRCLE)


def manifold_kernel(basis: CenteredBasis, poses: Sequence[float], neighborhood_n: int) -> KernelMatrix:
    """Kernel of a view manifold: feature distances, neighborhoods taken from the pose labels.

    A collapsed manifold (all samples equal) gives the mask itself as kernel, flagged.

    param: basis: Rebased samples of the manifold.
    param: poses: Pose angles of the samples, same order.
    param: neighborhood_n: Pose neighbors kept per sample.
    return: KernelMatrix: Gaussian affinities on feature distances inside the pose neighborhood.
    """
    poses = np.asarray(poses, dtype=float).reshape(-1)
    if basis.size != poses.shape[0]:
        raise DimensionMismatchError(f"Basis has {basis.size} samples but {poses.shape[0]} poses were given.")
    mask = pose_neighborhood_mask(poses, neighborhood_n)
    points = basis.points
    if not np.any(np.ptp(points, axis=0)):
        logger.debug("All feature distances are zero, returning the neighborhood mask")
        return KernelMatrix(
            mask.astype(float), neighborhood_n, 1.0, KernelSource.MANIFOLD, (Flag.DEGENERATE_MANIFOLD,)
        )
    distance = squareform(pdist(points))
    return _masked_gaussian(distance, mask, neighborhood_n, KernelSource.MANIFOLD)


def kernel_values(kernel: KernelLike) -> np.ndarray:
    """Returns the square matrix behind a kernel or a raw array."""
    values = kernel.values if isinstance(kernel, KernelMatrix) else np.asarray(kernel, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValidationError(f"Kernel must be a square matrix, got shape {values.shape}.")
    return values


def _pair(a: KernelLike, b: KernelLike) -> tuple[np.ndarray, np.ndarray]:
    first, second = kernel_values(a), kernel_values(b)
    if first.shape != second.shape:
        raise DimensionMismatchError(f"Kernels differ in size: {first.shape} vs {second.shape}.")
    return first, second


def kta(a: KernelLike, b: KernelLike) -> float:
    """Kernel target alignment: Frobenius inner product over the product of Frobenius norms.

    Scale invariant in both arguments; 0 when either kernel is zero.
    """
    first, second = _pair(a, b)
    norms = np.linalg.norm(first) * np.linalg.norm(second)
    if norms == 0:
        return 0.0
    return float(np.sum(first * second) / norms)


def hsic(a: KernelLike, b: KernelLike) -> float:
    """Hilbert-Schmidt independence criterion, trace(A H B H) / (N - 1)^2 with H the centering matrix."""
    first, second = _pair(a, b)
    size = first.shape[0]
    if size < 2:
        raise DimensionMismatchError("HSIC needs kernels with at least 2 rows.")
    centering = np.eye(size) - np.full((size, size), 1.0 / size)
    return float(np.trace(first @ centering @ second @ centering) / (size - 1) ** 2)

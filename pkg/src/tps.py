"""Regularized thin plate spline from the unit circle onto a view manifold."""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist

from config import DEFAULT_TPS_LAMBDA
from core_matrix import CenteredBasis
from error_handlers import DimensionMismatchError, Flag, InsufficientPointsError, ValidationError
from kernel_measures import circle_embedding

logger = logging.getLogger(__name__)

MIN_POINTS = 4
AFFINE_TERMS = 3
SINGULAR_RCOND = 1e-14
MAX_ESCALATIONS = 3


def radial_basis(r: np.ndarray) -> np.ndarray:
    """TPS radial function phi(r) = r^3."""
    return r**3


def reciprocal_condition(matrix: np.ndarray) -> float:
    """sigma_min / sigma_max of a matrix, 0 for a zero matrix."""
    if matrix.size == 0:
        return 0.0
    singular_values = scipy.linalg.svdvals(matrix)
    if singular_values[0] == 0:
        return 0.0
    return float(singular_values[-1] / singular_values[0])


@dataclass(frozen=True)
class TpsFit:
    """Coefficients of the mapping gamma(x) = C psi(x), psi(x) = [phi(|x - z_1|) ... phi(|x - z_N|), 1, x^T]^T.

    Columns 0..N-1 of `coeff_C` weight the radial terms, column N the constant and the last two the
    circle coordinates.
    """

    coeff_C: np.ndarray
    centers_z: np.ndarray
    lam: float
    rcond_poly: float
    rcond_nonpoly: float
    flags: tuple[Flag, ...] = ()

    @property
    def nonpoly_block(self) -> np.ndarray:
        """Weights of the radial terms."""
        return self.coeff_C[:, : self.centers_z.shape[0]]

    @property
    def affine_block(self) -> np.ndarray:
        """Constant and linear coefficients."""
        return self.coeff_C[:, self.centers_z.shape[0] :]

    @property
    def linear_block(self) -> np.ndarray:
        """Coefficients multiplying the circle coordinates."""
        return self.coeff_C[:, self.centers_z.shape[0] + 1 :]

    def evaluate(self, poses: Sequence[float]) -> np.ndarray:
        """Maps poses, placed on the unit circle, through the fitted spline. One row per pose."""
        points = circle_embedding(poses)
        features = np.hstack(
            [radial_basis(cdist(points, self.centers_z)), np.ones((points.shape[0], 1)), points]
        )
        return features @ self.coeff_C.T


def _block_system(points: np.ndarray, lam: float) -> np.ndarray:
    size = points.shape[0]
    polynomial = np.hstack([np.ones((size, 1)), points])
    radial = radial_basis(cdist(points, points)) + lam * np.eye(size)
    return np.block([[radial, polynomial], [polynomial.T, np.zeros((AFFINE_TERMS, AFFINE_TERMS))]])


def fit_tps(basis: CenteredBasis, poses: Sequence[float], lam: float = DEFAULT_TPS_LAMBDA) -> TpsFit:
    """Fits the spline sending each pose's circle point to its rebased sample.

    The centers are the circle points themselves. When the block system is numerically singular
    lambda is raised tenfold, up to three times; past that a least squares solve is used. Both are flagged.

    param: basis: Rebased samples of the manifold.
    param: poses: Pose angles of the samples, same order.
    param: lam: Regularization added to the radial block.
    return: TpsFit: Coefficients and the conditioning of their polynomial and radial blocks.
    """
    poses = np.asarray(poses, dtype=float).reshape(-1)
    size = basis.size
    if size != poses.shape[0]:
        raise DimensionMismatchError(f"Basis has {size} samples but {poses.shape[0]} poses were given.")
    if size < MIN_POINTS:
        raise InsufficientPointsError(f"TPS needs at least {MIN_POINTS} samples, got {size}.")
    if lam < 0:
        raise ValidationError(f"TPS lambda must not be negative, got {lam}.")

    points = circle_embedding(poses)
    rhs = np.vstack([basis.points, np.zeros((AFFINE_TERMS, size))])
    flags = []
    solution = None
    for attempt in range(MAX_ESCALATIONS + 1):
        lhs = _block_system(points, lam)
        if reciprocal_condition(lhs) >= SINGULAR_RCOND:
            solution = scipy.linalg.solve(lhs, rhs)
            break
        if attempt < MAX_ESCALATIONS:
            lam = lam * 10 if lam > 0 else DEFAULT_TPS_LAMBDA
            if Flag.TPS_LAMBDA_ESCALATED not in flags:
                flags.append(Flag.TPS_LAMBDA_ESCALATED)
            logger.debug("TPS block system singular, lambda raised to %g", lam)
    if solution is None:
        flags.append(Flag.TPS_SINGULAR_SYSTEM)
        solution, *_ = scipy.linalg.lstsq(lhs, rhs)

    coeffs = solution.T
    return TpsFit(
        coeff_C=coeffs,
        centers_z=points,
        lam=lam,
        rcond_poly=reciprocal_condition(coeffs[:, size + 1 :]),
        rcond_nonpoly=reciprocal_condition(coeffs[:, :size]),
        flags=tuple(flags),
    )


def tps_rcond_measures(fit: TpsFit) -> tuple[float, float]:
    """Returns (rcond_poly, rcond_nonpoly) of a fit."""
    return fit.rcond_poly, fit.rcond_nonpoly

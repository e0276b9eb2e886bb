"""Kernel partial least squares from a manifold kernel onto the ideal circle kernel."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from config import DEFAULT_KPLS_D
from error_handlers import ConvergenceFailureError, DimensionMismatchError, Flag, FlaggedValue, ValidationError
from kernel_measures import KernelLike, kernel_values, kta

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 500
TOLERANCE = 1e-10
# Residual energy below this fraction of the initial one counts as exhausted.
RANK_TOLERANCE = 1e-12
SINGULAR_RCOND = 1e-12


@dataclass(frozen=True)
class KplsModel:
    """Scores, auxiliary vectors and Gram matrices of a KPLS fit.

    `scores_T` and `aux_U` have one column per extracted component; fewer than `components_d`
    when the residual ran out first (flagged).
    """

    components_d: int
    scores_T: np.ndarray
    aux_U: np.ndarray
    gram_G0: np.ndarray
    gram_Gd: np.ndarray
    row_norms_b: np.ndarray
    flags: tuple[Flag, ...] = ()

    @property
    def extracted(self) -> int:
        """Number of components actually extracted."""
        return self.scores_T.shape[1]


def row_normalized_gram(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
    """Gram matrix of the kernel rows divided elementwise by the outer product of the row norms.

    return: tuple: The Gram matrix, the row norms used, and whether a zero norm was replaced by 1.
    """
    norms = np.linalg.norm(values, axis=1)
    zero = norms == 0
    norms = np.where(zero, 1.0, norms)
    return (values @ values.T) / np.outer(norms, norms), norms, bool(np.any(zero))


def _extract_component(gram: np.ndarray, response: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One NIPALS step: the unit score t maximizing covariance between the Gram and the response.

    The loop starts from the dominant eigenvector of Y^T G Y, which is its fixed point, so it only polishes.
    """
    weighted = response.T @ gram @ response
    weighted = (weighted + weighted.T) / 2
    size = weighted.shape[0]
    _, vectors = scipy.linalg.eigh(weighted, subset_by_index=[size - 1, size - 1])
    aux = response @ vectors[:, 0]
    if np.linalg.norm(aux) == 0:
        aux = response[:, int(np.argmax(np.linalg.norm(response, axis=0)))]
    aux = aux / np.linalg.norm(aux)

    previous = None
    for _ in range(MAX_ITERATIONS):
        score = gram @ aux
        score = score / np.linalg.norm(score)
        aux = response @ (response.T @ score)
        aux_norm = np.linalg.norm(aux)
        if aux_norm == 0:
            return score, aux
        aux = aux / aux_norm
        if previous is not None and np.linalg.norm(score - previous) < TOLERANCE:
            return score, aux
        previous = score
    raise ConvergenceFailureError(
        f"KPLS power iteration did not converge in {MAX_ITERATIONS} iterations at tolerance {TOLERANCE}."
    )


def fit_kpls(input_kernel: KernelLike, target_kernel: KernelLike, d: int = DEFAULT_KPLS_D) -> KplsModel:
    """Extracts d components of the input kernel most correlated with the target kernel rows.

    After each component the Gram matrix is deflated as (I - t t^T) G (I - t t^T) and the response
    as (I - t t^T) Y.

    param: input_kernel: Kernel of the view manifold.
    param: target_kernel: Kernel of the ideal circle, its rows are the response.
    param: d: Number of components, 1 <= d < N.
    return: KplsModel: The fitted model, flagged if it stopped early.
    """
    values, response = kernel_values(input_kernel), kernel_values(target_kernel)
    if values.shape != response.shape:
        raise DimensionMismatchError(f"Kernels differ in size: {values.shape} vs {response.shape}.")
    size = values.shape[0]
    if not 1 <= d < size:
        raise ValidationError(f"KPLS components must be in [1, {size - 1}], got {d}.")

    flags = []
    gram_0, norms, replaced = row_normalized_gram(values)
    if replaced:
        flags.append(Flag.ZERO_ROW_NORM)
    gram, residual = gram_0.copy(), response.copy()
    initial_energy = np.linalg.norm(gram_0)
    response_energy = np.linalg.norm(response)
    scores, auxes = [], []

    if initial_energy == 0:
        flags.append(Flag.DEGENERATE_GRAM)
    else:
        for _ in range(d):
            if (
                np.linalg.norm(gram) <= RANK_TOLERANCE * initial_energy
                or np.linalg.norm(residual) <= RANK_TOLERANCE * response_energy
                or np.linalg.norm(gram @ residual) <= RANK_TOLERANCE * initial_energy * response_energy
            ):
                break
            score, aux = _extract_component(gram, residual)
            scores.append(score)
            auxes.append(aux)
            projector = np.eye(size) - np.outer(score, score)
            gram = projector @ gram @ projector
            residual = projector @ residual
    if len(scores) < d and Flag.DEGENERATE_GRAM not in flags:
        flags.append(Flag.RANK_DEFICIENT)
        logger.debug("KPLS stopped after %d of %d components", len(scores), d)

    return KplsModel(
        components_d=d,
        scores_T=np.column_stack(scores) if scores else np.zeros((size, 0)),
        aux_U=np.column_stack(auxes) if auxes else np.zeros((size, 0)),
        gram_G0=gram_0,
        gram_Gd=gram,
        row_norms_b=norms,
        flags=tuple(flags),
    )


def predict_target(model: KplsModel, target_kernel: KernelLike) -> np.ndarray:
    """Maps the input kernel rows onto the target rows: G0 U (T^T G0 U)^-1 T^T Y.

    raises: ValidationError: If the model has no component or T^T G0 U is numerically singular.
    """
    response = kernel_values(target_kernel)
    if model.extracted == 0:
        raise ValidationError("KPLS model has no extracted component.")
    inner = model.scores_T.T @ model.gram_G0 @ model.aux_U
    singular_values = scipy.linalg.svdvals(inner)
    if singular_values[0] == 0 or singular_values[-1] / singular_values[0] < SINGULAR_RCOND:
        raise ValidationError("KPLS prediction system T^T G0 U is singular.")
    weights = scipy.linalg.solve(inner, model.scores_T.T @ response)
    return model.gram_G0 @ model.aux_U @ weights


def kpls_regression_error(model: KplsModel, input_kernel: KernelLike, target_kernel: KernelLike) -> FlaggedValue:
    """Regression error delta = 1 - KTA(predicted target, target), clipped to [0, 1].

    A singular prediction system gives delta = 1, flagged.
    """
    values, response = kernel_values(input_kernel), kernel_values(target_kernel)
    if values.shape != model.gram_G0.shape or response.shape != model.gram_G0.shape:
        raise DimensionMismatchError("Kernels do not match the size of the fitted KPLS model.")
    try:
        predicted = predict_target(model, response)
    except ValidationError as e:
        logger.debug("%s Reporting delta = 1", e.message)
        return FlaggedValue(1.0, (Flag.KPLS_SINGULAR_SYSTEM,))
    return FlaggedValue(float(np.clip(1.0 - kta(predicted, response), 0.0, 1.0)))


def kpls_norm_ratio(model: KplsModel) -> FlaggedValue:
    """Residual Gram energy after the extracted components, relative to the initial energy."""
    initial = np.linalg.norm(model.gram_G0)
    if initial == 0:
        return FlaggedValue(0.0, (Flag.DEGENERATE_GRAM,))
    return FlaggedValue(float(min(np.linalg.norm(model.gram_Gd) / initial, 1.0)))

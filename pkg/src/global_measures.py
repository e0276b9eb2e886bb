"""Probes of the object-view manifold: KNN sweeps, linear SVM and kernel pose regression."""

import logging
import warnings
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist
from scipy.stats import circmean
from sklearn.exceptions import ConvergenceWarning
from sklearn.kernel_ridge import KernelRidge
from sklearn.model_selection import train_test_split
from sklearn.svm import LinearSVC

from config import DEFAULT_K_VALUES, DEFAULT_RIDGE, DEFAULT_SVM_C_GRID, DEFAULT_SVM_HOLDOUT
from error_handlers import (
    DegenerateKernelError,
    DimensionMismatchError,
    EmptyTrainSetError,
    KTooLargeError,
    NonFiniteFeatureError,
    SingleClassTrainSetError,
    ValidationError,
)

logger = logging.getLogger(__name__)

THRESHOLD_NARROW_DEG = 22.5
THRESHOLD_WIDE_DEG = 45.0
REGIME_ACCURACY_FLOOR = 0.8
REGIME_GAP_TOLERANCE = 0.05


class Split(Enum):
    """Which side of the evaluation a feature set is on."""

    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class LabeledFeatureSet:
    """Pooled samples of many instances with their category and pose labels."""

    features: np.ndarray
    categories: np.ndarray
    poses: np.ndarray
    instance_ids: np.ndarray
    split: Split = Split.TRAIN

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=float)
        if features.ndim != 2:
            raise ValidationError("Features must be a matrix with one row per sample.")
        size = features.shape[0]
        categories = np.asarray(self.categories, dtype=str).reshape(-1)
        poses = np.asarray(self.poses, dtype=float).reshape(-1)
        instance_ids = np.asarray(self.instance_ids, dtype=str).reshape(-1)
        if not categories.shape[0] == poses.shape[0] == instance_ids.shape[0] == size:
            raise DimensionMismatchError("Features, categories, poses and instance ids must have equal length.")
        bad_rows = np.flatnonzero(~np.all(np.isfinite(features), axis=1))
        if bad_rows.size:
            raise NonFiniteFeatureError(int(bad_rows[0]))
        if not np.all(np.isfinite(poses)):
            raise ValidationError("Pose labels must be finite.")
        for name, value in (("features", features), ("categories", categories), ("poses", poses)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        instance_ids.setflags(write=False)
        object.__setattr__(self, "instance_ids", instance_ids)

    @property
    def size(self) -> int:
        """Number of samples M."""
        return self.features.shape[0]

    @property
    def category_set(self) -> list[str]:
        """Sorted distinct categories."""
        return sorted(set(self.categories.tolist()))


@dataclass(frozen=True)
class PoseMetrics:
    """Summary of angular errors: mean normalized error and the two threshold accuracies."""

    aaai_mean: float
    within_22_5: float
    within_45: float


@dataclass(frozen=True)
class KnnSweepResult:
    """KNN accuracies per k and the drop from the smallest to the largest k."""

    k_values: list[int]
    category_accuracy: list[float]
    pose_accuracy: list[float]
    pose_aaai: list[float] = field(default_factory=list)

    @property
    def category_gap(self) -> float:
        """Category accuracy lost when k grows to its largest value. Positive is a drop."""
        return self.category_accuracy[0] - self.category_accuracy[-1]

    @property
    def pose_gap(self) -> float:
        """Pose accuracy lost when k grows to its largest value. Positive is a drop."""
        return self.pose_accuracy[0] - self.pose_accuracy[-1]


class ManifoldRegime(Enum):
    """Reading of the KNN gaps in terms of how instance view manifolds are arranged."""

    ALIGNED_WITHIN_CATEGORY = "aligned-within-category"
    SEPARATED_INSTANCES = "separated-instances"
    ALIGNED_ACROSS_CATEGORIES = "aligned-across-categories"
    TANGLED = "tangled"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class LinearCategoryClassifier:
    """One-vs-rest linear SVM with the regularization picked on the hold-out."""

    model: LinearSVC
    c: float

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Category with the largest decision value for every row."""
        return self.model.predict(np.asarray(features, dtype=float))

    def accuracy(self, test: LabeledFeatureSet) -> float:
        """Fraction of test samples whose category is predicted correctly."""
        return float(np.mean(self.predict(test.features) == test.categories))


@dataclass(frozen=True)
class PoseRegressionResult:
    """Predicted angles of the test samples and their error summary."""

    predictions: np.ndarray
    metrics: PoseMetrics
    bandwidth: float


def pose_error(theta_pred: Union[float, np.ndarray], theta_true: Union[float, np.ndarray]) -> tuple:
    """Normalized circular error min(|a - b|, 2 pi - |a - b|) / pi and the same error in degrees.

    Works on scalars and on arrays of equal shape.
    """
    diff = np.mod(np.abs(np.asarray(theta_pred, dtype=float) - np.asarray(theta_true, dtype=float)), 2 * np.pi)
    aaai = np.minimum(diff, 2 * np.pi - diff) / np.pi
    if np.ndim(aaai) == 0:
        return float(aaai), float(180.0 * aaai)
    return aaai, 180.0 * aaai


def pose_metrics(theta_pred: Sequence[float], theta_true: Sequence[float]) -> PoseMetrics:
    """Mean AAAI score and the fractions of samples under 22.5 and 45 degrees of error."""
    pred, true = np.asarray(theta_pred, dtype=float), np.asarray(theta_true, dtype=float)
    if pred.shape != true.shape:
        raise DimensionMismatchError(f"{pred.size} predicted angles for {true.size} true angles.")
    if pred.size == 0:
        raise ValidationError("No angles to compare.")
    if not (np.all(np.isfinite(pred)) and np.all(np.isfinite(true))):
        raise ValidationError("Angles must be finite.")
    aaai, degrees = pose_error(pred, true)
    return PoseMetrics(
        aaai_mean=float(np.mean(aaai)),
        within_22_5=float(np.mean(degrees < THRESHOLD_NARROW_DEG)),
        within_45=float(np.mean(degrees < THRESHOLD_WIDE_DEG)),
    )


def _vote(labels: np.ndarray) -> str:
    """Majority label; ties go to the label of the nearest neighbor among the tied ones."""
    counts = Counter(labels.tolist())
    best = max(counts.values())
    for label in labels:
        if counts[label] == best:
            return str(label)
    raise ValidationError("Empty neighborhood.")


def _neighbor_order(train: LabeledFeatureSet, features: np.ndarray, k: int) -> np.ndarray:
    if train.size == 0:
        raise EmptyTrainSetError()
    if k > train.size:
        raise KTooLargeError(k, train.size)
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or features.shape[1] != train.features.shape[1]:
        raise DimensionMismatchError("Train and test features differ in dimensionality.")
    return np.argsort(cdist(features, train.features), axis=1, kind="stable")[:, :k]


def _predict_from(train: LabeledFeatureSet, neighbors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    categories = np.array([_vote(train.categories[row]) for row in neighbors])
    poses = circmean(train.poses[neighbors], high=2 * np.pi, low=0.0, axis=1)
    return categories, np.mod(poses, 2 * np.pi)


def knn_predict(train: LabeledFeatureSet, features: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Category vote and circular mean pose of the k nearest training samples of every row.

    Neighbors come from a stable sort of Euclidean distances, so equal distances keep training order.
    """
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}.")
    return _predict_from(train, _neighbor_order(train, features, k))


def knn_sweep(
    train: LabeledFeatureSet, test: LabeledFeatureSet, k_values: Sequence[int] = DEFAULT_K_VALUES
) -> KnnSweepResult:
    """Evaluates KNN category and pose estimation for each k.

    A pose counts as correct under 22.5 degrees of error.

    param: train: Labeled samples searched for neighbors.
    param: test: Labeled samples to predict.
    param: k_values: Ascending neighborhood sizes.
    return: KnnSweepResult: Accuracies per k.
    """
    k_values = [int(k) for k in k_values]
    if not k_values or any(k < 1 for k in k_values) or k_values != sorted(set(k_values)):
        raise ValidationError(f"k values must be distinct, positive and ascending, got {k_values}.")
    if test.size == 0:
        raise ValidationError("Test set is empty.")
    order = _neighbor_order(train, test.features, k_values[-1])

    category_accuracy, pose_accuracy, pose_aaai = [], [], []
    for k in k_values:
        categories, poses = _predict_from(train, order[:, :k])
        metrics = pose_metrics(poses, test.poses)
        category_accuracy.append(float(np.mean(categories == test.categories)))
        pose_accuracy.append(metrics.within_22_5)
        pose_aaai.append(metrics.aaai_mean)
    return KnnSweepResult(k_values, category_accuracy, pose_accuracy, pose_aaai)


def interpret_knn(
    result: KnnSweepResult, accuracy_floor: float = REGIME_ACCURACY_FLOOR, gap_tolerance: float = REGIME_GAP_TOLERANCE
) -> ManifoldRegime:
    """Reads the category and pose gaps as an arrangement of the view manifolds.

    The reading only holds when the smallest-k classifiers are accurate.
    """
    if min(result.category_accuracy[0], result.pose_accuracy[0]) < accuracy_floor:
        return ManifoldRegime.INCONCLUSIVE
    category_small = result.category_gap <= gap_tolerance
    pose_small = result.pose_gap <= gap_tolerance
    if category_small and pose_small:
        return ManifoldRegime.ALIGNED_WITHIN_CATEGORY
    if category_small:
        return ManifoldRegime.SEPARATED_INSTANCES
    if pose_small:
        return ManifoldRegime.ALIGNED_ACROSS_CATEGORIES
    return ManifoldRegime.TANGLED


def _fit_svc(features: np.ndarray, labels: np.ndarray, c: float, seed: int) -> LinearSVC:
    model = LinearSVC(C=c, loss="hinge", dual=True, max_iter=20000, random_state=seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        model.fit(features, labels)
    if any(issubclass(w.category, ConvergenceWarning) for w in caught):
        logger.warning("Linear SVM with C=%g did not fully converge", c)
    return model


def train_linear_svm(
    train: LabeledFeatureSet,
    c_grid: Sequence[float] = DEFAULT_SVM_C_GRID,
    holdout: float = DEFAULT_SVM_HOLDOUT,
    seed: int = 0,
) -> LinearCategoryClassifier:
    """Trains one-vs-rest hinge loss linear classifiers for the categories.

    C is picked from `c_grid` by accuracy on a seeded hold-out of the training set (first best wins),
    then the classifier is refit on the whole training set.
    """
    categories = train.category_set
    if len(categories) < 2:
        raise SingleClassTrainSetError()
    labels = train.categories
    counts = Counter(labels.tolist())
    best_c = float(c_grid[0]) if len(c_grid) == 1 else None
    if best_c is None:
        stratify = labels if min(counts.values()) >= 2 else None
        try:
            fit_x, val_x, fit_y, val_y = train_test_split(
                train.features, labels, test_size=holdout, random_state=seed, stratify=stratify
            )
        except ValueError:
            fit_x, val_x, fit_y, val_y = train_test_split(
                train.features, labels, test_size=holdout, random_state=seed
            )
        if len(set(fit_y.tolist())) < 2:
            best_c = 1.0 if 1.0 in c_grid else float(c_grid[0])
            logger.warning("Hold-out split left a single category to fit, using C=%g", best_c)
        else:
            best_score = -1.0
            for c in c_grid:
                score = float(np.mean(_fit_svc(fit_x, fit_y, c, seed).predict(val_x) == val_y))
                logger.debug("Linear SVM C=%g hold-out accuracy %.4f", c, score)
                if score > best_score:
                    best_c, best_score = float(c), score
    return LinearCategoryClassifier(_fit_svc(train.features, labels, best_c, seed), best_c)


def median_bandwidth(features: np.ndarray) -> float:
    """Median of the nonzero pairwise Euclidean distances.

    raises: DegenerateKernelError: If every distance is zero.
    """
    distances = pdist(np.asarray(features, dtype=float)) if features.shape[0] > 1 else np.zeros(0)
    distances = distances[distances > 0]
    if distances.size == 0:
        raise DegenerateKernelError()
    return float(np.median(distances))


def kernel_pose_regression(
    train: LabeledFeatureSet, test: LabeledFeatureSet, ridge: float = DEFAULT_RIDGE
) -> PoseRegressionResult:
    """Gaussian kernel ridge regression of (cos, sin) of the pose, decoded with atan2.

    The bandwidth is the median training distance.
    """
    if train.size == 0:
        raise EmptyTrainSetError()
    if test.size == 0:
        raise ValidationError("Test set is empty.")
    if test.features.shape[1] != train.features.shape[1]:
        raise DimensionMismatchError("Train and test features differ in dimensionality.")
    bandwidth = median_bandwidth(train.features)
    model = KernelRidge(alpha=ridge, kernel="rbf", gamma=1.0 / (2 * bandwidth**2))
    model.fit(train.features, np.column_stack([np.cos(train.poses), np.sin(train.poses)]))
    outputs = model.predict(test.features)
    predictions = np.mod(np.arctan2(outputs[:, 1], outputs[:, 0]), 2 * np.pi)
    return PoseRegressionResult(predictions, pose_metrics(predictions, test.poses), bandwidth)

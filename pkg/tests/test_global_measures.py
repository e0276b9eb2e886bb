import numpy as np
import pytest
from scipy.spatial.distance import cdist

from error_handlers import (
    DegenerateKernelError,
    DimensionMismatchError,
    EmptyTrainSetError,
    KTooLargeError,
    NonFiniteFeatureError,
    SingleClassTrainSetError,
    ValidationError,
)
from global_measures import (
    KnnSweepResult,
    LabeledFeatureSet,
    ManifoldRegime,
    Split,
    interpret_knn,
    kernel_pose_regression,
    knn_predict,
    knn_sweep,
    median_bandwidth,
    pose_error,
    pose_metrics,
    train_linear_svm,
)


def ring_set(center: tuple[float, float], category: str, poses: np.ndarray, instance: str) -> LabeledFeatureSet:
    features = np.column_stack([center[0] + np.cos(poses), center[1] + np.sin(poses)])
    return LabeledFeatureSet(features, [category] * len(poses), poses, [instance] * len(poses))


def join(*sets: LabeledFeatureSet, split: Split = Split.TRAIN) -> LabeledFeatureSet:
    return LabeledFeatureSet(
        np.vstack([s.features for s in sets]),
        np.concatenate([s.categories for s in sets]),
        np.concatenate([s.poses for s in sets]),
        np.concatenate([s.instance_ids for s in sets]),
        split,
    )


def test_pose_error_examples() -> None:
    assert pose_error(0.0, 0.0) == (0.0, 0.0)
    assert pose_error(0.0, np.pi)[0] == pytest.approx(1.0)
    assert pose_error(0.0, 3 * np.pi / 2)[0] == pytest.approx(0.5)
    assert pose_error(0.1, 2 * np.pi - 0.1)[1] == pytest.approx(np.rad2deg(0.2))


def test_pose_error_in_degrees_matches_absolute_error(rng) -> None:
    first = rng.uniform(0, 360, 1000)
    second = rng.uniform(0, 360, 1000)
    difference = np.abs(first - second)
    expected = np.minimum(difference, 360 - difference)
    _, degrees = pose_error(np.deg2rad(first), np.deg2rad(second))
    np.testing.assert_allclose(degrees, expected, atol=1e-10)


def test_pose_metrics_of_identical_and_opposite_angles(rng) -> None:
    truth = rng.uniform(0, 2 * np.pi, 50)
    same = pose_metrics(truth, truth)
    assert (same.aaai_mean, same.within_22_5, same.within_45) == (0.0, 1.0, 1.0)
    opposite = pose_metrics(np.mod(truth + np.pi, 2 * np.pi), truth)
    assert opposite.aaai_mean == pytest.approx(1.0)
    assert opposite.within_22_5 == 0.0
    assert opposite.within_45 == 0.0


def test_pose_metrics_thresholds() -> None:
    truth = np.zeros(4)
    predicted = np.deg2rad([10.0, 30.0, 50.0, 350.0])
    metrics = pose_metrics(predicted, truth)
    assert metrics.within_22_5 == 0.5
    assert metrics.within_45 == 0.75
    with pytest.raises(DimensionMismatchError):
        pose_metrics([0.0], [0.0, 1.0])


def test_knn_self_neighbors(make_poses) -> None:
    train = ring_set((0, 0), "a", make_poses(12), "a1")
    result = knn_sweep(train, train, [1])
    assert result.category_accuracy == [1.0]
    assert result.pose_accuracy == [1.0]
    assert result.pose_aaai[0] == pytest.approx(0.0, abs=1e-12)


def test_knn_separated_instances(make_poses) -> None:
    poses = make_poses(24)
    train = join(ring_set((0, 0), "a", poses[::2], "a1"), ring_set((10, 0), "b", poses[::2], "b1"))
    test = join(ring_set((0, 0), "a", poses[1::2], "a1"), ring_set((10, 0), "b", poses[1::2], "b1"), split=Split.TEST)
    result = knn_sweep(train, test, [1, 3, 5])
    assert result.category_accuracy == [1.0, 1.0, 1.0]
    assert result.category_gap == 0.0
    assert result.pose_accuracy[0] == 1.0
    assert result.pose_gap >= 0.0


def test_knn_matches_exhaustive_enumeration(rng) -> None:
    train = LabeledFeatureSet(
        rng.standard_normal((20, 2)), rng.choice(["a", "b", "c"], 20), rng.uniform(0, 2 * np.pi, 20), ["x"] * 20
    )
    queries = rng.standard_normal((10, 2))
    categories, _ = knn_predict(train, queries, 3)
    for query, predicted in zip(queries, categories):
        distances = [(float(np.linalg.norm(query - row)), index) for index, row in enumerate(train.features)]
        nearest = [index for _, index in sorted(distances)[:3]]
        labels = [train.categories[i] for i in nearest]
        best = max(labels.count(label) for label in labels)
        assert predicted == next(label for label in labels if labels.count(label) == best)


def test_knn_argument_checks(make_poses) -> None:
    train = ring_set((0, 0), "a", make_poses(4), "a1")
    with pytest.raises(KTooLargeError):
        knn_sweep(train, train, [1, 5])
    with pytest.raises(ValidationError):
        knn_sweep(train, train, [3, 1])
    empty = LabeledFeatureSet(np.zeros((0, 2)), [], [], [])
    with pytest.raises(EmptyTrainSetError):
        knn_sweep(empty, train, [1])
    with pytest.raises(DimensionMismatchError):
        knn_predict(train, np.zeros((2, 3)), 1)


def test_feature_set_validation() -> None:
    with pytest.raises(NonFiniteFeatureError):
        LabeledFeatureSet(np.array([[0.0], [np.inf]]), ["a", "a"], [0.0, 1.0], ["i", "i"])
    with pytest.raises(DimensionMismatchError):
        LabeledFeatureSet(np.zeros((2, 1)), ["a"], [0.0, 1.0], ["i", "i"])


@pytest.mark.parametrize(
    "category, pose, expected",
    [
        ([0.95, 0.94], [0.9, 0.88], ManifoldRegime.ALIGNED_WITHIN_CATEGORY),
        ([0.95, 0.94], [0.9, 0.5], ManifoldRegime.SEPARATED_INSTANCES),
        ([0.95, 0.6], [0.9, 0.88], ManifoldRegime.ALIGNED_ACROSS_CATEGORIES),
        ([0.95, 0.6], [0.9, 0.5], ManifoldRegime.TANGLED),
        ([0.5, 0.5], [0.9, 0.9], ManifoldRegime.INCONCLUSIVE),
    ],
)
def test_interpret_knn(category, pose, expected) -> None:
    assert interpret_knn(KnnSweepResult([1, 9], category, pose)) is expected


def blobs(rng: np.random.Generator, size: int) -> LabeledFeatureSet:
    first = rng.normal(0.0, 0.5, (size, 2)) + [5.0, 5.0]
    second = rng.normal(0.0, 0.5, (size, 2)) - [5.0, 5.0]
    return LabeledFeatureSet(
        np.vstack([first, second]),
        ["a"] * size + ["b"] * size,
        rng.uniform(0, 2 * np.pi, 2 * size),
        [f"i{i}" for i in range(2 * size)],
    )


def test_linear_svm_separates_blobs(rng) -> None:
    classifier = train_linear_svm(blobs(rng, 40), seed=3)
    assert classifier.accuracy(blobs(rng, 20)) == 1.0
    assert classifier.c in (0.01, 0.1, 1.0, 10.0)


def test_linear_svm_on_shuffled_labels_is_at_chance(rng) -> None:
    def noise(size: int) -> LabeledFeatureSet:
        labels = np.repeat(["a", "b", "c", "d"], size // 4)
        rng.shuffle(labels)
        return LabeledFeatureSet(rng.standard_normal((size, 10)), labels, np.zeros(size), ["x"] * size)

    classifier = train_linear_svm(noise(400), seed=5)
    assert 0.15 <= classifier.accuracy(noise(400)) <= 0.35


def test_linear_svm_cannot_solve_xor(rng) -> None:
    def xor(size: int) -> LabeledFeatureSet:
        corners = np.array([[1, 1], [-1, -1], [1, -1], [-1, 1]], dtype=float)
        labels = np.array(["same", "same", "diff", "diff"])
        picks = np.arange(size) % 4
        features = corners[picks] + rng.normal(0.0, 0.1, (size, 2))
        return LabeledFeatureSet(features, labels[picks], np.zeros(size), ["x"] * size)

    classifier = train_linear_svm(xor(200), seed=0)
    assert classifier.accuracy(xor(100)) < 0.9


def test_linear_svm_needs_two_categories(make_poses) -> None:
    with pytest.raises(SingleClassTrainSetError):
        train_linear_svm(ring_set((0, 0), "a", make_poses(8), "a1"))


def test_pose_regression_interpolates_training_set(make_poses) -> None:
    train = ring_set((0, 0), "a", make_poses(36), "a1")
    result = kernel_pose_regression(train, train, ridge=1e-8)
    assert result.metrics.aaai_mean < 1e-3
    assert result.metrics.within_22_5 == 1.0


def test_pose_regression_matches_closed_form(rng) -> None:
    train = LabeledFeatureSet(rng.standard_normal((10, 3)), ["a"] * 10, rng.uniform(0, 2 * np.pi, 10), ["x"] * 10)
    test = LabeledFeatureSet(rng.standard_normal((4, 3)), ["a"] * 4, rng.uniform(0, 2 * np.pi, 4), ["x"] * 4)
    distances = cdist(train.features, train.features)
    bandwidth = np.median(distances[np.triu_indices(10, k=1)])
    gram = np.exp(-(distances**2) / (2 * bandwidth**2))
    targets = np.column_stack([np.cos(train.poses), np.sin(train.poses)])
    weights = np.linalg.solve(gram + 1e-3 * np.eye(10), targets)
    outputs = np.exp(-cdist(test.features, train.features, "sqeuclidean") / (2 * bandwidth**2)) @ weights
    expected = np.arctan2(outputs[:, 1], outputs[:, 0])

    result = kernel_pose_regression(train, test, ridge=1e-3)
    assert result.bandwidth == pytest.approx(bandwidth, rel=1e-12)
    aaai, _ = pose_error(result.predictions, expected)
    assert np.all(aaai < 1e-8)


def test_degenerate_bandwidth() -> None:
    with pytest.raises(DegenerateKernelError):
        median_bandwidth(np.ones((5, 3)))


def test_pose_error_is_symmetric_and_periodic(rng) -> None:
    first, second = rng.uniform(-10, 10, (2, 500))
    aaai, degrees = pose_error(first, second)
    swapped, _ = pose_error(second, first)
    np.testing.assert_allclose(swapped, aaai, atol=1e-12)
    for turns in (-2, 1, 3):
        shifted, shifted_degrees = pose_error(first + 2 * np.pi * turns, second)
        np.testing.assert_allclose(shifted, aaai, atol=1e-9)
        np.testing.assert_allclose(shifted_degrees, degrees, atol=1e-6)
    assert np.all((0 <= aaai) & (aaai <= 1))


def test_linear_svm_ignores_feature_scale_with_matching_c_grid(rng) -> None:
    train, test = blobs(rng, 40), blobs(rng, 20)
    scale = 10.0
    c_grid = (0.01, 0.1, 1.0, 10.0)
    scaled_train = LabeledFeatureSet(
        scale * train.features, train.categories, train.poses, train.instance_ids, train.split
    )
    plain = train_linear_svm(train, c_grid, seed=4)
    scaled = train_linear_svm(scaled_train, tuple(c / scale**2 for c in c_grid), seed=4)
    assert scaled.c == pytest.approx(plain.c / scale**2)
    np.testing.assert_array_equal(scaled.predict(scale * test.features), plain.predict(test.features))

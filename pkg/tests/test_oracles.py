"""Randomized equivalence checks against brute-force references on small instances."""

import numpy as np
import pytest
from scipy.spatial.distance import cdist
from scipy.stats import ortho_group

from analysis import measure_instance
from config import LocalConfig
from core_matrix import ManifoldSlice, center_and_rebase, nuclear_norm
from global_measures import LabeledFeatureSet, kernel_pose_regression, knn_predict, pose_error
from kernel_measures import kta
from tps import fit_tps

INSTANCES = 200


def random_instances(seed: int, count: int = INSTANCES):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        size = int(rng.integers(4, 9))
        dim = int(rng.integers(1, 9))
        yield rng, size, dim


def spaced_poses(rng: np.random.Generator, size: int) -> np.ndarray:
    offset = rng.uniform(0, 2 * np.pi / size)
    return offset + 2 * np.pi * np.arange(size) / size


def test_nuclear_norm_matches_eigendecomposition() -> None:
    for rng, size, dim in random_instances(1):
        samples = rng.standard_normal((size, dim)) * rng.uniform(0.1, 10)
        manifold = ManifoldSlice("r", "c", spaced_poses(rng, size), samples)
        centered = samples - samples.mean(axis=0)
        eigenvalues = np.linalg.eigvalsh(centered @ centered.T)
        eigenvalues[eigenvalues < 1e-10 * eigenvalues.max()] = 0.0
        assert nuclear_norm(center_and_rebase(manifold)) == pytest.approx(np.sqrt(eigenvalues).sum(), rel=1e-8)


def test_knn_matches_exhaustive_enumeration() -> None:
    for rng, size, dim in random_instances(2):
        train = LabeledFeatureSet(
            rng.standard_normal((size, dim)),
            rng.choice(["a", "b", "c"], size),
            rng.uniform(0, 2 * np.pi, size),
            ["x"] * size,
        )
        queries = rng.standard_normal((3, dim))
        k = int(rng.integers(1, size + 1))
        categories, poses = knn_predict(train, queries, k)
        for query, category, pose in zip(queries, categories, poses):
            ranked = sorted((float(np.sum((query - row) ** 2)), index) for index, row in enumerate(train.features))
            nearest = [index for _, index in ranked[:k]]
            labels = [train.categories[i] for i in nearest]
            best = max(labels.count(label) for label in labels)
            assert category == next(label for label in labels if labels.count(label) == best)
            angles = train.poses[nearest]
            expected = np.arctan2(np.sin(angles).mean(), np.cos(angles).mean())
            assert pose_error(pose, expected)[0] < 1e-9


def test_kernel_ridge_matches_dense_solve() -> None:
    for rng, size, dim in random_instances(3):
        train = LabeledFeatureSet(
            rng.standard_normal((size, dim)), ["a"] * size, rng.uniform(0, 2 * np.pi, size), ["x"] * size
        )
        test = LabeledFeatureSet(rng.standard_normal((2, dim)), ["a"] * 2, np.zeros(2), ["x"] * 2)
        bandwidth = np.median(cdist(train.features, train.features)[np.triu_indices(size, k=1)])
        gram = np.exp(-cdist(train.features, train.features, "sqeuclidean") / (2 * bandwidth**2))
        targets = np.column_stack([np.cos(train.poses), np.sin(train.poses)])
        weights = np.linalg.solve(gram + 1e-3 * np.eye(size), targets)
        outputs = np.exp(-cdist(test.features, train.features, "sqeuclidean") / (2 * bandwidth**2)) @ weights
        expected = np.arctan2(outputs[:, 1], outputs[:, 0])

        result = kernel_pose_regression(train, test, ridge=1e-3)
        assert result.bandwidth == pytest.approx(bandwidth, rel=1e-12)
        assert np.all(pose_error(result.predictions, expected)[0] < 1e-8)


def test_tps_matches_dense_solve() -> None:
    for rng, size, dim in random_instances(4):
        poses = spaced_poses(rng, size)
        basis = center_and_rebase(ManifoldSlice("r", "c", poses, rng.standard_normal((size, dim))))
        points = np.column_stack([np.cos(poses), np.sin(poses)])
        lhs = np.zeros((size + 3, size + 3))
        lhs[:size, :size] = cdist(points, points) ** 3 + 1e-6 * np.eye(size)
        lhs[:size, size:] = np.column_stack([np.ones(size), points])
        lhs[size:, :size] = lhs[:size, size:].T
        expected = np.linalg.solve(lhs, np.vstack([basis.points, np.zeros((3, basis.points.shape[1]))]))

        fit = fit_tps(basis, poses, lam=1e-6)
        scale = np.abs(expected).max()
        np.testing.assert_allclose(fit.coeff_C.T, expected, rtol=1e-8, atol=1e-8 * scale)


def test_kta_is_scale_invariant() -> None:
    for rng, size, _ in random_instances(5, count=50):
        first = rng.standard_normal((size, size))
        second = rng.standard_normal((size, size))
        scale = rng.uniform(1e-3, 1e3)
        assert kta(scale * first, second) == pytest.approx(kta(first, second), abs=1e-12)


def test_instance_measures_are_orthogonally_invariant() -> None:
    for rng, size, dim in random_instances(6, count=40):
        poses = spaced_poses(rng, size)
        samples = rng.standard_normal((size, dim))
        rotation = ortho_group.rvs(dim, random_state=rng) if dim > 1 else np.array([[-1.0]])
        config = LocalConfig(kpls_d=min(3, size - 1))
        original = measure_instance(ManifoldSlice("r", "c", poses, samples), config)
        rotated = measure_instance(ManifoldSlice("r", "c", poses, samples @ rotation), config)
        assert rotated.effective_p == original.effective_p
        for name, value in original.values().items():
            assert rotated.values()[name] == pytest.approx(value, rel=1e-9, abs=1e-9), name

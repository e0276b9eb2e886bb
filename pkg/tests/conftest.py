"""Shared fixtures: seeded generators and small circle manifolds."""

from typing import Callable

import numpy as np
import pytest

from core_matrix import ManifoldSlice


def equal_poses(size: int) -> np.ndarray:
    """Equally spaced poses in radians, built from degrees like the synthetic corpus."""
    return np.deg2rad(360.0 * np.arange(size) / size)


def circle_slice(
    size: int = 16, dim: int = 2, radius: float = 1.0, instance_id: str = "circle", category: str = "ring"
) -> ManifoldSlice:
    """A planar circle padded with zero coordinates up to `dim`."""
    poses = equal_poses(size)
    samples = np.zeros((size, dim))
    samples[:, 0] = radius * np.cos(poses)
    samples[:, 1] = radius * np.sin(poses)
    return ManifoldSlice(instance_id, category, poses, samples)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def make_circle() -> Callable[..., ManifoldSlice]:
    return circle_slice


@pytest.fixture
def make_poses() -> Callable[[int], np.ndarray]:
    return equal_poses


@pytest.fixture
def circle() -> ManifoldSlice:
    return circle_slice()


@pytest.fixture(autouse=True)
def single_worker(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("MANIFOLD_PROBE_THREADS", "1")

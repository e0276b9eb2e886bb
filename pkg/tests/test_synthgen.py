import numpy as np
import pytest
from scipy.spatial.distance import pdist

from error_handlers import InvalidSpecError
from synthgen import SynthSpec, corpus_specs, default_corpus, generate, parameters


def planar_circle_distances(size: int) -> np.ndarray:
    theta = parameters(size)
    return pdist(np.column_stack([np.cos(theta), np.sin(theta)]))


def test_projected_circle_is_isometric() -> None:
    manifold = generate(SynthSpec(family=1, n_points=100, dim=10, seed=7))
    assert manifold.dim == 10
    np.testing.assert_allclose(pdist(manifold.samples), planar_circle_distances(100), atol=1e-9)


def test_sphere_family_starts_on_equator() -> None:
    manifold = generate(SynthSpec(family=4, radius_r=50.0))
    np.testing.assert_allclose(manifold.samples[0], [50.0, 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(manifold.samples, axis=1), 50.0)


def test_collapsed_family_tiles_a_quarter() -> None:
    manifold = generate(SynthSpec(family=10, n_points=100, dim=10, seed=1))
    rows, counts = np.unique(manifold.samples, axis=0, return_counts=True)
    assert rows.shape[0] == 25
    assert np.all(counts == 4)


def test_poses_are_equally_spaced() -> None:
    manifold = generate(SynthSpec(family=8, n_points=8, dim=4))
    np.testing.assert_allclose(np.diff(manifold.poses), np.pi / 4)
    assert manifold.poses[0] == 0.0


def test_broken_family_has_a_large_gap() -> None:
    samples = generate(SynthSpec(family=7)).samples
    gaps = np.linalg.norm(np.diff(samples, axis=0), axis=1)
    assert gaps.max() >= 5 * np.median(gaps)


def test_noise_defaults() -> None:
    assert SynthSpec(family=5).sigma == 0.01
    assert SynthSpec(family=10).sigma == 0.01
    assert SynthSpec(family=4).sigma == 0.0
    assert SynthSpec(family=5, noise_sigma=0.2).sigma == 0.2


def test_generation_is_deterministic() -> None:
    spec = SynthSpec(family=9, n_points=20, dim=100, seed=123)
    np.testing.assert_array_equal(generate(spec).samples, generate(spec).samples)
    other = SynthSpec(family=9, n_points=20, dim=100, seed=124)
    assert not np.array_equal(generate(spec).samples, generate(other).samples)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"family": 0},
        {"family": 11},
        {"family": 1, "n_points": 3},
        {"family": 3, "dim": 4},
        {"family": 1, "dim": 1},
        {"family": 4, "radius_r": 0.0},
        {"family": 5, "noise_sigma": -0.1},
        {"family": 8, "seed": -1},
    ],
)
def test_invalid_specs(kwargs) -> None:
    with pytest.raises(InvalidSpecError):
        SynthSpec(**kwargs)


def test_corpus_grid() -> None:
    specs = corpus_specs(0)
    assert len(specs) == 7 + 8 + 1 + 4 + 4 + 4 + 4 + 5 + 10 + 5
    counts = {family: sum(1 for s in specs if s.family == family) for family in range(1, 11)}
    assert counts == {1: 7, 2: 8, 3: 1, 4: 4, 5: 4, 6: 4, 7: 4, 8: 5, 9: 10, 10: 5}
    assert len({s.instance_id for s in specs}) == len(specs)
    assert len({s.seed for s in specs}) == len(specs)


def test_corpus_is_reproducible() -> None:
    first = default_corpus(5)
    second = default_corpus(5)
    assert [spec for spec, _ in first] == [spec for spec, _ in second]
    for (_, a), (_, b) in zip(first, second):
        np.testing.assert_array_equal(a.samples, b.samples)
        np.testing.assert_array_equal(a.poses, b.poses)


def test_corpus_seed_does_not_change_circle_geometry() -> None:
    first = [m for spec, m in default_corpus(1) if spec.family == 1]
    second = [m for spec, m in default_corpus(2) if spec.family == 1]
    for a, b in zip(first, second):
        assert not np.array_equal(a.samples, b.samples)
        np.testing.assert_allclose(pdist(a.samples), pdist(b.samples), atol=1e-9)

"""Seeded generators of the ten synthetic view manifold families.

Randomness comes from numpy's PCG64 bit generator seeded with the 64-bit `SynthSpec.seed`,
so a corpus reproduces on any platform running the same numpy major version.

Families:
    1, 2   unit circle orthogonally projected into `dim` dimensions
    3      unit circle lifted onto the surface z = sin(3x) cos(2y)^2
    4, 5   circle on a sphere of radius r, phi = pi/4 sin(theta) + pi/2 (5 adds N(0, 0.01) noise)
    6      phi = pi/4 sin(5 theta) + pi/2
    7      phi = pi/4 tan(0.75 theta) + pi/2, broken near the pole of tan
    8      uniform random points in [0, 1)
    9      standard normal random points
    10     n/4 points from N(0, 0.01), tiled to n samples
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core_matrix import ManifoldSlice
from error_handlers import InvalidSpecError

logger = logging.getLogger(__name__)

FAMILIES = range(1, 11)
SPHERE_FAMILIES = (4, 5, 6, 7)
SURFACE_FAMILIES = (3, 4, 5, 6, 7)
NOISE_SIGMA = 0.01
# Keeps the tan deformation of family 7 off the poles of the sphere.
POLE_MARGIN = 1e-3

FAMILY1_DIMS = (10, 300, 600, 900, 1200, 1500, 1800)
FAMILY2_POINTS = (50, 150, 250, 350, 450, 550, 650, 750)
FAMILY2_DIM = 500
SPHERE_RADII = (1.0, 50.0, 100.0, 150.0)
RANDOM_DIMS = (10, 100, 500, 1000, 4000)
FAMILY9_POINTS = tuple(range(20, 201, 20))
FAMILY9_DIM = 100
CORPUS_POINTS = 100


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic manifold."""

    family: int
    n_points: int = CORPUS_POINTS
    dim: int = 3
    radius_r: float = 1.0
    noise_sigma: Optional[float] = None
    """Noise of family 5 or spread of the family 10 seed points. None means 0.01 for those families, 0 otherwise."""
    seed: int = 0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise InvalidSpecError(f"Family must be between 1 and 10, got {self.family}.")
        if self.n_points < 4:
            raise InvalidSpecError(f"A synthetic manifold needs at least 4 points, got {self.n_points}.")
        if self.family in SURFACE_FAMILIES and self.dim != 3:
            raise InvalidSpecError(f"Family {self.family} lives in 3 dimensions, got dim={self.dim}.")
        if self.family in (1, 2) and self.dim < 2:
            raise InvalidSpecError(f"Family {self.family} needs dim >= 2, got {self.dim}.")
        if self.dim < 1:
            raise InvalidSpecError(f"Dimension must be positive, got {self.dim}.")
        if not self.radius_r > 0:
            raise InvalidSpecError(f"Radius must be positive, got {self.radius_r}.")
        if self.noise_sigma is not None and not self.noise_sigma >= 0:
            raise InvalidSpecError(f"Noise sigma must not be negative, got {self.noise_sigma}.")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpecError(f"Seed must be a 64-bit unsigned integer, got {self.seed}.")

    @property
    def sigma(self) -> float:
        """Noise level actually used."""
        if self.noise_sigma is not None:
            return self.noise_sigma
        return NOISE_SIGMA if self.family in (5, 10) else 0.0

    @property
    def instance_id(self) -> str:
        """Name of the generated manifold, unique within the default corpus."""
        name = f"family{self.family:02d}-n{self.n_points}-d{self.dim}"
        if self.family in SPHERE_FAMILIES:
            name += f"-r{self.radius_r:g}"
        return name

    @property
    def category(self) -> str:
        """Category label of the generated manifold."""
        return f"family-{self.family:02d}"


def parameters(n_points: int) -> np.ndarray:
    """Equally spaced angles 2 pi k / n, built from degrees so they survive the bundle format unchanged."""
    return np.deg2rad(360.0 * np.arange(n_points) / n_points)


def random_orthonormal(rng: np.random.Generator, dim: int, columns: int) -> np.ndarray:
    """dim x columns matrix with orthonormal columns, from the QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((dim, columns)))
    return q * np.sign(np.diag(r))


def _sphere(theta: np.ndarray, phi: np.ndarray, radius: float) -> np.ndarray:
    return radius * np.column_stack([np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)])


def _deformation(family: int, theta: np.ndarray) -> np.ndarray:
    if family in (4, 5):
        return np.pi / 4 * np.sin(theta) + np.pi / 2
    if family == 6:
        return np.pi / 4 * np.sin(5 * theta) + np.pi / 2
    offset = np.clip(np.pi / 4 * np.tan(0.75 * theta), -(np.pi / 2 - POLE_MARGIN), np.pi / 2 - POLE_MARGIN)
    return offset + np.pi / 2


def generate(spec: SynthSpec) -> ManifoldSlice:
    """Generates the manifold described by `spec`; sample k sits at pose 2 pi k / n.

    param: spec: Family and parameters.
    return: ManifoldSlice: The samples, deterministic for a given spec.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    theta = parameters(spec.n_points)
    family = spec.family

    if family in (1, 2):
        samples = np.column_stack([np.cos(theta), np.sin(theta)]) @ random_orthonormal(rng, spec.dim, 2).T
    elif family == 3:
        x, y = np.cos(theta), np.sin(theta)
        samples = np.column_stack([x, y, np.sin(3 * x) * np.cos(2 * y) ** 2])
    elif family in SPHERE_FAMILIES:
        samples = _sphere(theta, _deformation(family, theta), spec.radius_r)
        if family == 5:
            # noise is absolute, added after scaling by r
            logger.debug("Adding N(0, %g) noise after radius scaling", spec.sigma)
            samples = samples + rng.normal(0.0, spec.sigma, samples.shape)
    elif family == 8:
        samples = rng.random((spec.n_points, spec.dim))
    elif family == 9:
        samples = rng.standard_normal((spec.n_points, spec.dim))
    else:
        portion = max(spec.n_points // 4, 1)
        seeds = rng.normal(0.0, spec.sigma, (portion, spec.dim))
        samples = seeds[np.arange(spec.n_points) % portion]

    return ManifoldSlice(spec.instance_id, spec.category, theta, samples)


def corpus_specs(seed: int) -> list[SynthSpec]:
    """Every parameterization of the synthetic corpus, each with a seed derived from `seed`."""
    grid = [(1, CORPUS_POINTS, dim, 1.0) for dim in FAMILY1_DIMS]
    grid += [(2, n, FAMILY2_DIM, 1.0) for n in FAMILY2_POINTS]
    grid += [(3, CORPUS_POINTS, 3, 1.0)]
    grid += [(family, CORPUS_POINTS, 3, r) for family in SPHERE_FAMILIES for r in SPHERE_RADII]
    grid += [(8, CORPUS_POINTS, dim, 1.0) for dim in RANDOM_DIMS]
    grid += [(9, n, FAMILY9_DIM, 1.0) for n in FAMILY9_POINTS]
    grid += [(10, CORPUS_POINTS, dim, 1.0) for dim in RANDOM_DIMS]

    specs = []
    for index, (family, n_points, dim, radius) in enumerate(grid):
        item_seed = int(np.random.SeedSequence([seed, index]).generate_state(1, dtype=np.uint64)[0])
        specs.append(SynthSpec(family=family, n_points=n_points, dim=dim, radius_r=radius, seed=item_seed))
    return specs


def default_corpus(seed: int = 0) -> list[tuple[SynthSpec, ManifoldSlice]]:
    """Generates the full synthetic corpus: 52 manifolds over the ten families."""
    return [(spec, generate(spec)) for spec in corpus_specs(seed)]

import numpy as np
import pytest
from scipy.spatial.distance import cdist

import tps
from core_matrix import ManifoldSlice, center_and_rebase
from error_handlers import DimensionMismatchError, Flag, InsufficientPointsError, ValidationError
from tps import fit_tps, reciprocal_condition, tps_rcond_measures


def dense_reference(poses: np.ndarray, targets: np.ndarray, lam: float) -> np.ndarray:
    """Solves [[K + lam I, P], [P^T, 0]] [W; A] = [Y; 0] with numpy, one row per coefficient."""
    points = np.column_stack([np.cos(poses), np.sin(poses)])
    size = points.shape[0]
    radial = cdist(points, points) ** 3 + lam * np.eye(size)
    polynomial = np.column_stack([np.ones(size), points])
    lhs = np.zeros((size + 3, size + 3))
    lhs[:size, :size] = radial
    lhs[:size, size:] = polynomial
    lhs[size:, :size] = polynomial.T
    rhs = np.vstack([targets, np.zeros((3, targets.shape[1]))])
    return np.linalg.solve(lhs, rhs)


def test_circle_maps_affinely(make_circle) -> None:
    manifold = make_circle(size=12, dim=6)
    basis = center_and_rebase(manifold)
    fit = fit_tps(basis, manifold.poses)
    np.testing.assert_allclose(fit.evaluate(manifold.poses), basis.points, atol=1e-8)
    assert np.linalg.norm(fit.nonpoly_block) <= 1e-6 * np.linalg.norm(fit.linear_block)
    assert fit.rcond_poly == pytest.approx(1.0, abs=1e-9)
    assert fit.flags == ()


def test_coefficients_match_dense_solve(rng, make_poses) -> None:
    poses = make_poses(8)
    manifold = ManifoldSlice("random", "c", poses, rng.standard_normal((8, 5)))
    basis = center_and_rebase(manifold)
    fit = fit_tps(basis, poses, lam=1e-6)
    expected = dense_reference(poses, basis.points, 1e-6)
    np.testing.assert_allclose(fit.coeff_C.T, expected, rtol=1e-8, atol=1e-8 * np.abs(expected).max())


def test_unregularized_fit_interpolates(rng, make_poses) -> None:
    poses = make_poses(10)
    basis = center_and_rebase(ManifoldSlice("random", "c", poses, rng.standard_normal((10, 4))))
    fit = fit_tps(basis, poses, lam=0.0)
    np.testing.assert_allclose(fit.evaluate(poses), basis.points, atol=1e-8)


def test_reciprocal_condition_extremes() -> None:
    assert reciprocal_condition(np.eye(2)) == pytest.approx(1.0)
    assert reciprocal_condition(np.array([[1.0, 0.0], [2.0, 0.0]])) == 0.0
    assert reciprocal_condition(np.zeros((3, 2))) == 0.0


def test_measures_are_the_fit_values(circle) -> None:
    fit = fit_tps(center_and_rebase(circle), circle.poses)
    assert tps_rcond_measures(fit) == (fit.rcond_poly, fit.rcond_nonpoly)
    assert fit.coeff_C.shape == (circle.size, circle.size + 3)
    assert fit.affine_block.shape == (circle.size, 3)


def test_singular_system_escalates_then_falls_back(monkeypatch, circle) -> None:
    monkeypatch.setattr(tps, "SINGULAR_RCOND", 2.0)
    fit = fit_tps(center_and_rebase(circle), circle.poses, lam=1e-6)
    assert fit.flags == (Flag.TPS_LAMBDA_ESCALATED, Flag.TPS_SINGULAR_SYSTEM)
    assert fit.lam == pytest.approx(1e-3)


def test_argument_checks(circle, make_poses, make_circle) -> None:
    basis = center_and_rebase(circle)
    with pytest.raises(DimensionMismatchError):
        fit_tps(basis, make_poses(circle.size + 1))
    with pytest.raises(ValidationError):
        fit_tps(basis, circle.poses, lam=-1.0)
    small = make_circle(size=3)
    with pytest.raises(InsufficientPointsError):
        fit_tps(center_and_rebase(small), small.poses)

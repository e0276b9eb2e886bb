"""Runs the instance-specific and object-view manifold measures over loaded data."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from config import BANDWIDTH_POLICY, GlobalConfig, LocalConfig, resolve_neighborhood, worker_count
from core_matrix import ManifoldSlice, center_and_rebase, effective_p, nuclear_norm
from error_handlers import Flag, ValidationError
from file_operations import FeatureBundle, GlobalMeasureReport, InstanceMeasures, LayerReport, MeasureReport
from global_measures import (
    LabeledFeatureSet,
    interpret_knn,
    kernel_pose_regression,
    knn_sweep,
    train_linear_svm,
)
from kernel_measures import hsic, ideal_circle_kernel, kta, manifold_kernel
from kpls import fit_kpls, kpls_norm_ratio, kpls_regression_error
from tps import MIN_POINTS as TPS_MIN_POINTS
from tps import fit_tps, tps_rcond_measures

logger = logging.getLogger(__name__)


def _check_policy(policy: str) -> None:
    if policy != BANDWIDTH_POLICY:
        raise ValidationError(f"Unknown bandwidth policy '{policy}', only '{BANDWIDTH_POLICY}' is supported.")


def measure_instance(manifold: ManifoldSlice, config: LocalConfig = LocalConfig()) -> InstanceMeasures:
    """Runs nuclear norm, Effective-p, KTA, HSIC, KPLS and TPS on one view manifold.

    Degeneracies do not stop the run; they end up in the `flags` of the result. Small instances get
    fewer KPLS components (at most N - 1), and below 4 samples the TPS conditioning is reported as 0.
    """
    _check_policy(config.bandwidth_policy)
    flags: list[Flag] = []
    basis = center_and_rebase(manifold)
    spread = nuclear_norm(basis)
    if spread == 0:
        flags.append(Flag.DEGENERATE_SPECTRUM)

    neighborhood = resolve_neighborhood(manifold.size, config.neighborhood_n)
    manifold_k = manifold_kernel(basis, manifold.poses, neighborhood)
    ideal_k = ideal_circle_kernel(manifold.poses, neighborhood)
    flags += manifold_k.flags + ideal_k.flags

    # at most N - 1 components fit in N samples
    components = min(config.kpls_d, manifold.size - 1)
    if components < config.kpls_d:
        flags.append(Flag.RANK_DEFICIENT)
        logger.debug("Instance '%s': KPLS reduced to %d components", manifold.instance_id, components)
    model = fit_kpls(manifold_k, ideal_k, components)
    delta = kpls_regression_error(model, manifold_k, ideal_k)
    ratio = kpls_norm_ratio(model)
    flags += model.flags + delta.flags + ratio.flags

    if manifold.size < TPS_MIN_POINTS:
        rcond_poly, rcond_nonpoly = 0.0, 0.0
        flags.append(Flag.TPS_TOO_FEW_POINTS)
    else:
        fit = fit_tps(basis, manifold.poses, config.tps_lambda)
        rcond_poly, rcond_nonpoly = tps_rcond_measures(fit)
        flags += fit.flags

    names = list(dict.fromkeys(flag.value for flag in flags))
    if names:
        logger.warning("Instance '%s' flagged: %s", manifold.instance_id, ", ".join(names))
    return InstanceMeasures(
        instance_id=manifold.instance_id,
        category=manifold.category,
        nuclear_norm=spread,
        effective_p=effective_p(basis, config.p),
        kta=kta(manifold_k, ideal_k),
        hsic=hsic(manifold_k, ideal_k),
        kpls_delta=delta.value,
        kpls_norm_ratio=ratio.value,
        tps_rcond_poly=rcond_poly,
        tps_rcond_nonpoly=rcond_nonpoly,
        flags=names,
    )


def measure_layer(layer: str, slices: Sequence[ManifoldSlice], config: LocalConfig = LocalConfig()) -> LayerReport:
    """Measures every slice of one layer on a thread pool; entries are ordered by instance id."""
    ids = [s.instance_id for s in slices]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"Layer '{layer}' holds the same instance id more than once.")
    ordered = sorted(slices, key=lambda s: s.instance_id)
    workers = max(1, min(worker_count(), len(ordered)))
    logger.info("Measuring %d instances of layer '%s' on %d workers", len(ordered), layer, workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        results = list(executor.map(lambda s: measure_instance(s, config), ordered))
    return LayerReport(layer, {m.instance_id: m for m in results})


def measure_local(bundles: Sequence[FeatureBundle], config: LocalConfig = LocalConfig()) -> MeasureReport:
    """Measures the instances of every bundle, grouping bundles by layer in first-seen order."""
    layers: dict[str, list[ManifoldSlice]] = {}
    for bundle in bundles:
        layers.setdefault(bundle.layer, []).extend(bundle.slices())
    return MeasureReport(
        config=config.as_dict(),
        layers=[measure_layer(layer, slices, config) for layer, slices in layers.items()],
    )


def measure_global(
    train: LabeledFeatureSet, test: LabeledFeatureSet, layer: str, config: GlobalConfig = GlobalConfig()
) -> GlobalMeasureReport:
    """Runs the KNN sweep, the linear SVM and kernel pose regression on a train/test pair."""
    _check_policy(config.bandwidth_policy)
    sweep = knn_sweep(train, test, config.k_values)
    classifier = train_linear_svm(train, config.svm_c_grid, config.svm_holdout, config.seed)
    regression = kernel_pose_regression(train, test, config.ridge)
    regime = interpret_knn(sweep)
    logger.info("Layer '%s': KNN regime %s", layer, regime.value)
    return GlobalMeasureReport(
        config=config.as_dict(),
        layer=layer,
        knn=sweep,
        svm_accuracy=classifier.accuracy(test),
        svm_c=classifier.c,
        pose=regression.metrics,
        bandwidth=regression.bandwidth,
        regime=regime.value,
    )

"""This module contains functions to save and load feature bundles, reports and plot rows."""

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd

from core_matrix import ManifoldSlice
from error_handlers import (
    BundleIOError,
    DuplicatePoseError,
    LengthMismatchError,
    NonFiniteFeatureError,
    ParseError,
    ValidationError,
)
from global_measures import KnnSweepResult, LabeledFeatureSet, PoseMetrics, Split

logger = logging.getLogger(__name__)

FEATURES_FILE = "features.csv"
META_FILE = "meta.json"
PLOT_SUFFIX = ".plot.csv"
FLOAT_FORMAT = "%.17g"
MEASURE_NAMES = (
    "nuclear_norm",
    "effective_p",
    "kta",
    "hsic",
    "kpls_delta",
    "kpls_norm_ratio",
    "tps_rcond_poly",
    "tps_rcond_nonpoly",
)
PLOT_COLUMNS = ["layer", "instance", "category", "measure", "value"]
# Steps tried around rad2deg(x) to find a degree value that converts back to x exactly.
DEGREE_SEARCH_STEPS = 4


@dataclass(frozen=True)
class FeatureBundleFile:
    """Paths of the two files of a feature bundle."""

    features_path: Path
    meta_path: Path

    @classmethod
    def in_dir(cls, directory: Union[str, Path]) -> "FeatureBundleFile":
        """The bundle stored in `directory` under the standard file names."""
        directory = Path(directory)
        return cls(directory / FEATURES_FILE, directory / META_FILE)


@dataclass(frozen=True)
class FeatureBundle:
    """A loaded bundle: labeled features of one layer."""

    name: str
    layer: str
    feature_set: LabeledFeatureSet

    def slices(self) -> list[ManifoldSlice]:
        """Groups the rows by instance into pose sorted slices, ordered by instance id."""
        data = self.feature_set
        result = []
        for instance in sorted(set(data.instance_ids.tolist())):
            rows = np.flatnonzero(data.instance_ids == instance)
            result.append(
                ManifoldSlice.from_unsorted(
                    instance, str(data.categories[rows[0]]), data.poses[rows], data.features[rows]
                )
            )
        return result


@dataclass
class InstanceMeasures:
    """All local measures of one instance, plus the flags raised computing them."""

    instance_id: str
    category: str
    nuclear_norm: float
    effective_p: int
    kta: float
    hsic: float
    kpls_delta: float
    kpls_norm_ratio: float
    tps_rcond_poly: float
    tps_rcond_nonpoly: float
    flags: list[str] = field(default_factory=list)

    def values(self) -> dict[str, Union[float, int]]:
        """The measures by name, in report order."""
        return {name: getattr(self, name) for name in MEASURE_NAMES}


@dataclass
class LayerReport:
    """Per-instance measures of one layer and their aggregates."""

    layer: str
    per_instance: dict[str, InstanceMeasures] = field(default_factory=dict)

    @property
    def aggregates(self) -> dict[str, dict[str, float]]:
        """Mean and population standard deviation of every measure over the instances."""
        if not self.per_instance:
            return {}
        measures = [self.per_instance[key] for key in sorted(self.per_instance)]
        result = {}
        for name in MEASURE_NAMES:
            values = np.array([getattr(m, name) for m in measures], dtype=float)
            result[name] = {"mean": float(np.mean(values)), "std": float(np.std(values))}
        return result


@dataclass
class MeasureReport:
    """Instance-specific measures of one or more layers with the configuration used."""

    config: dict[str, Any]
    layers: list[LayerReport] = field(default_factory=list)


@dataclass
class GlobalMeasureReport:
    """Object-view manifold probes of one train/test pair."""

    config: dict[str, Any]
    layer: str
    knn: KnnSweepResult
    svm_accuracy: float
    svm_c: float
    pose: PoseMetrics
    bandwidth: float
    regime: str


Report = Union[MeasureReport, GlobalMeasureReport]


def _degrees_for(radians: np.ndarray) -> np.ndarray:
    """Degree values that load back to exactly the given radians whenever such a value exists."""
    degrees = np.rad2deg(radians)
    for i, (value, target) in enumerate(zip(degrees, radians)):
        if np.deg2rad(value) == target:
            continue
        for direction in (np.inf, -np.inf):
            candidate = value
            for _ in range(DEGREE_SEARCH_STEPS):
                candidate = np.nextafter(candidate, direction)
                if np.deg2rad(candidate) == target:
                    degrees[i] = candidate
                    break
            if degrees[i] != value:
                break
    return degrees


def save_bundle(
    directory: Union[str, Path],
    features: np.ndarray,
    instance_ids: Sequence[str],
    categories: Sequence[str],
    poses: Sequence[float],
    name: str,
    layer: str,
) -> FeatureBundleFile:
    """Writes a feature bundle (CSV of features, JSON of labels) into `directory`.

    param: poses: Pose angles in radians; stored in degrees.
    return: FeatureBundleFile: The paths written.
    """
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or not features.shape[0] == len(instance_ids) == len(categories) == len(poses):
        raise ValidationError("Features, instance ids, categories and poses must describe the same rows.")
    bundle = FeatureBundleFile.in_dir(directory)
    degrees = _degrees_for(np.asarray(poses, dtype=float))
    meta = {
        "name": name,
        "layer": layer,
        "samples": [
            {"instance": str(instance), "category": str(category), "pose_deg": float(pose)}
            for instance, category, pose in zip(instance_ids, categories, degrees)
        ],
    }
    try:
        os.makedirs(bundle.features_path.parent, exist_ok=True)
        pd.DataFrame(features).to_csv(bundle.features_path, header=False, index=False, float_format=FLOAT_FORMAT)
        with open(bundle.meta_path, "w", encoding="utf-8") as meta_file:
            json.dump(meta, meta_file, indent=2, sort_keys=True)
            meta_file.write("\n")
    except OSError as e:
        raise BundleIOError(f"Cannot write bundle to '{directory}': {e}") from e
    return bundle


def save_slices(directory: Union[str, Path], slices: Sequence[ManifoldSlice], name: str, layer: str) -> FeatureBundleFile:
    """Writes manifold slices of equal dimensionality as one bundle."""
    if len({s.dim for s in slices}) > 1:
        raise ValidationError("All slices of a bundle must share the feature dimensionality.")
    return save_bundle(
        directory,
        np.vstack([s.samples for s in slices]),
        [s.instance_id for s in slices for _ in range(s.size)],
        [s.category for s in slices for _ in range(s.size)],
        np.concatenate([s.poses for s in slices]),
        name,
        layer,
    )


def _read_features(path: Path) -> np.ndarray:
    try:
        frame = pd.read_csv(path, header=None, dtype=float, float_precision="round_trip")
    except FileNotFoundError as e:
        raise BundleIOError(f"Feature file '{path}' not found.") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise ParseError(f"Malformed feature file '{path}': {e}") from e
    return frame.to_numpy(dtype=float)


def _read_meta(path: Path) -> dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as meta_file:
            meta = json.load(meta_file)
    except FileNotFoundError as e:
        raise BundleIOError(f"Metadata file '{path}' not found.") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"Malformed metadata file '{path}': {e}") from e
    if not isinstance(meta, dict) or not isinstance(meta.get("samples"), list):
        raise ParseError(f"Metadata file '{path}' must be an object with a 'samples' list.")
    for key in ("name", "layer"):
        if not isinstance(meta.get(key), str) or not meta[key]:
            raise ValidationError(f"Metadata field '{key}' must be a non-empty string.")
    for index, sample in enumerate(meta["samples"]):
        if not isinstance(sample, dict):
            raise ParseError(f"Sample {index} of '{path}' is not an object.")
        for key in ("instance", "category"):
            if not isinstance(sample.get(key), str) or not sample[key]:
                raise ValidationError(f"Sample {index}: '{key}' must be a non-empty string.")
        pose = sample.get("pose_deg")
        if isinstance(pose, bool) or not isinstance(pose, (int, float)) or not 0 <= pose < 360:
            raise ValidationError(f"Sample {index}: 'pose_deg' must be a number in [0, 360), got {pose!r}.")
    return meta


def load_bundle(bundle: FeatureBundleFile, split: Split = Split.TRAIN) -> FeatureBundle:
    """Loads and validates a feature bundle.

    param: bundle: Paths of the CSV and JSON files.
    param: split: Split recorded on the labeled feature set.
    return: FeatureBundle: Labels and features with poses in radians.
    """
    meta = _read_meta(bundle.meta_path)
    features = _read_features(bundle.features_path)
    samples = meta["samples"]
    if features.shape[0] != len(samples):
        raise LengthMismatchError(features.shape[0], len(samples))
    bad_rows = np.flatnonzero(~np.all(np.isfinite(features), axis=1))
    if bad_rows.size:
        raise NonFiniteFeatureError(int(bad_rows[0]))

    seen: dict[tuple[str, float], int] = {}
    categories: dict[str, str] = {}
    for sample in samples:
        key = (sample["instance"], float(sample["pose_deg"]))
        if key in seen:
            raise DuplicatePoseError(*key)
        seen[key] = 1
        if categories.setdefault(sample["instance"], sample["category"]) != sample["category"]:
            raise ValidationError(f"Instance '{sample['instance']}' is labeled with more than one category.")

    feature_set = LabeledFeatureSet(
        features=features,
        categories=[s["category"] for s in samples],
        poses=np.deg2rad(np.array([float(s["pose_deg"]) for s in samples])),
        instance_ids=[s["instance"] for s in samples],
        split=split,
    )
    logger.info("Loaded bundle '%s' (layer %s): %d samples x %d features", meta["name"], meta["layer"], *features.shape)
    return FeatureBundle(meta["name"], meta["layer"], feature_set)


def find_bundles(path: Union[str, Path]) -> list[FeatureBundleFile]:
    """Bundles under `path`: the bundle itself, or every bundle directory directly inside it, sorted by name."""
    path = Path(path)
    if (path / META_FILE).exists():
        return [FeatureBundleFile.in_dir(path)]
    if not path.is_dir():
        raise BundleIOError(f"Bundle path '{path}' does not exist.")
    bundles = [FeatureBundleFile.in_dir(child) for child in sorted(path.iterdir()) if (child / META_FILE).exists()]
    if not bundles:
        raise BundleIOError(f"No feature bundle found in '{path}'.")
    return bundles


def merge_feature_sets(sets: Sequence[LabeledFeatureSet], split: Split) -> LabeledFeatureSet:
    """Pools labeled feature sets of equal dimensionality."""
    if len({s.features.shape[1] for s in sets}) > 1:
        raise ValidationError("Bundles of one split must share the feature dimensionality.")
    return LabeledFeatureSet(
        features=np.vstack([s.features for s in sets]),
        categories=np.concatenate([s.categories for s in sets]),
        poses=np.concatenate([s.poses for s in sets]),
        instance_ids=np.concatenate([s.instance_ids for s in sets]),
        split=split,
    )


def report_to_dict(report: Report) -> dict[str, Any]:
    """JSON friendly form of a report."""
    if isinstance(report, MeasureReport):
        return {
            "kind": "local",
            "config": report.config,
            "layers": [
                {
                    "layer": layer.layer,
                    "per_instance": {
                        key: {k: v for k, v in asdict(m).items() if k != "instance_id"}
                        for key, m in layer.per_instance.items()
                    },
                    "aggregates": layer.aggregates,
                }
                for layer in report.layers
            ],
        }
    return {
        "kind": "global",
        "config": report.config,
        "layer": report.layer,
        "knn": {
            "k_values": list(report.knn.k_values),
            "category_accuracy": list(report.knn.category_accuracy),
            "pose_accuracy": list(report.knn.pose_accuracy),
            "pose_aaai": list(report.knn.pose_aaai),
            "category_gap": report.knn.category_gap,
            "pose_gap": report.knn.pose_gap,
        },
        "svm": {"accuracy": report.svm_accuracy, "c": report.svm_c},
        "pose_regression": {**asdict(report.pose), "bandwidth": report.bandwidth},
        "regime": report.regime,
    }


def report_from_dict(data: dict[str, Any]) -> Report:
    """Restores a report written by `write_report`."""
    try:
        if data["kind"] == "local":
            layers = [
                LayerReport(
                    layer["layer"],
                    {key: InstanceMeasures(instance_id=key, **values) for key, values in layer["per_instance"].items()},
                )
                for layer in data["layers"]
            ]
            return MeasureReport(data["config"], layers)
        if data["kind"] == "global":
            knn = data["knn"]
            regression = dict(data["pose_regression"])
            bandwidth = regression.pop("bandwidth")
            return GlobalMeasureReport(
                config=data["config"],
                layer=data["layer"],
                knn=KnnSweepResult(knn["k_values"], knn["category_accuracy"], knn["pose_accuracy"], knn["pose_aaai"]),
                svm_accuracy=data["svm"]["accuracy"],
                svm_c=data["svm"]["c"],
                pose=PoseMetrics(**regression),
                bandwidth=bandwidth,
                regime=data["regime"],
            )
    except (KeyError, TypeError) as e:
        raise ParseError(f"Report document is missing fields: {e}") from e
    raise ParseError(f"Unknown report kind '{data.get('kind')}'.")


def plot_rows(report: Report) -> pd.DataFrame:
    """Tidy rows for external plotting: one row per instance and measure (or per k for global reports)."""
    rows = []
    if isinstance(report, MeasureReport):
        for layer in report.layers:
            for key in sorted(layer.per_instance):
                measures = layer.per_instance[key]
                rows += [[layer.layer, key, measures.category, name, value] for name, value in measures.values().items()]
    else:
        knn = report.knn
        for k, category, pose, aaai in zip(knn.k_values, knn.category_accuracy, knn.pose_accuracy, knn.pose_aaai):
            rows += [
                [report.layer, f"k={k}", "all", "knn_category_accuracy", category],
                [report.layer, f"k={k}", "all", "knn_pose_accuracy", pose],
                [report.layer, f"k={k}", "all", "knn_pose_aaai", aaai],
            ]
        rows += [
            [report.layer, "all", "all", name, value]
            for name, value in (
                ("knn_category_gap", knn.category_gap),
                ("knn_pose_gap", knn.pose_gap),
                ("svm_accuracy", report.svm_accuracy),
                ("pose_aaai_mean", report.pose.aaai_mean),
                ("pose_within_22_5", report.pose.within_22_5),
                ("pose_within_45", report.pose.within_45),
            )
        ]
    return pd.DataFrame(rows, columns=PLOT_COLUMNS)


def plot_path_for(path: Union[str, Path]) -> Path:
    """Companion plot rows path of a report: report.json -> report.plot.csv."""
    path = Path(path)
    return path.with_name(path.stem + PLOT_SUFFIX)


def write_plot_rows(report: Report, path: Union[str, Path]) -> Path:
    """Writes the plot rows of a report as CSV."""
    path = Path(path)
    try:
        os.makedirs(path.parent, exist_ok=True)
        plot_rows(report).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise BundleIOError(f"Cannot write plot rows to '{path}': {e}") from e
    return path


def write_report(report: Report, path: Union[str, Path], plot_path: Optional[Union[str, Path]] = None) -> Path:
    """Writes a report as JSON with sorted keys, plus its plot rows CSV next to it.

    return: Path: The JSON path.
    """
    path = Path(path)
    try:
        os.makedirs(path.parent, exist_ok=True)
        with open(path, "w", encoding="utf-8") as report_file:
            json.dump(report_to_dict(report), report_file, indent=2, sort_keys=True)
            report_file.write("\n")
    except OSError as e:
        raise BundleIOError(f"Cannot write report to '{path}': {e}") from e
    write_plot_rows(report, plot_path or plot_path_for(path))
    return path


def read_report(path: Union[str, Path]) -> Report:
    """Loads a report written by `write_report`."""
    try:
        with open(path, "r", encoding="utf-8") as report_file:
            data = json.load(report_file)
    except FileNotFoundError as e:
        raise BundleIOError(f"Report '{path}' not found.") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"Malformed report '{path}': {e}") from e
    if not isinstance(data, dict):
        raise ParseError(f"Report '{path}' must hold a JSON object.")
    return report_from_dict(data)


def read_angles(path: Union[str, Path]) -> np.ndarray:
    """Reads a file of angles in degrees, one per line, and returns radians."""
    try:
        frame = pd.read_csv(path, header=None, dtype=float, float_precision="round_trip")
    except FileNotFoundError as e:
        raise BundleIOError(f"Angle file '{path}' not found.") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as e:
        raise ParseError(f"Malformed angle file '{path}': {e}") from e
    if frame.shape[1] != 1:
        raise ParseError(f"Angle file '{path}' must hold one angle per line.")
    return np.deg2rad(frame.to_numpy(dtype=float).reshape(-1))

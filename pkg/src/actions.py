"""This module contains the functions run by the command line subcommands."""

import argparse
import logging
from pathlib import Path
from typing import TYPE_CHECKING

from analysis import measure_global, measure_local
from config import GlobalConfig, LocalConfig
from custom_console import console, print_to_console
from error_handlers import UsageError, command_error
from file_operations import (
    MEASURE_NAMES,
    FeatureBundle,
    GlobalMeasureReport,
    MeasureReport,
    Report,
    find_bundles,
    load_bundle,
    merge_feature_sets,
    plot_path_for,
    read_angles,
    read_report,
    save_slices,
    write_plot_rows,
    write_report,
)
from global_measures import Split, pose_metrics
from synthgen import SynthSpec, default_corpus, generate
from visualisation import OutputStyle, create_rich_table_to_print, format_value

if TYPE_CHECKING:
    from commands import Commands

logger = logging.getLogger(__name__)

SYNTHETIC_LAYER = "synthetic"


def _load_all(paths: list[str], split: Split = Split.TRAIN) -> list[FeatureBundle]:
    return [load_bundle(bundle, split) for path in paths for bundle in find_bundles(path)]


def print_local_report(report: MeasureReport) -> None:
    """Prints the aggregates of every layer, then the per-instance values of single-layer reports."""
    for layer in report.layers:
        aggregates = layer.aggregates
        data = [
            [name, format_value(aggregates[name]["mean"]), format_value(aggregates[name]["std"])]
            for name in MEASURE_NAMES
            if name in aggregates
        ]
        title = f"Layer '{layer.layer}': {len(layer.per_instance)} instances"
        console.print(create_rich_table_to_print(["Measure", "Mean", "Std"], data, title=title))
    if len(report.layers) == 1:
        layer = report.layers[0]
        columns = ["Instance", "Category", *MEASURE_NAMES, "Flags"]
        data = [
            [key, m.category, *(format_value(v) for v in m.values().values()), ", ".join(m.flags) or "-"]
            for key, m in sorted(layer.per_instance.items())
        ]
        console.print(create_rich_table_to_print(columns, data))


def print_global_report(report: GlobalMeasureReport) -> None:
    """Prints the KNN sweep and the summary of the global probes."""
    knn = report.knn
    data = [
        [str(k), format_value(c), format_value(p), format_value(a)]
        for k, c, p, a in zip(knn.k_values, knn.category_accuracy, knn.pose_accuracy, knn.pose_aaai)
    ]
    columns = ["k", "Category accuracy", "Pose accuracy (<22.5)", "Mean AAAI"]
    console.print(create_rich_table_to_print(columns, data, title=f"KNN sweep, layer '{report.layer}'"))
    summary = [
        ["Category gap", format_value(knn.category_gap)],
        ["Pose gap", format_value(knn.pose_gap)],
        ["Regime", report.regime],
        ["Linear SVM accuracy", format_value(report.svm_accuracy)],
        ["Linear SVM C", format_value(report.svm_c)],
        ["Pose regression AAAI", format_value(report.pose.aaai_mean)],
        ["Pose regression <22.5", format_value(report.pose.within_22_5)],
        ["Pose regression <45", format_value(report.pose.within_45)],
        ["Kernel bandwidth", format_value(report.bandwidth)],
    ]
    console.print(create_rich_table_to_print(["Probe", "Value"], summary))


def print_report(report: Report) -> None:
    """Prints a local or global report."""
    if isinstance(report, MeasureReport):
        print_local_report(report)
    else:
        print_global_report(report)


@command_error
def synth(args: argparse.Namespace) -> int:
    """Generates one synthetic manifold, or the whole corpus, as bundle directories under --out.

    return: int: Exit code.
    """
    if args.corpus:
        items = default_corpus(args.seed)
    elif args.family is None:
        raise UsageError("synth needs --family F or --corpus.")
    else:
        spec = SynthSpec(
            family=args.family, n_points=args.n, dim=args.d, radius_r=args.r, noise_sigma=args.noise, seed=args.seed
        )
        items = [(spec, generate(spec))]

    out = Path(args.out)
    data = []
    for spec, manifold in items:
        save_slices(out / spec.instance_id, [manifold], name=spec.instance_id, layer=SYNTHETIC_LAYER)
        data.append([spec.instance_id, spec.category, str(manifold.size), str(manifold.dim)])
    console.print(create_rich_table_to_print(["Instance", "Category", "Samples", "Dim"], data))
    print_to_console(f"{len(items)} bundle(s) written to '{out}'.", style=OutputStyle.SUCCESS)
    return 0


@command_error
def measure_local_command(args: argparse.Namespace) -> int:
    """Runs the instance-specific measures over the bundles given with --in."""
    config = LocalConfig(
        neighborhood_n=args.neighborhood, p=args.p, kpls_d=args.kpls_d, tps_lambda=args.tps_lambda, seed=args.seed
    )
    report = measure_local(_load_all(args.inputs), config)
    print_local_report(report)
    if args.out:
        path = write_report(report, args.out)
        print_to_console(f"Report written to '{path}' (plot rows in '{plot_path_for(path)}').", OutputStyle.SUCCESS)
    return 0


@command_error
def measure_global_command(args: argparse.Namespace) -> int:
    """Runs the KNN, linear SVM and pose regression probes on the --train and --test bundles."""
    config = GlobalConfig(
        k_values=tuple(args.k), svm_c_grid=tuple(args.c_grid), svm_holdout=args.holdout, ridge=args.ridge, seed=args.seed
    )
    train = _load_all(args.train, Split.TRAIN)
    test = _load_all(args.test, Split.TEST)
    layer = "+".join(dict.fromkeys(bundle.layer for bundle in train))
    report = measure_global(
        merge_feature_sets([b.feature_set for b in train], Split.TRAIN),
        merge_feature_sets([b.feature_set for b in test], Split.TEST),
        layer,
        config,
    )
    print_global_report(report)
    if args.out:
        path = write_report(report, args.out)
        print_to_console(f"Report written to '{path}' (plot rows in '{plot_path_for(path)}').", OutputStyle.SUCCESS)
    return 0


@command_error
def pose_metrics_command(args: argparse.Namespace) -> int:
    """Compares predicted and true angles (degrees, one per line)."""
    metrics = pose_metrics(read_angles(args.pred), read_angles(args.truth))
    data = [
        ["Mean AAAI", format_value(metrics.aaai_mean)],
        ["Accuracy <22.5", format_value(metrics.within_22_5)],
        ["Accuracy <45", format_value(metrics.within_45)],
    ]
    console.print(create_rich_table_to_print(["Metric", "Value"], data))
    return 0


@command_error
def report_command(args: argparse.Namespace) -> int:
    """Prints a written report and optionally emits its plot rows as CSV."""
    report = read_report(args.input)
    print_report(report)
    if args.csv:
        path = write_plot_rows(report, args.csv)
        print_to_console(f"Plot rows written to '{path}'.", style=OutputStyle.SUCCESS)
    return 0


def print_commands_table(cmds: type["Commands"]) -> int:
    """Prints a table with all the commands and their descriptions.

    Note: It lives here rather than in `commands` to avoid a circular import.
    """
    columns = ["Command Name", "Description", "Input Help"]
    data = [[command.value.cli_name, command.value.description, command.value.input_help] for command in cmds]
    data = sorted(data, key=lambda x: x[0])
    console.print(create_rich_table_to_print(columns, data))
    return 0

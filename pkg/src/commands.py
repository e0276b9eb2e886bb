"""Module to store the commands and their information."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

from actions import (
    measure_global_command,
    measure_local_command,
    pose_metrics_command,
    print_commands_table,
    report_command,
    synth,
)
from config import (
    DEFAULT_K_VALUES,
    DEFAULT_KPLS_D,
    DEFAULT_P,
    DEFAULT_RIDGE,
    DEFAULT_SVM_C_GRID,
    DEFAULT_SVM_HOLDOUT,
    DEFAULT_TPS_LAMBDA,
)
from synthgen import CORPUS_POINTS


@dataclass(frozen=True)
class Argument:
    """One command line option: its flags and the keyword arguments of `add_argument`."""

    flags: tuple[str, ...]
    options: dict[str, Any] = field(default_factory=dict)


SEED = Argument(("--seed",), {"type": int, "default": 0, "help": "Seed of every random draw."})


@dataclass
class Command:
    """Dataclass to store command information."""

    cli_name: str
    """The name of the command for input from CLI."""
    description: str
    """Description of the command."""
    run: Callable[..., int]
    """Function to run the command, returns the exit code."""
    input_help: str
    """Help message for the command with the correct input format."""
    arguments: tuple[Argument, ...] = ()
    """Options accepted by the command."""
    shell_only: bool = False
    """True for commands that only make sense inside the interactive shell."""

    @property
    def flags(self) -> list[str]:
        """All option flags, for autocompletion."""
        return [flag for argument in self.arguments for flag in argument.flags]


class Commands(Enum):
    """Enum to store all the commands."""

    SYNTH = Command(
        cli_name="synth",
        description="Generates synthetic view manifolds as feature bundles.",
        run=synth,
        input_help="synth (--family F [--n N] [--d D] [--r R] [--noise S] | --corpus) [--seed S] --out DIR",
        arguments=(
            Argument(("--family",), {"type": int, "help": "Family 1 to 10."}),
            Argument(("--n",), {"type": int, "default": CORPUS_POINTS, "help": "Number of samples."}),
            Argument(("--d",), {"type": int, "default": 3, "help": "Feature dimensionality."}),
            Argument(("--r",), {"type": float, "default": 1.0, "help": "Sphere radius of families 4 to 7."}),
            Argument(("--noise",), {"type": float, "default": None, "help": "Noise of families 5 and 10."}),
            Argument(("--corpus",), {"action": "store_true", "help": "Write the full synthetic corpus."}),
            SEED,
            Argument(("--out",), {"required": True, "help": "Output directory."}),
        ),
    )
    MEASURE_LOCAL = Command(
        cli_name="measure-local",
        description="Runs nuclear norm, Effective-p, KTA, HSIC, KPLS and TPS per instance.",
        run=measure_local_command,
        input_help="measure-local --in DIR [--in DIR ...] [--out report.json] [knobs]",
        arguments=(
            Argument(
                ("--in",),
                {"dest": "inputs", "action": "append", "required": True, "help": "Bundle or directory of bundles."},
            ),
            Argument(("--out",), {"default": None, "help": "Report JSON path."}),
            Argument(("--neighborhood",), {"type": int, "default": None, "help": "Pose neighbors, default N // 4."}),
            Argument(("--p",), {"type": float, "default": DEFAULT_P, "help": "Percentage of Effective-p."}),
            Argument(("--kpls-d",), {"type": int, "default": DEFAULT_KPLS_D, "help": "KPLS components."}),
            Argument(("--tps-lambda",), {"type": float, "default": DEFAULT_TPS_LAMBDA, "help": "TPS regularization."}),
            SEED,
        ),
    )
    MEASURE_GLOBAL = Command(
        cli_name="measure-global",
        description="Runs the KNN sweep, linear SVM and kernel pose regression.",
        run=measure_global_command,
        input_help="measure-global --train DIR --test DIR [--out report.json] [--k K ...] [knobs]",
        arguments=(
            Argument(("--train",), {"action": "append", "required": True, "help": "Training bundle(s)."}),
            Argument(("--test",), {"action": "append", "required": True, "help": "Test bundle(s)."}),
            Argument(("--out",), {"default": None, "help": "Report JSON path."}),
            Argument(("--k",), {"type": int, "nargs": "+", "default": list(DEFAULT_K_VALUES), "help": "KNN k values."}),
            Argument(
                ("--c-grid",),
                {"type": float, "nargs": "+", "default": list(DEFAULT_SVM_C_GRID), "help": "Linear SVM C values."},
            ),
            Argument(("--holdout",), {"type": float, "default": DEFAULT_SVM_HOLDOUT, "help": "Hold-out fraction."}),
            Argument(("--ridge",), {"type": float, "default": DEFAULT_RIDGE, "help": "Kernel ridge penalty."}),
            SEED,
        ),
    )
    POSE_METRICS = Command(
        cli_name="pose-metrics",
        description="Prints mean AAAI and the <22.5 and <45 degree accuracies.",
        run=pose_metrics_command,
        input_help="pose-metrics --pred FILE --truth FILE",
        arguments=(
            Argument(("--pred",), {"required": True, "help": "Predicted angles in degrees, one per line."}),
            Argument(("--truth",), {"required": True, "help": "True angles in degrees, one per line."}),
        ),
    )
    REPORT = Command(
        cli_name="report",
        description="Prints a report and emits its plot rows.",
        run=report_command,
        input_help="report --in report.json [--csv out.csv]",
        arguments=(
            Argument(("--in",), {"dest": "input", "required": True, "help": "Report JSON path."}),
            Argument(("--csv",), {"default": None, "help": "Plot rows CSV path."}),
        ),
    )
    HELP = Command(
        cli_name="help",
        description="Shows the list of available commands.",
        run=lambda *_: print_commands_table(Commands),
        input_help="help",
    )
    CLOSE = Command(
        cli_name="close",
        description="Closes the interactive shell.",
        run=lambda *_: 0,
        input_help="close",
        shell_only=True,
    )
    EXIT = Command(
        cli_name="exit",
        description="Exits the interactive shell.",
        run=lambda *_: 0,
        input_help="exit",
        shell_only=True,
    )

    @classmethod
    def get_command(cls, command_name: str) -> Optional["Commands"]:
        """Returns the command based on the cli command name.

        param: command_name: The name of the command.
        return: Optional[Command]: The command object.
        """
        for command in cls:
            if command.value.cli_name == command_name:
                return command
        return None

    @classmethod
    def get_commands_list(cls) -> list[str]:
        """Returns a list of all the command names.

        return: list[str]: List of command names.
        """
        return [command.value.cli_name for command in cls]

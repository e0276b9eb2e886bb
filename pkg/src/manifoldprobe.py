"""Main module to run the view manifold probe, from the command line or as an interactive shell."""

import argparse
import shlex
import sys
from typing import Optional, Sequence

from prompt_toolkit import PromptSession
from rich.panel import Panel

from autocomplete import CommandCompleter
from commands import Commands
from custom_console import configure_logging, console, print_to_console
from error_handlers import UsageError
from visualisation import OutputStyle


class ProbeArgumentParser(argparse.ArgumentParser):
    """Argument parser raising UsageError instead of exiting on a bad command line."""

    def error(self, message: str):
        raise UsageError(f"{message}\n{self.format_usage()}")


def build_parser() -> ProbeArgumentParser:
    """Builds the subcommand grammar from the Commands enum."""
    parser = ProbeArgumentParser(prog="manifoldprobe", description="Geometry probes of view manifolds.")
    parser.add_argument("--verbose", action="store_true", help="Log debug details to stderr.")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for command in Commands:
        if command.value.shell_only:
            continue
        subparser = subparsers.add_parser(command.value.cli_name, help=command.value.description)
        for argument in command.value.arguments:
            subparser.add_argument(*argument.flags, **argument.options)
        subparser.set_defaults(run=command.value.run)
    return parser


def run(argv: Sequence[str]) -> int:
    """Parses argv and runs the subcommand.

    param: argv: Arguments without the program name.
    return: int: 0 on success, 1 on validation or usage errors, 2 on I/O errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except UsageError as e:
        print_to_console(e.message, style=OutputStyle.ERROR)
        return e.exit_code
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    configure_logging(args.verbose)
    return args.run(args)


def parse_input(user_input: str) -> list[str]:
    """Splits a shell line into argv, honoring quotes.

    raises: UsageError: On unbalanced quotes.
    """
    try:
        return shlex.split(user_input)
    except ValueError as e:
        raise UsageError(f"Cannot parse the command line: {e}") from e


def shell() -> int:
    """Interactive loop: each line is parsed with the same grammar as the command line."""
    session = PromptSession(completer=CommandCompleter())
    console.print(Panel(":triangular_ruler: Welcome to the view manifold probe!", expand=False), style="bold green")
    while True:
        try:
            user_input = session.prompt("manifoldprobe> ")
            if not user_input.strip():
                continue
            argv = parse_input(user_input)
            command = Commands.get_command(argv[0].lower())
            if command in (Commands.EXIT, Commands.CLOSE):
                break
            if command is None:
                print_to_console("Invalid command. Type 'help' for the list.", style=OutputStyle.WARNING)
                continue
            run(argv)
        except UsageError as error:
            print_to_console(error.message, style=OutputStyle.ERROR)
        except (KeyboardInterrupt, EOFError):
            break
    console.print("Good bye!", style="bold blue")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Entry point of the console script."""
    argv = sys.argv[1:] if argv is None else argv
    sys.exit(run(argv) if argv else shell())


if __name__ == "__main__":
    main()

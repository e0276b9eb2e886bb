"""Custom console module for rich console and logging."""

import logging
from typing import Union

from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from visualisation import OutputStyle

console = Console()
error_console = Console(stderr=True)


def print_to_console(message: Union[str, Table, Text, Panel], style: OutputStyle = None) -> None:
    """Prints a message to the console with the given style.

    param: message: str: The message to print.
    param: style: str: The style to use.
    """
    target = error_console if style is OutputStyle.ERROR else console
    target.print(message, style=style.value if style else None)


def configure_logging(verbose: bool = False) -> None:
    """Routes the package loggers to a rich handler on stderr.

    param: verbose: Log debug details instead of warnings only.
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, RichHandler):
            root.removeHandler(handler)
    handler = RichHandler(console=error_console, show_path=False, show_time=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)

"""This module implements autocomplete functionality for the interactive shell."""

from prompt_toolkit.completion import Completer, Completion
from prompt_toolkit.document import Document

from commands import Commands


class CommandCompleter(Completer):
    """
    Class for handling autocompletion using the prompt_toolkit library.
    """

    def get_completions(self, document: Document, complete_event) -> iter:
        """Suggests command names for the first word and the command's flags afterwards.

        :param document: The current input text.
        :param complete_event: Event passed by the prompt_toolkit (ignored here but must remain).
        """
        _ = complete_event  # part of the Completer interface

        text = document.text_before_cursor
        words = text.split()
        if len(words) <= 1 and not text.endswith(" "):
            for command in Commands.get_commands_list():
                if command.startswith(text.lstrip()):
                    yield Completion(command, start_position=-len(text.lstrip()))
            return

        command = Commands.get_command(words[0].lower())
        if command is None:
            return
        current = "" if text.endswith(" ") else words[-1]
        if current and not current.startswith("-"):
            return
        for flag in command.value.flags:
            if flag.startswith(current):
                yield Completion(flag, start_position=-len(current))

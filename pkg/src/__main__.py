"""This module is the entry point for the application."""

from manifoldprobe import main

if __name__ == "__main__":
    main()

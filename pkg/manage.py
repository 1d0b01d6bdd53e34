#!/usr/bin/env python
"""Entrada única: subcomandos de termshapes y utilidades de Django (test, check)."""
import os
import sys


def main():
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
    from termshapes.cli import SUBCOMMANDS, dispatch

    if len(sys.argv) > 1 and sys.argv[1] in SUBCOMMANDS:
        sys.exit(dispatch(sys.argv[1:]))
    from django.core.management import execute_from_command_line
    execute_from_command_line(sys.argv)


if __name__ == "__main__":
    main()

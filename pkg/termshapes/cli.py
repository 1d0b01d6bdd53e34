"""
Punto de entrada programático: dispatch(argv) ejecuta un subcomando y
devuelve el código de salida (0 éxito, 1 error de dominio, 2 uso).
"""
import contextlib
import os
import sys
from importlib import import_module
from typing import List, Optional, TextIO

SUBCOMMANDS = (
    "classify",
    "segment",
    "envelope",
    "attainable",
    "horizons",
    "probabilities",
    "simulate",
    "ingest",
)

USAGE = "usage: termshapes {%s} [options]\n" % ",".join(SUBCOMMANDS)


def _setup() -> None:
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")
    import django

    django.setup()


def dispatch(argv: List[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if not argv or argv[0] not in SUBCOMMANDS:
        stderr.write(USAGE)
        if argv and argv[0] not in ("-h", "--help"):
            stderr.write(f"unknown subcommand: {argv[0]!r}\n")
            return 2
        return 0 if argv else 2

    _setup()
    module = import_module(f"termshapes.management.commands.{argv[0]}")
    command = module.Command(stdout=stdout, stderr=stderr)
    try:
        # argparse escribe sus errores en sys.stderr y sale con 2
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stderr):
            command.run_from_argv(["termshapes", *argv])
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

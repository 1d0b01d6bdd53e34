"""
Base común de los comandos de termshapes: flags compartidos, conversión de
errores de dominio a código de salida 1 y escritura del documento.
"""
import argparse
import logging
import math

from django.core.management.base import BaseCommand, CommandError

from termshapes.choices import CurveKind, OutputFormat
from termshapes.conf import get_setting
from termshapes.exceptions import TermShapesError
from termshapes.term_structure import CurveParams
from termshapes.utils.output import emit

logger = logging.getLogger("termshapes.commands")


# === TIPOS DE ARGUMENTOS ===

def beta_vector(text: str):
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("--beta expects b0,b1,b2,b3")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--beta has a non-numeric entry: {text!r}")
    if not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError("--beta entries must be finite")
    return values


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return value


class TermShapesCommand(BaseCommand):
    """
    Las subclases implementan `add_command_arguments` y `run(**options)`; run
    devuelve (documento, filas_csv, columnas_csv).
    """

    requires_system_checks = []
    csv_columns = None

    def add_arguments(self, parser):
        parser.add_argument("--format", choices=OutputFormat.values, default=OutputFormat.JSON)
        parser.add_argument("--out", default=None, help="Ruta de salida (por defecto stdout)")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    # --- grupos de flags reutilizables ---

    @staticmethod
    def add_curve_argument(parser):
        parser.add_argument("--curve", choices=CurveKind.values, default=CurveKind.FORWARD.value)

    @staticmethod
    def add_params_arguments(parser, beta_required=True):
        parser.add_argument("--beta", type=beta_vector, required=beta_required, help="b0,b1,b2,b3")
        parser.add_argument("--tau1", type=finite_float, required=True)
        parser.add_argument("--tau2", type=finite_float, default=None)

    @staticmethod
    def add_threads_argument(parser):
        parser.add_argument("--threads", type=positive_int, default=None)

    @staticmethod
    def add_seed_argument(parser):
        parser.add_argument("--seed", type=int, default=None)

    @staticmethod
    def params_from(options) -> CurveParams:
        b0, b1, b2, b3 = options["beta"]
        return CurveParams(b0, b1, b2, b3, options["tau1"], options.get("tau2"))

    @staticmethod
    def threads_from(options) -> int:
        return int(options.get("threads") or get_setting("THREADS"))

    @staticmethod
    def seed_from(options) -> int:
        seed = options.get("seed")
        return int(seed if seed is not None else get_setting("SEED"))

    def run(self, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            doc, rows, columns = self.run(**options)
        except TermShapesError as exc:
            logger.debug("error de dominio en %s", self.__class__.__module__, exc_info=True)
            raise CommandError(f"{exc.__class__.__name__}: {exc}", returncode=1) from exc
        try:
            emit(self.stdout, doc, options["format"], rows, columns or self.csv_columns, options.get("out"))
        except OSError as exc:
            raise CommandError(f"cannot write output: {exc}", returncode=1) from exc

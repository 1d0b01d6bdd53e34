from termshapes.ingest import frequency_report, parse_series, series_frame
from termshapes.serializers import ReportDTO

from ._base import TermShapesCommand


class Command(TermShapesCommand):
    help = "Lee una serie de parámetros publicada y reporta frecuencias de regímenes y formas"
    csv_columns = ["date", "r", "beta3_sign", "regime", "shape"]

    def add_command_arguments(self, parser):
        parser.add_argument("path", help="Archivo delimitado con encabezado")
        parser.add_argument("--profile", default=None, help="Perfil de columnas (default, ecb, gsw)")
        self.add_curve_argument(parser)
        self.add_threads_argument(parser)

    def run(self, **options):
        series = parse_series(options["path"], options["profile"])
        report = frequency_report(series, options["curve"], threads=self.threads_from(options))
        dto = ReportDTO.from_report(report, series)
        rows = series_frame(report).to_dict(orient="records")
        return dto.to_dict(), rows, None

import math

from termshapes.envelope import augmented_envelope, envelope_curve
from termshapes.serializers import EnvelopeDTO

from ._base import TermShapesCommand, finite_float


class Command(TermShapesCommand):
    help = "Exporta la envolvente (o la poligonal aumentada) de la familia de rectas de extremos"
    csv_columns = ["x", "gamma1", "gamma2", "segment", "a", "b", "c"]

    def add_command_arguments(self, parser):
        self.add_curve_argument(parser)
        self.add_params_arguments(parser, beta_required=False)
        parser.add_argument("--horizon", type=finite_float, default=None, help="Horizonte T (por defecto infinito)")
        parser.add_argument("--n", type=int, default=None, help="Número de muestras")
        parser.add_argument("--augmented", action="store_true", help="Emite los vértices de la poligonal cerrada")

    def run(self, **options):
        kind = options["curve"]
        beta = options["beta"] or [0.0, 0.0, 0.0, 1.0]
        options = dict(options, beta=beta)
        params = self.params_from(options)
        horizon = options["horizon"] if options["horizon"] is not None else math.inf

        if options["augmented"]:
            poly = augmented_envelope(kind, params, horizon, options["n"])
            rows = [
                {"x": None, "gamma1": float(v[0]), "gamma2": float(v[1]), "segment": "vertex", "a": None, "b": None, "c": None}
                for v in poly.vertices
            ]
            doc = {
                "curve": kind,
                "tau1": params.tau1,
                "tau2": params.tau2,
                "horizon": poly.horizon,
                "vertices": [[float(v[0]), float(v[1])] for v in poly.vertices],
            }
            return doc, rows, None

        dto = EnvelopeDTO.from_curve(params, envelope_curve(kind, params, horizon, options["n"]))
        return dto.to_dict(), dto.csv_rows(), None

from termshapes.choices import CurveKind
from termshapes.exceptions import ArgumentError
from termshapes.segmentation import classify_ns, classify_via_envelope, quadrant_of
from termshapes.serializers import ShapeDTO
from termshapes.shape_oracle import classify_direct

from ._base import TermShapesCommand


class Command(TermShapesCommand):
    help = "Clasifica la forma de una curva forward o de rendimiento"
    csv_columns = ["curve", "family", "shape", "extrema", "boundary"]

    def add_command_arguments(self, parser):
        self.add_curve_argument(parser)
        self.add_params_arguments(parser)
        parser.add_argument(
            "--method",
            choices=["direct", "envelope"],
            default="direct",
            help="direct: ceros de la derivada; envelope: vueltas de la envolvente aumentada",
        )
        parser.add_argument("--quadrant", action="store_true", help="Agrega el cuadrante de gamma")

    def run(self, **options):
        kind = options["curve"]
        params = self.params_from(options)

        if params.beta3 == 0:
            # Nelson-Siegel: regiones cerradas con extremo explícito
            dto = ShapeDTO.from_shape(kind, params, classify_ns(params.beta1, params.beta2, kind, params.tau1))
        elif options["method"] == "envelope":
            dto = ShapeDTO.from_record(kind, params, classify_via_envelope(kind, params))
        else:
            dto = ShapeDTO.from_shape(kind, params, classify_direct(kind, params))

        doc = dto.to_dict()
        if options["quadrant"]:
            if params.beta3 == 0:
                raise ArgumentError("quadrants are defined in gamma coordinates (beta3 != 0)")
            doc["quadrant"] = quadrant_of(kind, params)
        row = {
            "curve": doc["curve"],
            "family": doc["family"],
            "shape": doc["shape"],
            "extrema": ";".join(f"{e['kind']}@{e['x']!r}" for e in doc["extrema"]),
            "boundary": doc["boundary"],
        }
        return doc, [row], None

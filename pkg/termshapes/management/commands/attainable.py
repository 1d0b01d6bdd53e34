from termshapes.choices import Family, Sign
from termshapes.dynamics import DynamicsInitial, attainable_over_time
from termshapes.exceptions import ArgumentError
from termshapes.segmentation import attainable_shapes
from termshapes.serializers import AttainableDTO

from ._base import TermShapesCommand, beta_vector, finite_float


class Command(TermShapesCommand):
    help = "Formas alcanzables por familia y régimen, o en el tiempo bajo la dinámica consistente"
    csv_columns = ["shape"]

    def add_command_arguments(self, parser):
        parser.add_argument("--family", choices=Family.values, default=Family.SVENSSON.value)
        parser.add_argument("--r", type=finite_float, default=None, help="Razón tau1/tau2")
        parser.add_argument("--tau1", type=finite_float, default=None)
        parser.add_argument("--tau2", type=finite_float, default=None)
        parser.add_argument(
            "--beta3-sign", dest="beta3_sign",
            choices=[Sign.POSITIVE.value, Sign.NEGATIVE.value], default=Sign.POSITIVE.value,
        )
        # modo dinámico
        self.add_curve_argument(parser)
        parser.add_argument("--beta", type=beta_vector, default=None)
        parser.add_argument("--t", type=finite_float, default=None)

    def run(self, **options):
        if options["t"] is not None:
            if options["beta"] is None or options["tau1"] is None:
                raise ArgumentError("--t needs --beta and --tau1")
            b0, b1, b2, b3 = options["beta"]
            init = DynamicsInitial(b0, b1, b2, b3, options["tau1"])
            shapes = sorted(attainable_over_time(options["curve"], init, options["t"]))
            dto = AttainableDTO(
                family=Family.SVENSSON.value, r=2.0, beta3_sign=Sign.POSITIVE.value,
                shapes=shapes, curve=options["curve"], t=options["t"],
            )
        else:
            r = options["r"]
            if r is None:
                if options["tau1"] is None or options["tau2"] is None:
                    raise ArgumentError("give --r or both --tau1 and --tau2")
                if options["tau2"] == 0:
                    raise ArgumentError("tau2 must be positive")
                r = options["tau1"] / options["tau2"]
            shapes = sorted(attainable_shapes(options["family"], r, options["beta3_sign"]))
            dto = AttainableDTO(family=options["family"], r=r, beta3_sign=options["beta3_sign"], shapes=shapes)
        return dto.to_dict(), [{"shape": s} for s in dto.shapes], None

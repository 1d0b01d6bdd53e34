from termshapes.segmentation import Grid, segment_grid
from termshapes.serializers import GridDTO

from ._base import TermShapesCommand, beta_vector, finite_float


class Command(TermShapesCommand):
    help = "Segmenta una malla del plano gamma por forma (número de vueltas de la envolvente)"
    csv_columns = ["gamma1", "gamma2", "shape", "winding", "in_D", "boundary_flag"]

    def add_command_arguments(self, parser):
        self.add_curve_argument(parser)
        parser.add_argument(
            "--beta", type=beta_vector, default=[0.0, 0.0, 0.0, 1.0],
            help="Plantilla b0,b1,b2,b3; solo importa el signo de b3 (0 = Nelson-Siegel)",
        )
        parser.add_argument("--tau1", type=finite_float, required=True)
        parser.add_argument("--tau2", type=finite_float, default=None)
        parser.add_argument("--grid", required=True, help="x0,x1,y0,y1,nx,ny")
        parser.add_argument("--n", type=int, default=None, help="Muestras de la envolvente")
        self.add_threads_argument(parser)

    def run(self, **options):
        kind = options["curve"]
        params = self.params_from(options)
        grid = Grid.parse(options["grid"])
        records = segment_grid(kind, params, grid, threads=self.threads_from(options), n=options["n"])
        dto = GridDTO.from_records(kind, params, grid, records)
        return dto.to_dict(), dto.records, None

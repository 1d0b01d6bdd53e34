from termshapes.dynamics import gamma1_at, gamma2_law, shape_probabilities
from termshapes.serializers import DistributionDTO

from ._base import TermShapesCommand, finite_float
from ._dynamics import add_initial_arguments, initial_from


class Command(TermShapesCommand):
    help = "Probabilidades analíticas de cada forma en el instante t"
    csv_columns = ["t", "curve", "shape", "probability"]

    def add_command_arguments(self, parser):
        self.add_curve_argument(parser)
        add_initial_arguments(parser)
        parser.add_argument("--t", type=finite_float, required=True)

    def run(self, **options):
        kind, t = options["curve"], options["t"]
        init = initial_from(options)
        dist = shape_probabilities(kind, init, t)
        mu, sigma2 = gamma2_law(init, t)
        dto = DistributionDTO.from_distribution(dist, mu, sigma2, gamma1_at(init, t))
        rows = [{"t": t, "curve": kind, "shape": s, "probability": p} for s, p in dto.probs.items()]
        return dto.to_dict(), rows, None

from termshapes.dynamics import gamma1_at, gamma2_law, sample_shapes, shape_probabilities
from termshapes.serializers import DistributionDTO

from ._base import TermShapesCommand, finite_float, positive_int
from ._dynamics import add_initial_arguments, initial_from


class Command(TermShapesCommand):
    help = "Frecuencias Monte Carlo de formas (muestreo exacto de gamma_II(t))"
    csv_columns = ["t", "curve", "shape", "count", "frequency", "analytic"]

    def add_command_arguments(self, parser):
        self.add_curve_argument(parser)
        add_initial_arguments(parser)
        parser.add_argument("--t", type=finite_float, required=True)
        parser.add_argument("--n", type=positive_int, default=10000)
        parser.add_argument("--points", type=positive_int, default=None, help="Malla del clasificador directo")
        self.add_seed_argument(parser)
        self.add_threads_argument(parser)

    def run(self, **options):
        kind, t = options["curve"], options["t"]
        init = initial_from(options)
        seed = self.seed_from(options)
        empirical = sample_shapes(
            kind, init, t, options["n"], seed=seed,
            threads=self.threads_from(options), points=options["points"],
        )
        analytic = shape_probabilities(kind, init, t)
        mu, sigma2 = gamma2_law(init, t)
        dto = DistributionDTO.from_distribution(empirical, mu, sigma2, gamma1_at(init, t), seed=seed, analytic=analytic)
        shapes = sorted(set(dto.probs) | set(dto.analytic))
        rows = [
            {
                "t": t, "curve": kind, "shape": s,
                "count": dto.counts.get(s, 0),
                "frequency": dto.probs.get(s, 0.0),
                "analytic": dto.analytic.get(s, 0.0),
            }
            for s in shapes
        ]
        return dto.to_dict(), rows, None

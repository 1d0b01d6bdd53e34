from termshapes.dynamics import horizons, long_run_shape
from termshapes.serializers import HorizonsDTO

from ._base import TermShapesCommand
from ._dynamics import add_initial_arguments, initial_from


class Command(TermShapesCommand):
    help = "Horizontes de pérdida de formas bajo la dinámica consistente"
    csv_columns = [
        "beta2", "beta3", "tau1", "t_dagger_f", "t_star_f", "t_dagger_y",
        "t_star_star_y", "t_star_y", "branch", "flag", "long_run_shape",
    ]

    def add_command_arguments(self, parser):
        add_initial_arguments(parser)

    def run(self, **options):
        init = initial_from(options)
        long_run = long_run_shape(init) if init.beta2 != 0 else None
        dto = HorizonsDTO.from_horizons(init, horizons(init), long_run)
        doc = dto.to_dict()
        return doc, [doc], None

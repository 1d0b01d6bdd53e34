"""Flags compartidos por los comandos de la dinámica consistente."""
from termshapes.dynamics import DynamicsInitial
from termshapes.exceptions import ArgumentError
from termshapes.term_structure import CurveParams

from ._base import beta_vector, finite_float


def add_initial_arguments(parser):
    parser.add_argument("--beta", type=beta_vector, default=None, help="b0,b1,b2,b3 iniciales")
    parser.add_argument("--beta2", type=finite_float, default=None)
    parser.add_argument("--beta3", type=finite_float, default=None)
    parser.add_argument("--tau1", type=finite_float, required=True)
    parser.add_argument("--tau2", type=finite_float, default=None, help="Debe ser tau1/2 si se entrega")


def initial_from(options) -> DynamicsInitial:
    """--beta manda; --beta2/--beta3 completan o reemplazan sus componentes."""
    b0, b1, b2, b3 = options["beta"] or [0.0, 0.0, None, None]
    if options.get("beta2") is not None:
        b2 = options["beta2"]
    if options.get("beta3") is not None:
        b3 = options["beta3"]
    if b2 is None or b3 is None:
        raise ArgumentError("give --beta or both --beta2 and --beta3")
    if options.get("tau2") is not None:
        return DynamicsInitial.from_params(CurveParams(b0, b1, b2, b3, options["tau1"], options["tau2"]))
    return DynamicsInitial(b0, b1, b2, b3, options["tau1"])

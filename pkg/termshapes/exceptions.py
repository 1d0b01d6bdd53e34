"""
Jerarquía de errores del proyecto. Los comandos de gestión convierten
cualquier TermShapesError en CommandError con código de salida 1.
"""


class TermShapesError(Exception):
    """Base de todos los errores de dominio."""


class ParameterError(TermShapesError, ValueError):
    pass


class DegenerateFamilyError(ParameterError):
    """tau1 == tau2 con beta3 != 0."""


class FamilyError(TermShapesError):
    """Coordenadas gamma pedidas para una curva sin beta3."""


class NumericalError(TermShapesError, ArithmeticError):
    pass


class BracketingError(NumericalError):
    pass


class DomainError(TermShapesError, ValueError):
    pass


class ShapeConsistencyError(TermShapesError):
    """El número de extremos supera la cota de la familia tras refinar raíces."""


class ArgumentError(TermShapesError, ValueError):
    pass


class ConsistencyError(TermShapesError):
    """Dinámica consistente solicitada con beta3 <= 0."""


class UndeterminedError(TermShapesError):
    pass


class IngestError(TermShapesError):
    pass


class SchemaError(IngestError):
    pass


class InputReadError(IngestError, OSError):
    pass

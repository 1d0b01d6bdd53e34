"""
Enumeraciones del dominio. Los valores son las cadenas que viajan en los
documentos JSON/CSV y en los flags de la línea de comandos.
"""
from django.db import models


class CurveKind(models.TextChoices):
    FORWARD = "forward", "Curva forward"
    YIELD = "yield", "Curva de rendimiento"


class Family(models.TextChoices):
    NELSON_SIEGEL = "NelsonSiegel", "Nelson-Siegel"
    BLISS = "Bliss", "Bliss"
    SVENSSON = "Svensson", "Svensson"


class RegimeTag(models.TextChoices):
    SCALE_REGULAR = "sr", "Escala regular (r > 1)"
    WEAKLY_SCALE_INVERTED = "wsi", "Débilmente invertida (1/3 <= r < 1)"
    STRONGLY_SCALE_INVERTED = "ssi", "Fuertemente invertida (r < 1/3)"


class ShapeTag(models.TextChoices):
    FLAT = "flat", "Plana"
    NORMAL = "n", "Normal"
    INVERSE = "i", "Invertida"
    HUMPED = "h", "Con joroba"
    DIPPED = "d", "Con valle"
    HD = "hd", "Joroba y valle"
    DH = "dh", "Valle y joroba"
    HDH = "hdh", "Joroba, valle, joroba"
    DHD = "dhd", "Valle, joroba, valle"


class ExtremumKind(models.TextChoices):
    HUMP = "hump", "Máximo local"
    DIP = "dip", "Mínimo local"


class Sign(models.TextChoices):
    POSITIVE = "positive", "Positivo"
    NEGATIVE = "negative", "Negativo"
    ZERO = "zero", "Cero"


class WBranch(models.TextChoices):
    PRINCIPAL = "principal", "Rama principal W0"
    MINUS_ONE = "minus_one", "Rama W-1"


class QuadrantLabel(models.TextChoices):
    QN = "Qn", "Cuadrante normal"
    QI = "Qi", "Cuadrante invertido"
    QH = "Qh", "Cuadrante con joroba"
    QD = "Qd", "Cuadrante con valle"


class OutputFormat(models.TextChoices):
    JSON = "json", "JSON"
    CSV = "csv", "CSV"


# Secuencia de signos de la derivada -> forma.
SIGN_SEQUENCE_TO_SHAPE = {
    "+": ShapeTag.NORMAL,
    "-": ShapeTag.INVERSE,
    "+-": ShapeTag.HUMPED,
    "-+": ShapeTag.DIPPED,
    "+-+": ShapeTag.HD,
    "-+-": ShapeTag.DH,
    "+-+-": ShapeTag.HDH,
    "-+-+": ShapeTag.DHD,
}

# Espejo joroba <-> valle al invertir el signo de beta3.
MIRROR_SHAPE = {
    ShapeTag.FLAT: ShapeTag.FLAT,
    ShapeTag.NORMAL: ShapeTag.INVERSE,
    ShapeTag.INVERSE: ShapeTag.NORMAL,
    ShapeTag.HUMPED: ShapeTag.DIPPED,
    ShapeTag.DIPPED: ShapeTag.HUMPED,
    ShapeTag.HD: ShapeTag.DH,
    ShapeTag.DH: ShapeTag.HD,
    ShapeTag.HDH: ShapeTag.DHD,
    ShapeTag.DHD: ShapeTag.HDH,
}

EXTREMA_CAP = {
    Family.NELSON_SIEGEL: 1,
    Family.BLISS: 2,
    Family.SVENSSON: 3,
}


def shape_from_signs(signs: str) -> ShapeTag:
    """Mapea una secuencia alternada de signos ('+', '-') a su forma."""
    if not signs:
        return ShapeTag.FLAT
    return SIGN_SEQUENCE_TO_SHAPE[signs]


def alternating_signs(first: str, count: int) -> str:
    """Secuencia alternada de largo `count` que comienza en `first`."""
    other = "-" if first == "+" else "+"
    return "".join(first if k % 2 == 0 else other for k in range(count))


def extrema_count(shape: str) -> int:
    if shape in (ShapeTag.FLAT, ShapeTag.NORMAL, ShapeTag.INVERSE):
        return 0
    return len(shape)

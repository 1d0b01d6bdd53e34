"""
Clasificación directa de formas: se aíslan y cuentan los cambios de signo de
la derivada de la curva sobre (0, ∞), con la cota de extremos de cada familia.

Es el oráculo independiente contra el que se valida el método de la envolvente.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .choices import (
    EXTREMA_CAP,
    CurveKind,
    ExtremumKind,
    ShapeTag,
    Sign,
    alternating_signs,
    shape_from_signs,
)
from .conf import get_setting
from .exceptions import ShapeConsistencyError
from .numerics import Bracket, brent_root
from .term_structure import CurveParams, basis_functions, curve_derivative

logger = logging.getLogger(__name__)

# |F| <= NEGLIGIBLE_REL·(|β1 c| + |β2 b| + |β3 a|) se considera cero.
NEGLIGIBLE_REL = 1e-9
SLOPE_ZERO_REL = 1e-12
MAX_HORIZON_DOUBLINGS = 40
BATCH_CHUNK = 256


@dataclass(frozen=True)
class Extremum:
    x: float
    kind: str


@dataclass
class Shape:
    tag: str
    extrema: List[Extremum] = field(default_factory=list)
    boundary: bool = False

    @property
    def extrema_count(self) -> int:
        return len(self.extrema)


# === ASINTÓTICA DE LA DERIVADA ===

@lru_cache(maxsize=256)
def _tail_terms(kind: str, tau1: float, tau2: float) -> Tuple[Tuple[float, int, Tuple[float, float, float]], ...]:
    """
    Términos x^grado·e^(-tasa·x) de la derivada, con coeficientes lineales en
    (β1, β2, β3), ordenados de más lento a más rápido en decaer.
    """
    raw: List[Tuple[float, int, Tuple[float, float, float]]] = []
    if kind == CurveKind.FORWARD:
        raw += [
            (1 / tau1, 0, (-1 / tau1, 1 / tau1, 0.0)),
            (1 / tau1, 1, (0.0, -1 / tau1 ** 2, 0.0)),
            (1 / tau2, 0, (0.0, 0.0, 1 / tau2)),
            (1 / tau2, 1, (0.0, 0.0, -1 / tau2 ** 2)),
        ]
    else:
        # g(u)/tau = e^(-x/tau)(1/x + tau/x²) - tau/x²
        raw += [
            (0.0, -2, (-tau1, -tau1, -tau2)),
            (1 / tau1, -1, (1.0, 1.0, 0.0)),
            (1 / tau1, -2, (tau1, tau1, 0.0)),
            (1 / tau1, 0, (0.0, 1 / tau1, 0.0)),
            (1 / tau2, -1, (0.0, 0.0, 1.0)),
            (1 / tau2, -2, (0.0, 0.0, tau2)),
            (1 / tau2, 0, (0.0, 0.0, 1 / tau2)),
        ]
    merged: Dict[Tuple[float, int], np.ndarray] = {}
    for rate, degree, coeffs in raw:
        key = (rate, degree)
        merged[key] = merged.get(key, np.zeros(3)) + np.array(coeffs)
    ordered = sorted(merged.items(), key=lambda item: (item[0][0], -item[0][1]))
    return tuple((rate, degree, tuple(c)) for (rate, degree), c in ordered)


def tail_sign(kind: str, params: CurveParams) -> int:
    """Signo de la derivada para x suficientemente grande (0 si es idénticamente nula)."""
    betas = np.array([params.beta1, params.beta2, params.beta3])
    signs = tail_signs(kind, params.taus, betas[None, :])
    return int(signs[0])


def tail_signs(kind: str, taus: Tuple[float, float], betas: np.ndarray) -> np.ndarray:
    """Versión vectorizada: `betas` tiene forma (m, 3) con columnas (β1, β2, β3)."""
    betas = np.atleast_2d(np.asarray(betas, dtype=float))
    out = np.zeros(betas.shape[0])
    decided = np.zeros(betas.shape[0], dtype=bool)
    for _rate, _degree, coeffs in _tail_terms(kind, float(taus[0]), float(taus[1])):
        k = np.asarray(coeffs)
        coef = betas @ k
        scale = np.abs(betas) @ np.abs(k)
        live = (~decided) & (np.abs(coef) > 1e-12 * scale) & (scale > 0)
        out[live] = np.sign(coef[live])
        decided |= live
        if decided.all():
            break
    return out


# === MALLA ===

def scan_horizon(params: CurveParams) -> float:
    tau_max = max(params.taus)
    b = np.abs([params.beta1, params.beta2, params.beta3])
    nonzero = b[b > 0]
    if nonzero.size == 0:
        return 20.0 * tau_max
    rho = b.sum() / nonzero.min()
    return 20.0 * tau_max * (1.0 + math.ceil(math.log1p(rho)))


@lru_cache(maxsize=64)
def _scan_basis(kind: str, tau1: float, tau2: float, horizon: float, n: int):
    x = np.geomspace(1e-6 * min(tau1, tau2), horizon, n)
    a, b, c = basis_functions(kind, tau1, tau2, x)
    for arr in (x, a, b, c):
        arr.setflags(write=False)
    return x, a, b, c


def _signs_with_tolerance(values: np.ndarray, scale: np.ndarray) -> np.ndarray:
    s = np.sign(values)
    s[np.abs(values) <= NEGLIGIBLE_REL * scale] = 0
    return s


# === OPERACIONES ===

def initial_slope_sign(kind: str, params: CurveParams) -> str:
    """
    Signo de la pendiente inicial. Es el mismo para forward y rendimiento
    (la pendiente inicial del rendimiento es la mitad de la forward).
    """
    tau1, tau2 = params.taus
    terms = [(params.beta2 - params.beta1) / tau1]
    if params.beta3 != 0:
        terms.append(params.beta3 / tau2)
    value = sum(terms)
    scale = (abs(params.beta2) + abs(params.beta1)) / tau1 + abs(params.beta3) / tau2
    if abs(value) <= SLOPE_ZERO_REL * scale:
        return Sign.ZERO
    return Sign.POSITIVE if value > 0 else Sign.NEGATIVE


def _extrema_from_signs(signs: Sequence[str], roots: Sequence[float]) -> List[Extremum]:
    out = []
    for k, x in enumerate(roots):
        kind = ExtremumKind.HUMP if signs[k] == "+" else ExtremumKind.DIP
        out.append(Extremum(x=float(x), kind=kind.value))
    return out


def classify_direct(kind: str, params: CurveParams, points: int = None) -> Shape:
    """
    Forma de la curva sobre (0, ∞) contando los ceros transversales de la
    derivada en una malla geométrica, refinados con brent_root.

    Corridas de valores despreciables sin cambio de signo son ceros
    tangenciales: no son extremos y marcan el resultado como frontera.
    """
    if params.beta1 == 0 and params.beta2 == 0 and params.beta3 == 0:
        return Shape(tag=ShapeTag.FLAT.value)
    n = int(points or get_setting("SCAN_POINTS"))
    tau1, tau2 = params.taus
    tail = tail_sign(kind, params)
    if tail == 0:
        return Shape(tag=ShapeTag.FLAT.value)

    horizon = scan_horizon(params)
    # más allá de ~700·tau las exponenciales se anulan en doble precisión
    horizon_cap = (700.0 if kind == CurveKind.FORWARD else 1e12) * max(tau1, tau2)
    horizon = min(horizon, horizon_cap)
    for _ in range(MAX_HORIZON_DOUBLINGS):
        x, a, b, c = _scan_basis(kind, tau1, tau2, horizon, n)
        parts = (params.beta1 * c, params.beta2 * b, params.beta3 * a)
        values = parts[0] + parts[1] + parts[2]
        scale = np.abs(parts[0]) + np.abs(parts[1]) + np.abs(parts[2])
        signs = _signs_with_tolerance(values, scale)
        if signs[-1] == tail or horizon >= horizon_cap:
            break
        logger.debug("horizonte insuficiente: T=%g signo=%d cola=%d", horizon, signs[-1], tail)
        horizon = min(2.0 * horizon, horizon_cap)

    nonzero = np.flatnonzero(signs)
    if nonzero.size == 0:
        return Shape(tag=ShapeTag.FLAT.value, boundary=True)

    boundary = bool(nonzero[0] != 0 or nonzero[-1] != len(signs) - 1)
    derivative = lambda t: curve_derivative(kind, params, t)
    roots: List[float] = []
    seq = ["+" if signs[nonzero[0]] > 0 else "-"]
    for i, j in zip(nonzero[:-1], nonzero[1:]):
        if signs[i] == signs[j]:
            if j - i > 1:
                boundary = True
            continue
        if j - i > 1:
            boundary = True
        roots.append(brent_root(derivative, Bracket(float(x[i]), float(x[j]))))
        seq.append("+" if signs[j] > 0 else "-")

    cap = EXTREMA_CAP[params.family]
    if len(roots) > cap:
        raise ShapeConsistencyError(
            f"{len(roots)} extrema found for {params.family} (cap {cap}); kind={kind}"
        )
    tag = shape_from_signs("".join(seq))
    return Shape(tag=tag.value, extrema=_extrema_from_signs(seq, roots), boundary=boundary)


def classify_batch(
    kind: str,
    taus: Tuple[float, float],
    beta1: np.ndarray,
    beta2: float,
    beta3: float,
    points: int = None,
) -> List[str]:
    """
    Clasifica muchas curvas que solo difieren en beta1 (caso Monte Carlo).

    Las filas con valores despreciables o con cola dudosa en el horizonte se
    resuelven con classify_direct.
    """
    beta1 = np.asarray(beta1, dtype=float)
    n = int(points or get_setting("SCAN_POINTS"))
    tau1, tau2 = float(taus[0]), float(taus[1])
    template = CurveParams(beta0=0.0, beta1=0.0, beta2=beta2, beta3=beta3, tau1=tau1, tau2=tau2)
    rho_ref = CurveParams(
        beta0=0.0, beta1=float(np.median(np.abs(beta1))) if beta1.size else 0.0,
        beta2=beta2, beta3=beta3, tau1=tau1, tau2=tau2,
    )
    horizon = scan_horizon(rho_ref)
    x, a, b, c = _scan_basis(kind, tau1, tau2, horizon, n)
    betas = np.column_stack([beta1, np.full_like(beta1, beta2), np.full_like(beta1, beta3)])
    tails = tail_signs(kind, (tau1, tau2), betas)
    base = beta2 * b + beta3 * a
    base_scale = np.abs(beta2 * b) + np.abs(beta3 * a)

    tags: List[str] = [""] * beta1.size
    for start in range(0, beta1.size, BATCH_CHUNK):
        rows = beta1[start:start + BATCH_CHUNK]
        values = rows[:, None] * c[None, :] + base[None, :]
        scale = np.abs(rows[:, None] * c[None, :]) + base_scale[None, :]
        signs = np.sign(values)
        signs[np.abs(values) <= NEGLIGIBLE_REL * scale] = 0
        clean = (signs != 0).all(axis=1) & (signs[:, -1] == tails[start:start + rows.size])
        changes = (signs[:, 1:] != signs[:, :-1]).sum(axis=1)
        for k in range(rows.size):
            if clean[k]:
                first = "+" if signs[k, 0] > 0 else "-"
                tags[start + k] = shape_from_signs(alternating_signs(first, int(changes[k]) + 1)).value
            else:
                tags[start + k] = classify_direct(kind, template.with_betas(beta1=float(rows[k])), points=n).tag
    return tags


# === SISTEMA DE TCHEBYCHEFF ===

def tchebycheff_wronskians(tau1: float, tau2: float, x) -> Dict[str, np.ndarray]:
    """
    Wronskianos en forma cerrada del sistema
    (f1, f2, f3, f4) = (e^(-x/τ1)/τ1, x·e^(-x/τ1)/τ1², e^(-x/τ2)/τ2, x·e^(-x/τ2)/τ2²).

    `W13` y `W134` corresponden a (f1, s·f3, s·f4) con s = sgn(τ2 - τ1), el
    subsistema que resulta ECT para el signo dado.
    """
    x = np.asarray(x, dtype=float)
    d = tau2 - tau1
    s = 1.0 if d > 0 else -1.0
    l1, l2 = 1.0 / tau1, 1.0 / tau2
    return {
        "sign_adjust": s,
        "W1": np.exp(-x * l1) / tau1,
        "W12": np.exp(-2.0 * x * l1) / tau1 ** 3,
        "W123": d ** 2 / (tau1 ** 5 * tau2 ** 3) * np.exp(-x * (2.0 * l1 + l2)),
        "W1234": d ** 4 / (tau1 ** 7 * tau2 ** 7) * np.exp(-2.0 * x * (l1 + l2)),
        "W13": s * d / (tau1 ** 2 * tau2 ** 2) * np.exp(-x * (l1 + l2)),
        "W134": d ** 2 / (tau1 ** 3 * tau2 ** 5) * np.exp(-x * (l1 + 2.0 * l2)),
    }

"""
Geometría de la envolvente de la familia de rectas
    ℓ_x = {γ : a(x) + b(x)·γ_I + c(x)·γ_II = 0},
con los Wronskianos en forma cerrada, cúspides, rectas límite, puntos de
contacto y la envolvente aumentada (poligonal cerrada) para curvas forward y
de rendimiento.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from .choices import CurveKind, RegimeTag
from .conf import get_setting
from .exceptions import ArgumentError, FamilyError
from .numerics import Bracket, brent_root, expand_bracket_up
from .term_structure import CurveParams, basis_functions, regime_from_ratio

logger = logging.getLogger(__name__)

MIN_ENVELOPE_SAMPLES = 256
CUSP_WINDOW_SAMPLES = 64
# Por debajo de este múltiplo de min(tau) la curva de rendimiento usa determinantes por serie.
YIELD_CLOSED_FORM_FROM = 0.5
# exp(x·|1/τ1 - 1/τ2|) debe quedar representable en la envolvente forward.
MAX_GROWTH_EXPONENT = 300.0


# === TIPOS ===

@dataclass(frozen=True)
class LineCoeffs:
    a: float
    b: float
    c: float

    def value(self, gamma1, gamma2):
        return self.a + self.b * np.asarray(gamma1) + self.c * np.asarray(gamma2)

    def distance(self, gamma1, gamma2):
        return np.abs(self.value(gamma1, gamma2)) / math.hypot(self.b, self.c)

    def normalized(self) -> "LineCoeffs":
        m = max(abs(self.a), abs(self.b), abs(self.c))
        return LineCoeffs(self.a / m, self.b / m, self.c / m) if m > 0 else self

    def intersect(self, other: "LineCoeffs") -> Tuple[float, float]:
        det = self.b * other.c - self.c * other.b
        if det == 0:
            raise ArgumentError("parallel lines have no intersection")
        g1 = (self.c * other.a - self.a * other.c) / det
        g2 = (self.a * other.b - self.b * other.a) / det
        return g1, g2


@dataclass(frozen=True)
class Wronskians:
    wbc: np.ndarray
    wca: np.ndarray
    wab: np.ndarray
    wabc: np.ndarray


@dataclass(frozen=True)
class BoundaryLines:
    line0: LineCoeffs
    line_inf: Optional[LineCoeffs]
    M: Optional[Tuple[float, float]]
    contact0: Tuple[float, float]
    contact_inf: Optional[Tuple[float, float]]


@dataclass
class ClosedPolyline:
    vertices: np.ndarray  # (m, 2), el cierre last -> first es implícito
    line_alpha: Optional[LineCoeffs] = None
    line_omega: Optional[LineCoeffs] = None
    horizon: float = math.inf

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[0] < 3 or self.vertices.shape[1] != 2:
            raise ArgumentError("a closed polyline needs at least 3 planar vertices")
        if not np.all(np.isfinite(self.vertices)):
            raise ArgumentError("polyline vertices must be finite")


@dataclass
class EnvelopeCurve:
    kind: str
    xs: np.ndarray
    points: np.ndarray
    line0: LineCoeffs
    contact0: Tuple[float, float]
    horizon: float
    cusp: Optional[Tuple[float, Tuple[float, float]]] = None
    line_inf: Optional[LineCoeffs] = None
    contact_inf: Optional[Tuple[float, float]] = None
    M: Optional[Tuple[float, float]] = None
    line_T: Optional[LineCoeffs] = None
    contact_T: Optional[Tuple[float, float]] = None

    def pieces(self) -> np.ndarray:
        """Tramo de cada muestra: 0 antes de la cúspide, 1 después."""
        if self.cusp is None:
            return np.zeros(self.xs.shape, dtype=int)
        return (self.xs > self.cusp[0]).astype(int)


# === AUXILIARES ===

def _taus(params: CurveParams) -> Tuple[float, float]:
    if params.beta3 == 0 or params.tau2 is None:
        raise FamilyError("envelope geometry needs a family with beta3 != 0")
    regime_from_ratio(params.tau1 / params.tau2)
    return params.tau1, params.tau2


def _forward_basis_scaled(tau1: float, tau2: float, x: np.ndarray):
    """(a_f, b_f, c_f)·e^(x/τ_max): mismas rectas, sin underflow para x grande."""
    shift = 1.0 / max(tau1, tau2)
    u1, u2 = x / tau1, x / tau2
    e1 = np.exp(-x * (1.0 / tau1 - shift))
    e2 = np.exp(-x * (1.0 / tau2 - shift))
    a = (1.0 - u2) * e2 / tau2
    b = (1.0 - u1) * e1 / tau1
    c = -e1 / tau1
    return a, b, c


def _det3(m0, m1, m2):
    (a, b, c), (a1, b1, c1), (a2, b2, c2) = m0, m1, m2
    return a * (b1 * c2 - c1 * b2) - b * (a1 * c2 - c1 * a2) + c * (a1 * b2 - b1 * a2)


def _determinant_wronskians(kind: str, tau1: float, tau2: float, x: np.ndarray) -> Wronskians:
    a, b, c = basis_functions(kind, tau1, tau2, x, 0)
    a1, b1, c1 = basis_functions(kind, tau1, tau2, x, 1)
    a2, b2, c2 = basis_functions(kind, tau1, tau2, x, 2)
    return Wronskians(
        wbc=b * c1 - c * b1,
        wca=c * a1 - a * c1,
        wab=a * b1 - b * a1,
        wabc=_det3((a, b, c), (a1, b1, c1), (a2, b2, c2)),
    )


def yield_wabc_bracket(tau1: float, tau2: float, x) -> np.ndarray:
    """
    Corchete B(x) de W(a_y, b_y, c_y) = e^(-x/τ1)/(x⁴τ1³τ2³)·B(x), reescalado
    por e^(x/τ_max). Sus raíces en (0, ∞) son las cúspides de la envolvente
    de rendimiento.
    """
    x = np.asarray(x, dtype=float)
    t1, t2 = tau1, tau2
    p2 = (
        -(t2 - t1) ** 2 * x ** 2
        + (-2 * t1 ** 3 + 5 * t1 ** 2 * t2 - 2 * t1 * t2 ** 2 - t2 ** 3) * x
        + t2 * (4 * t1 ** 3 - 3 * t1 ** 2 * t2 - t2 ** 3)
    )
    q2 = (
        t1 * (t2 - t1) * x ** 2
        - t1 * (t2 ** 2 + t1 * t2 - 2 * t1 ** 2) * x
        - t1 ** 2 * t2 * (4 * t1 - 3 * t2)
    )
    shift = 1.0 / max(t1, t2)
    e1s = np.exp(-x * (1.0 / t1 - shift))
    e2s = np.exp(-x * (1.0 / t2 - shift))
    e12s = np.exp(-x * (1.0 / t1 + 1.0 / t2 - shift))
    return e12s * p2 + e2s * q2 + e1s * t2 ** 4


def _yield_wabc_closed(tau1: float, tau2: float, x: np.ndarray) -> np.ndarray:
    shift = 1.0 / max(tau1, tau2)
    pref = np.exp(-x * (1.0 / tau1 + shift)) / (x ** 4 * tau1 ** 3 * tau2 ** 3)
    return pref * yield_wabc_bracket(tau1, tau2, x)


# === OPERACIONES ===

def basis_abc(kind: str, params: CurveParams, x: float) -> LineCoeffs:
    tau1, tau2 = _taus(params)
    a, b, c = basis_functions(kind, tau1, tau2, np.asarray(float(x)))
    return LineCoeffs(float(a), float(b), float(c))


def line_at(kind: str, tau1: float, tau2: float, x: float) -> LineCoeffs:
    """ℓ_x con coeficientes reescalados por un factor positivo (misma orientación)."""
    x = np.asarray(float(x))
    if kind == CurveKind.FORWARD:
        a, b, c = _forward_basis_scaled(tau1, tau2, x)
    else:
        a, b, c = basis_functions(kind, tau1, tau2, x)
    return LineCoeffs(float(a), float(b), float(c)).normalized()


def wronskians(kind: str, params: CurveParams, x) -> Wronskians:
    """
    W(b,c), W(c,a), W(a,b) y W(a,b,c) con W(p,q) = p·q' - q·p'.

    Forward: formas cerradas. Rendimiento: determinantes de derivadas por
    serie cerca de 0; más allá, W(p_y,q_y) = (p_y·q_f - q_y·p_f)/x y la forma
    cerrada de W(a_y,b_y,c_y).
    """
    tau1, tau2 = _taus(params)
    x = np.asarray(x, dtype=float)
    if kind == CurveKind.FORWARD:
        l1, l2 = 1.0 / tau1, 1.0 / tau2
        e11 = np.exp(-2.0 * x * l1)
        e12 = np.exp(-x * (l1 + l2))
        e112 = np.exp(-x * (2.0 * l1 + l2))
        return Wronskians(
            wbc=-e11 / tau1 ** 3,
            wca=e12 / (tau1 ** 2 * tau2 ** 2) * ((2 * tau1 - tau2) - (x / tau2) * (tau1 - tau2)),
            wab=(tau1 - tau2) / (tau1 ** 3 * tau2 ** 3) * e12
            * (2 * tau1 * tau2 - x * (tau1 + tau2) + x ** 2),
            wabc=e112 / (tau1 ** 5 * tau2 ** 3)
            * (-(2 * tau1 - tau2) ** 2 + tau1 ** 2 + (x / tau2) * (tau1 - tau2) ** 2),
        )
    if kind != CurveKind.YIELD:
        raise ArgumentError(f"unknown curve kind {kind!r}")

    near = x < YIELD_CLOSED_FORM_FROM * min(tau1, tau2)
    xs = np.where(near, 1.0, x)
    series = _determinant_wronskians(kind, tau1, tau2, np.where(near, x, 0.0))
    ay, by, cy = basis_functions(CurveKind.YIELD, tau1, tau2, xs)
    af, bf, cf = basis_functions(CurveKind.FORWARD, tau1, tau2, xs)
    return Wronskians(
        wbc=np.where(near, series.wbc, (by * cf - cy * bf) / xs),
        wca=np.where(near, series.wca, (cy * af - ay * cf) / xs),
        wab=np.where(near, series.wab, (ay * bf - by * af) / xs),
        wabc=np.where(near, series.wabc, _yield_wabc_closed(tau1, tau2, xs)),
    )


def _envelope_points(kind: str, tau1: float, tau2: float, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if kind == CurveKind.FORWARD:
        grow = np.exp(x * (1.0 / tau1 - 1.0 / tau2))
        eta1 = -(tau1 / tau2 ** 2) * grow * ((2 * tau1 - tau2) - (x / tau2) * (tau1 - tau2))
        eta2 = -((tau1 - tau2) / tau2 ** 3) * grow * (2 * tau1 * tau2 - x * (tau1 + tau2) + x ** 2)
        return np.column_stack([np.atleast_1d(eta1), np.atleast_1d(eta2)])

    # rendimiento: intersección de ℓ_x^y con ℓ_x^f (regla de Cramer)
    near = x < YIELD_CLOSED_FORM_FROM * min(tau1, tau2)
    xs = np.where(near, 1.0, x)
    ay, by, cy = basis_functions(CurveKind.YIELD, tau1, tau2, xs)
    af, bf, cf = _forward_basis_scaled(tau1, tau2, xs)
    d = by * cf - cy * bf
    eta1 = (cy * af - cf * ay) / d
    eta2 = (ay * bf - by * af) / d
    if np.any(near):
        w = _determinant_wronskians(CurveKind.YIELD, tau1, tau2, np.where(near, x, 0.0))
        eta1 = np.where(near, w.wca / w.wbc, eta1)
        eta2 = np.where(near, w.wab / w.wbc, eta2)
    return np.column_stack([np.atleast_1d(eta1), np.atleast_1d(eta2)])


def envelope_point(kind: str, params: CurveParams, x: float) -> Tuple[float, float]:
    """η(x) = (W(c,a)/W(b,c), W(a,b)/W(b,c))."""
    tau1, tau2 = _taus(params)
    pt = _envelope_points(kind, tau1, tau2, np.asarray([float(x)]))[0]
    return float(pt[0]), float(pt[1])


def forward_cusp(tau1: float, tau2: float) -> Optional[float]:
    tag = regime_from_ratio(tau1 / tau2)
    if tag == RegimeTag.WEAKLY_SCALE_INVERTED:
        return None
    return tau2 * (3 * tau1 - tau2) / (tau1 - tau2)


@lru_cache(maxsize=128)
def _cusp(kind: str, tau1: float, tau2: float) -> Optional[float]:
    x_f = forward_cusp(tau1, tau2)
    if x_f is None or kind == CurveKind.FORWARD:
        return x_f
    bracket_fn = lambda t: float(yield_wabc_bracket(tau1, tau2, t))
    lo = x_f
    if bracket_fn(lo) >= 0:
        lo = 1e-3 * min(tau1, tau2)
    bracket = expand_bracket_up(bracket_fn, lo, 2.0 * max(lo, x_f))
    root = brent_root(bracket_fn, bracket)
    logger.debug("cúspide de rendimiento x*=%g (forward %g)", root, x_f)
    return root


def cusp_abscissa(kind: str, params: CurveParams) -> Optional[float]:
    tau1, tau2 = _taus(params)
    return _cusp(kind, tau1, tau2)


def _raw_line_inf(kind: str, tau1: float, tau2: float) -> LineCoeffs:
    # dirección límite de (a, b, c) cuando x → ∞, orientación incluida
    if kind == CurveKind.FORWARD:
        return LineCoeffs(0.0, -1.0, 0.0)
    return LineCoeffs(-tau2, -tau1, -tau1)


def boundary_lines(kind: str, params: CurveParams) -> BoundaryLines:
    tau1, tau2 = _taus(params)
    line0 = LineCoeffs(tau1, tau2, -tau2)
    contact0 = (
        -(tau1 / tau2 ** 2) * (2 * tau1 - tau2),
        -2.0 * tau1 * (tau1 - tau2) / tau2 ** 2,
    )
    if regime_from_ratio(tau1 / tau2) != RegimeTag.SCALE_REGULAR:
        return BoundaryLines(line0=line0, line_inf=None, M=None, contact0=contact0, contact_inf=None)
    line_inf = _raw_line_inf(kind, tau1, tau2)
    M = line0.intersect(line_inf)
    contact_inf = (0.0, 0.0) if kind == CurveKind.FORWARD else (0.0, -tau2 / tau1)
    return BoundaryLines(line0=line0, line_inf=line_inf, M=M, contact0=contact0, contact_inf=contact_inf)


def limit_line(kind: str, tau1: float, tau2: float) -> Optional[LineCoeffs]:
    """
    Recta a la que converge ℓ_x con x → ∞, con la orientación de (a, b, c).
    En régimen invertido la familia forward degenera (ℓ⁻ es todo el plano) y
    se devuelve None; la de rendimiento converge en todos los regímenes.
    """
    if kind == CurveKind.FORWARD and regime_from_ratio(tau1 / tau2) != RegimeTag.SCALE_REGULAR:
        return None
    return _raw_line_inf(kind, tau1, tau2)


def max_horizon(kind: str, tau1: float, tau2: float) -> float:
    if kind == CurveKind.FORWARD:
        return MAX_GROWTH_EXPONENT / abs(1.0 / tau1 - 1.0 / tau2)
    return 1e6 * max(tau1, tau2)


def _sample_abscissas(kind: str, tau1: float, tau2: float, x_max: float, n: int) -> np.ndarray:
    x_min = 1e-4 * min(tau1, tau2)
    xs = np.geomspace(x_min, x_max, n)
    cusp = _cusp(kind, tau1, tau2)
    if cusp is not None and x_min < cusp < x_max:
        window = np.linspace(0.9 * cusp, min(1.1 * cusp, x_max), CUSP_WINDOW_SAMPLES)
        xs = np.union1d(xs, np.append(window, cusp))
    return xs


def _sr_sample_limit(kind: str, tau1: float, tau2: float) -> float:
    if kind == CurveKind.FORWARD:
        return max(60.0 / abs(1.0 / tau2 - 1.0 / tau1), 60.0 * max(tau1, tau2))
    # el rendimiento converge a η(∞) como 1/x
    return 1e8 * max(tau1, tau2)


@lru_cache(maxsize=64)
def _augmented(kind: str, tau1: float, tau2: float, horizon: float, n: int) -> ClosedPolyline:
    params = CurveParams(0.0, 0.0, 0.0, 1.0, tau1, tau2)
    lines = boundary_lines(kind, params)
    if math.isinf(horizon):
        xs = _sample_abscissas(kind, tau1, tau2, _sr_sample_limit(kind, tau1, tau2), n)
        samples = _envelope_points(kind, tau1, tau2, xs)
        vertices = np.vstack([[lines.M], [lines.contact0], samples, [lines.contact_inf]])
        poly = ClosedPolyline(vertices, line_alpha=lines.line0, line_omega=lines.line_inf, horizon=horizon)
    else:
        xs = _sample_abscissas(kind, tau1, tau2, horizon, n)
        xs = xs[xs < horizon]
        samples = _envelope_points(kind, tau1, tau2, np.append(xs, horizon))
        line_t = line_at(kind, tau1, tau2, horizon)
        m_t = lines.line0.intersect(line_t)
        vertices = np.vstack([[m_t], [lines.contact0], samples])
        poly = ClosedPolyline(vertices, line_alpha=lines.line0, line_omega=line_t, horizon=horizon)
    logger.info(
        "envolvente aumentada kind=%s tau=(%g, %g) T=%g vértices=%d",
        kind, tau1, tau2, horizon, poly.vertices.shape[0],
    )
    poly.vertices.setflags(write=False)
    return poly


def augmented_envelope(kind: str, params: CurveParams, horizon: float = math.inf, n: int = None) -> ClosedPolyline:
    """
    Poligonal cerrada M → η(0) → η(x) → punto sobre ℓ_ω → M.

    Régimen regular: horizon = ∞ (cierre por M = ℓ₀ ∩ ℓ∞). Regímenes
    invertidos: horizon finito, ℓ_ω = ℓ_T y M_T = ℓ₀ ∩ ℓ_T.
    """
    tau1, tau2 = _taus(params)
    n = int(n if n is not None else get_setting("ENVELOPE_SAMPLES"))
    if n < 3:
        raise ArgumentError(f"envelope needs at least 3 samples, got {n}")
    n = max(n, MIN_ENVELOPE_SAMPLES)
    regular = regime_from_ratio(tau1 / tau2) == RegimeTag.SCALE_REGULAR
    if horizon is None:
        horizon = math.inf
    if math.isinf(horizon) and not regular:
        raise ArgumentError("scale-inverted envelopes need a finite horizon")
    if not math.isinf(horizon):
        if not horizon > 0:
            raise ArgumentError("horizon must be positive")
        horizon = min(float(horizon), max_horizon(kind, tau1, tau2))
    return _augmented(kind, tau1, tau2, float(horizon), n)


def envelope_curve(kind: str, params: CurveParams, horizon: float = math.inf, n: int = None) -> EnvelopeCurve:
    """Envolvente muestreada con sus marcas (cúspide, rectas y contactos) para exportar."""
    tau1, tau2 = _taus(params)
    n = int(n if n is not None else get_setting("ENVELOPE_SAMPLES"))
    if n < 3:
        raise ArgumentError(f"envelope needs at least 3 samples, got {n}")
    lines = boundary_lines(kind, params)
    if horizon is None or math.isinf(horizon):
        regular = lines.line_inf is not None
        x_max = (
            _sr_sample_limit(kind, tau1, tau2) if regular
            else min(64.0 * max(tau1, tau2), max_horizon(kind, tau1, tau2))
        )
        horizon = math.inf if regular else x_max
    else:
        x_max = min(float(horizon), max_horizon(kind, tau1, tau2))
        horizon = x_max
    xs = _sample_abscissas(kind, tau1, tau2, x_max, n)
    points = _envelope_points(kind, tau1, tau2, xs)
    cusp_x = _cusp(kind, tau1, tau2)
    cusp = None
    if cusp_x is not None and cusp_x <= x_max:
        cusp = (cusp_x, tuple(float(v) for v in _envelope_points(kind, tau1, tau2, np.asarray([cusp_x]))[0]))
    line_t = contact_t = None
    if math.isfinite(horizon):
        # ℓ_T cierra la envolvente en la última abscisa muestreada
        line_t = line_at(kind, tau1, tau2, x_max)
        contact_t = tuple(float(v) for v in _envelope_points(kind, tau1, tau2, np.asarray([x_max]))[0])
    return EnvelopeCurve(
        kind=kind,
        xs=xs,
        points=points,
        line0=lines.line0,
        contact0=lines.contact0,
        horizon=horizon,
        cusp=cusp,
        line_inf=lines.line_inf,
        contact_inf=lines.contact_inf,
        M=lines.M,
        line_T=line_t,
        contact_T=contact_t,
    )


def departure_sign(kind: str, params: CurveParams, x: float) -> int:
    """
    Lado de ℓ_x hacia el que parte la envolvente en x: sgn(W(a,b,c)·W(b,c)).
    """
    w = wronskians(kind, params, x)
    return int(np.sign(float(w.wabc) * float(w.wbc)))


def vertical_crossings(
    kind: str,
    params: CurveParams,
    gamma1: float,
    x_lo: float = None,
    x_hi: float = None,
    n: int = 4000,
) -> List[Tuple[float, Tuple[float, float]]]:
    """
    Todas las abscisas x en [x_lo, x_hi] con η₁(x) = gamma1, con su punto η(x).
    """
    tau1, tau2 = _taus(params)
    x_lo = x_lo if x_lo is not None else 1e-4 * min(tau1, tau2)
    if x_hi is None:
        x_hi = min(200.0 * max(tau1, tau2), max_horizon(kind, tau1, tau2))
    xs = np.geomspace(x_lo, x_hi, n)
    cusp = _cusp(kind, tau1, tau2)
    if cusp is not None and x_lo < cusp < x_hi:
        xs = np.union1d(xs, [cusp])
    g = _envelope_points(kind, tau1, tau2, xs)[:, 0] - gamma1
    fn = lambda t: float(_envelope_points(kind, tau1, tau2, np.asarray([t]))[0, 0] - gamma1)
    out = []
    for i in range(len(xs) - 1):
        if g[i] == 0.0:
            root = float(xs[i])
        elif (g[i] > 0) != (g[i + 1] > 0) and g[i + 1] != 0.0:
            root = brent_root(fn, Bracket(float(xs[i]), float(xs[i + 1])))
        else:
            continue
        pt = _envelope_points(kind, tau1, tau2, np.asarray([root]))[0]
        out.append((root, (float(pt[0]), float(pt[1]))))
    return out

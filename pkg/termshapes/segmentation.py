"""
Segmentación del plano γ por número de vueltas de la envolvente aumentada.

Para un punto γ, el número de extremos es E = 2·|vueltas| + 1_D, donde D es
el conjunto de puntos con signos distintos respecto de ℓ_α y ℓ_ω. La forma
se arma con la secuencia alternada de E + 1 signos que comienza en el signo
de la pendiente inicial.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .choices import (
    CurveKind,
    ExtremumKind,
    Family,
    QuadrantLabel,
    RegimeTag,
    ShapeTag,
    Sign,
    alternating_signs,
    shape_from_signs,
)
from .conf import get_setting
from .envelope import ClosedPolyline, augmented_envelope, boundary_lines, max_horizon
from .exceptions import ArgumentError
from .shape_oracle import Extremum, Shape, classify_direct, tail_signs
from .term_structure import CurveParams, regime_from_ratio, to_gamma
from .utils.parallel import chunked, ordered_map

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-9
PERTURB_REL = 1e-6
WINDING_RESIDUAL = 0.25
SI_START_FACTOR = 8.0
POINT_CHUNK = 64


# === TIPOS ===

@dataclass
class SegmentRecord:
    gamma1: float
    gamma2: float
    shape: str
    winding: int
    in_D: bool
    boundary_flag: bool

    @property
    def extrema_count(self) -> int:
        return 2 * abs(self.winding) + int(self.in_D)


@dataclass(frozen=True)
class Grid:
    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ArgumentError("grid resolution must be at least 2 per axis")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ArgumentError("grid rectangle is empty")

    @staticmethod
    def parse(text: str) -> "Grid":
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) != 6:
            raise ArgumentError("grid must be x0,x1,y0,y1,nx,ny")
        try:
            x0, x1, y0, y1 = (float(p) for p in parts[:4])
            nx, ny = int(parts[4]), int(parts[5])
        except ValueError as exc:
            raise ArgumentError(f"invalid grid {text!r}: {exc}") from exc
        return Grid(x0, x1, y0, y1, nx, ny)

    def nodes(self) -> np.ndarray:
        """Nodos en orden por filas: γ_II fijo por fila, γ_I recorre la fila."""
        xs = np.linspace(self.x0, self.x1, self.nx)
        ys = np.linspace(self.y0, self.y1, self.ny)
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


# === GEOMETRÍA DE POLIGONALES ===

def winding_numbers(vertices: np.ndarray, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Número de vueltas por suma de ángulos con signo, para varios puntos.

    Devuelve (enteros redondeados, residuo de redondeo).
    """
    v = np.asarray(vertices, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    nxt = np.roll(v, -1, axis=0)
    total = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], POINT_CHUNK):
        p = pts[start:start + POINT_CHUNK, None, :]
        d0 = v[None, :, :] - p
        d1 = nxt[None, :, :] - p
        cross = d0[..., 0] * d1[..., 1] - d0[..., 1] * d1[..., 0]
        dot = d0[..., 0] * d1[..., 0] + d0[..., 1] * d1[..., 1]
        total[start:start + POINT_CHUNK] = np.arctan2(cross, dot).sum(axis=1) / (2.0 * math.pi)
    rounded = np.rint(total)
    return rounded.astype(int), np.abs(total - rounded)


def winding_number(poly: ClosedPolyline, point: Sequence[float]) -> int:
    w, _ = winding_numbers(poly.vertices, np.asarray([point], dtype=float))
    return int(w[0])


def distance_to_polyline(vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    seg = np.roll(v, -1, axis=0) - v
    seg_len2 = (seg ** 2).sum(axis=1)
    seg_len2 = np.where(seg_len2 > 0, seg_len2, 1.0)
    out = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], POINT_CHUNK):
        p = pts[start:start + POINT_CHUNK, None, :]
        rel = p - v[None, :, :]
        t = np.clip((rel * seg[None, :, :]).sum(axis=2) / seg_len2[None, :], 0.0, 1.0)
        closest = v[None, :, :] + t[..., None] * seg[None, :, :]
        out[start:start + POINT_CHUNK] = np.sqrt(((p - closest) ** 2).sum(axis=2)).min(axis=1)
    return out


# === CLASIFICACIÓN POR ENVOLVENTE ===

@dataclass
class _Evaluation:
    extrema: np.ndarray
    winding: np.ndarray
    in_d: np.ndarray
    first_sign: np.ndarray
    omega_sign: np.ndarray
    near: np.ndarray


def _evaluate(poly: ClosedPolyline, pts: np.ndarray, beta3_sign: float) -> _Evaluation:
    w, residual = winding_numbers(poly.vertices, pts)
    scale = 1.0 + np.hypot(pts[:, 0], pts[:, 1])
    tol = BOUNDARY_TOL * scale
    la = poly.line_alpha.value(pts[:, 0], pts[:, 1])
    lw = poly.line_omega.value(pts[:, 0], pts[:, 1])
    near = (
        (residual >= WINDING_RESIDUAL)
        | (np.abs(la) / math.hypot(poly.line_alpha.b, poly.line_alpha.c) < tol)
        | (np.abs(lw) / math.hypot(poly.line_omega.b, poly.line_omega.c) < tol)
        | (distance_to_polyline(poly.vertices, pts) < tol)
    )
    in_d = np.sign(la) * np.sign(lw) < 0
    extrema = 2 * np.abs(w) + in_d.astype(int)
    near |= extrema > 3
    return _Evaluation(
        extrema=extrema,
        winding=w,
        in_d=in_d,
        first_sign=beta3_sign * np.sign(la),
        omega_sign=np.sign(lw),
        near=near,
    )


def _si_horizons(kind: str, tau1: float, tau2: float) -> List[float]:
    cap = max_horizon(kind, tau1, tau2)
    t = min(SI_START_FACTOR * max(tau1, tau2), cap)
    out = [t]
    while t < cap:
        t = min(2.0 * t, cap)
        out.append(t)
    return out


def _evaluate_stable(kind: str, tau1: float, tau2: float, beta3_sign: float, pts: np.ndarray, n: int) -> _Evaluation:
    """
    Evaluación con la envolvente aumentada adecuada al régimen. En régimen
    invertido se duplica T hasta que E no cambia en dos duplicaciones
    seguidas y el signo en ℓ_T coincide con el de la cola.
    """
    params = CurveParams(0.0, 0.0, 0.0, 1.0, tau1, tau2)
    if regime_from_ratio(tau1 / tau2) == RegimeTag.SCALE_REGULAR:
        return _evaluate(augmented_envelope(kind, params, math.inf, n), pts, beta3_sign)

    betas = np.column_stack([pts[:, 1], pts[:, 0], np.ones(pts.shape[0])])
    tails = tail_signs(kind, (tau1, tau2), betas)
    horizons = _si_horizons(kind, tau1, tau2)
    result: Optional[_Evaluation] = None
    done = np.zeros(pts.shape[0], dtype=bool)
    history: List[np.ndarray] = []
    for k, horizon in enumerate(horizons):
        ev = _evaluate(augmented_envelope(kind, params, horizon, n), pts, beta3_sign)
        if result is None:
            result = ev
        tail_ok = ev.omega_sign == tails
        if len(history) >= 2:
            stable = (ev.extrema == history[-1]) & (ev.extrema == history[-2])
        else:
            stable = np.zeros(pts.shape[0], dtype=bool)
        last = k == len(horizons) - 1
        take = (~done) & ((stable & tail_ok) | last)
        for name in ("extrema", "winding", "in_d", "first_sign", "omega_sign", "near"):
            getattr(result, name)[take] = getattr(ev, name)[take]
        if last:
            result.near[take & ~tail_ok] = True
        done |= take
        history.append(ev.extrema.copy())
        logger.debug("T=%g resueltos=%d/%d", horizon, int(done.sum()), done.size)
        if done.all():
            break
    return result


def _tag_for(first_sign: float, extrema: int) -> str:
    if first_sign == 0:
        return ShapeTag.FLAT.value
    first = "+" if first_sign > 0 else "-"
    return shape_from_signs(alternating_signs(first, int(extrema) + 1)).value


def classify_points(
    kind: str,
    tau1: float,
    tau2: float,
    beta3_sign: float,
    points: np.ndarray,
    n: int = None,
) -> List[SegmentRecord]:
    """Clasifica puntos del plano γ; los casos de frontera usan la regla de menos extremos."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = int(n if n is not None else get_setting("ENVELOPE_SAMPLES"))
    ev = _evaluate_stable(kind, tau1, tau2, beta3_sign, pts, n)

    records = []
    for i, (g1, g2) in enumerate(pts):
        if not ev.near[i]:
            records.append(SegmentRecord(
                gamma1=float(g1), gamma2=float(g2),
                shape=_tag_for(ev.first_sign[i], ev.extrema[i]),
                winding=int(ev.winding[i]), in_D=bool(ev.in_d[i]), boundary_flag=False,
            ))
            continue
        records.append(_resolve_boundary(kind, tau1, tau2, beta3_sign, float(g1), float(g2), n))
    return records


def _resolve_boundary(kind: str, tau1: float, tau2: float, beta3_sign: float, g1: float, g2: float, n: int) -> SegmentRecord:
    """Forma vecina con menos extremos (8 direcciones de perturbación)."""
    for attempt in range(3):
        delta = PERTURB_REL * (10 ** attempt) * (1.0 + math.hypot(g1, g2))
        angles = np.arange(8) * (math.pi / 4.0)
        nearby = np.column_stack([g1 + delta * np.cos(angles), g2 + delta * np.sin(angles)])
        ev = _evaluate_stable(kind, tau1, tau2, beta3_sign, nearby, n)
        ok = ~ev.near
        if ok.any():
            idx = np.flatnonzero(ok)
            best = idx[np.argmin(ev.extrema[idx])]
            logger.debug("punto de frontera gamma=(%g, %g) resuelto por vecindad", g1, g2)
            return SegmentRecord(
                gamma1=g1, gamma2=g2,
                shape=_tag_for(ev.first_sign[best], ev.extrema[best]),
                winding=int(ev.winding[best]), in_D=bool(ev.in_d[best]), boundary_flag=True,
            )
    best = int(np.argmin(ev.extrema))
    return SegmentRecord(
        gamma1=g1, gamma2=g2,
        shape=_tag_for(ev.first_sign[best], ev.extrema[best]),
        winding=int(ev.winding[best]), in_D=bool(ev.in_d[best]), boundary_flag=True,
    )


def classify_via_envelope(kind: str, params: CurveParams, n: int = None) -> SegmentRecord:
    gamma = to_gamma(params)
    sign3 = 1.0 if gamma.beta3_sign == Sign.POSITIVE else -1.0
    return classify_points(kind, params.tau1, params.tau2, sign3, [gamma.as_tuple()], n)[0]


# === NELSON-SIEGEL ===

def classify_ns(beta1: float, beta2: float, kind: str, tau: float = None) -> Shape:
    """
    Regiones cerradas de Nelson-Siegel. Forward: n si β2 <= 0 y β1 <= β2,
    i si β2 >= 0 y β1 >= β2, h si β2 > 0 y β1 < β2, d si β2 < 0 y β1 > β2.
    Rendimiento: n si β1 <= -|β2|, i si β1 >= |β2|, h si β2 > |β1|,
    d si β2 < -|β1|. Las fronteras quedan del lado con menos extremos.
    """
    if beta1 == 0 and beta2 == 0:
        return Shape(tag=ShapeTag.FLAT.value)
    if kind == CurveKind.FORWARD:
        if beta2 > 0 and beta1 < beta2:
            tag = ShapeTag.HUMPED
        elif beta2 < 0 and beta1 > beta2:
            tag = ShapeTag.DIPPED
        elif beta2 <= 0 and beta1 <= beta2:
            tag = ShapeTag.NORMAL
        else:
            tag = ShapeTag.INVERSE
    elif kind == CurveKind.YIELD:
        if beta2 > abs(beta1):
            tag = ShapeTag.HUMPED
        elif beta2 < -abs(beta1):
            tag = ShapeTag.DIPPED
        elif beta1 <= -abs(beta2):
            tag = ShapeTag.NORMAL
        else:
            tag = ShapeTag.INVERSE
    else:
        raise ArgumentError(f"unknown curve kind {kind!r}")

    extrema: List[Extremum] = []
    if tau is not None and tag in (ShapeTag.HUMPED, ShapeTag.DIPPED):
        ext_kind = ExtremumKind.HUMP if tag == ShapeTag.HUMPED else ExtremumKind.DIP
        if kind == CurveKind.FORWARD:
            extrema = [Extremum(x=tau * (1.0 - beta1 / beta2), kind=ext_kind.value)]
        else:
            extrema = classify_direct(kind, CurveParams(0.0, beta1, beta2, 0.0, tau)).extrema
    return Shape(tag=tag.value, extrema=extrema)


# === FORMAS ALCANZABLES ===

_SVENSSON_SETS = {
    (RegimeTag.SCALE_REGULAR, 1): {"n", "i", "h", "d", "hd", "hdh"},
    (RegimeTag.SCALE_REGULAR, -1): {"n", "i", "h", "d", "dh", "dhd"},
    (RegimeTag.WEAKLY_SCALE_INVERTED, 1): {"i", "h", "dh"},
    (RegimeTag.WEAKLY_SCALE_INVERTED, -1): {"n", "d", "hd"},
    (RegimeTag.STRONGLY_SCALE_INVERTED, 1): {"i", "h", "dh", "hdh"},
    (RegimeTag.STRONGLY_SCALE_INVERTED, -1): {"n", "d", "hd", "dhd"},
}

# Bliss: subregímenes r > 1, r en [1/2, 1) y r en (0, 1/2)
_BLISS_SETS = {
    ("regular", 1): {"n", "i", "h", "hd"},
    ("regular", -1): {"n", "i", "d", "dh"},
    ("half", 1): {"i", "h"},
    ("half", -1): {"n", "d"},
    ("small", 1): {"i", "h", "dh"},
    ("small", -1): {"n", "d", "hd"},
}


def _sign_value(beta3_sign) -> int:
    if beta3_sign in (Sign.POSITIVE, "+", 1, 1.0):
        return 1
    if beta3_sign in (Sign.NEGATIVE, "-", -1, -1.0):
        return -1
    raise ArgumentError(f"beta3 sign must be positive or negative, got {beta3_sign!r}")


def attainable_shapes(family: str, r: float, beta3_sign) -> FrozenSet[str]:
    if r is None or not (r > 0) or not math.isfinite(r):
        raise ArgumentError(f"ratio r must be positive, got {r!r}")
    if family == Family.NELSON_SIEGEL:
        return frozenset({"n", "i", "h", "d"})
    if r == 1:
        raise ArgumentError("r = 1 is not admissible for the Bliss and Svensson families")
    s = _sign_value(beta3_sign)
    if family == Family.SVENSSON:
        return frozenset(_SVENSSON_SETS[(regime_from_ratio(r), s)])
    if family == Family.BLISS:
        band = "regular" if r > 1 else ("half" if r >= 0.5 else "small")
        return frozenset(_BLISS_SETS[(band, s)])
    raise ArgumentError(f"unknown family {family!r}")


# === CUADRANTES ===

def quadrant_of(kind: str, params: CurveParams) -> str:
    """
    Cuadrante de γ según el signo de la curva en el inicio (ℓ₀) y en la cola:
    Qn (+, +), Qh (+, -), Qi (-, -), Qd (-, +). En régimen invertido la cola
    forward tiene el signo de -β3 y solo quedan dos cuadrantes poblados.
    """
    gamma = to_gamma(params)
    sign3 = 1.0 if params.beta3 > 0 else -1.0
    tau1, tau2 = params.tau1, params.tau2
    start = sign3 * np.sign(boundary_lines(kind, params).line0.value(gamma.gamma1, gamma.gamma2))
    tail = float(tail_signs(kind, (tau1, tau2), [[params.beta1, params.beta2, params.beta3]])[0])
    if start == 0 or tail == 0:
        raise ArgumentError("gamma lies on a limiting line; quadrant undefined")
    return {
        (1, 1): QuadrantLabel.QN,
        (1, -1): QuadrantLabel.QH,
        (-1, -1): QuadrantLabel.QI,
        (-1, 1): QuadrantLabel.QD,
    }[(int(start), int(tail))].value


# === MALLAS ===

def segment_grid(kind: str, params_template: CurveParams, grid: Grid, threads: int = 1, n: int = None) -> List[SegmentRecord]:
    """
    Clasifica cada nodo de la malla en orden por filas. Con beta3 = 0 los ejes
    se leen como (β2, β1) y se usa la segmentación de Nelson-Siegel.
    """
    nodes = grid.nodes()
    if params_template.beta3 == 0:
        out = []
        for g1, g2 in nodes:
            shape = classify_ns(float(g2), float(g1), kind)
            out.append(SegmentRecord(
                gamma1=float(g1), gamma2=float(g2), shape=shape.tag,
                winding=0, in_D=shape.tag in ("h", "d"), boundary_flag=False,
            ))
        return out
    sign3 = 1.0 if params_template.beta3 > 0 else -1.0
    tau1, tau2 = params_template.tau1, params_template.tau2
    logger.info("clasificando malla %dx%d kind=%s tau=(%g, %g)", grid.nx, grid.ny, kind, tau1, tau2)
    parts = ordered_map(
        lambda chunk: classify_points(kind, tau1, tau2, sign3, chunk, n),
        chunked(nodes, max(POINT_CHUNK, len(nodes) // max(threads, 1) + 1)),
        threads,
    )
    return [rec for part in parts for rec in part]

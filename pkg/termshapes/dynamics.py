"""
Dinámica consistente (libre de arbitraje) de la familia Svensson.

Bajo la única evolución consistente τ2 = τ1/2, β2 y β3 decaen de forma
determinista y γ_II(t) es gaussiana con media y varianza explícitas. La
recta vertical γ_I(t) recorre el plano γ y las probabilidades de cada forma
son masas normales entre los cortes de esa recta con ℓ₀, ℓ∞ y la envolvente.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import numpy as np

from .choices import CurveKind, ShapeTag, Sign
from .conf import get_setting
from .envelope import cusp_abscissa, envelope_point, max_horizon, vertical_crossings
from .exceptions import ArgumentError, ConsistencyError, ParameterError, UndeterminedError
from .numerics import gaussian_samples, normal_cdf, normal_sf, solve_lambert_equation
from .shape_oracle import classify_batch, classify_direct
from .term_structure import CurveParams
from .utils.parallel import ordered_map

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-300
EULER_STEPS_PER_TAU = 2000
MC_SHARD = 4096

# Trayectorias de formas de la curva forward (disjuntas entre sí).
TRAPPED_POSITIVE = frozenset({"i", "h", "hdh"})
TRAPPED_NEGATIVE = frozenset({"n", "d", "hd"})


# === TIPOS ===

@dataclass(frozen=True)
class DynamicsInitial:
    beta0: float
    beta1: float
    beta2: float
    beta3: float
    tau1: float

    def __post_init__(self):
        for name in ("beta0", "beta1", "beta2", "beta3", "tau1"):
            if not math.isfinite(float(getattr(self, name))):
                raise ParameterError(f"{name} must be finite")
        if not self.beta3 > 0:
            raise ConsistencyError("beta3 must be greater than 0 for consistent dynamics")
        if not self.tau1 > 0:
            raise ParameterError("tau1 must be positive")

    @property
    def tau2(self) -> float:
        return self.tau1 / 2.0

    @staticmethod
    def from_params(params: CurveParams) -> "DynamicsInitial":
        """Acepta una curva Svensson solo si ya cumple τ2 = τ1/2."""
        if params.tau2 is not None and not math.isclose(params.tau2, params.tau1 / 2.0, rel_tol=1e-12):
            raise ConsistencyError(
                f"consistent dynamics force tau2 = tau1/2, got tau1={params.tau1}, tau2={params.tau2}"
            )
        return DynamicsInitial(params.beta0, params.beta1, params.beta2, params.beta3, params.tau1)

    def curve_params(self) -> CurveParams:
        return CurveParams(self.beta0, self.beta1, self.beta2, self.beta3, self.tau1, self.tau2)


@dataclass
class Horizons:
    t_dagger_f: Optional[float]
    t_star_f: Optional[float]
    t_dagger_y: Optional[float]
    t_star_star_y: Optional[float]
    t_star_y: Optional[float]
    branch: str
    flag: bool = False


@dataclass
class ShapeDistribution:
    t: float
    kind: str
    probs: Dict[str, float]
    n: Optional[int] = None
    counts: Dict[str, int] = field(default_factory=dict)

    def support(self) -> FrozenSet[str]:
        return frozenset(tag for tag, p in self.probs.items() if p > 0)


# === LEY DE γ ===

def _check_time(t: float, strict: bool = False) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0 or (strict and t == 0):
        raise ArgumentError(f"time must be {'> 0' if strict else '>= 0'}, got {t!r}")
    return t


def gamma1_at(init: DynamicsInitial, t: float) -> float:
    return init.beta2 / init.beta3 * math.exp(t / init.tau1)


def evolve_params(init: DynamicsInitial, t: float) -> Tuple[CurveParams, float]:
    """
    Parte determinista de los parámetros en t y γ_I(t). β1(t) es aleatorio;
    se informa su media.
    """
    t = _check_time(t)
    decay = math.exp(-t / init.tau1)
    beta2_t = init.beta2 * decay
    beta3_t = init.beta3 * decay ** 2
    mu, _ = gamma2_law(init, t)
    params = CurveParams(
        beta0=init.beta0,
        beta1=mu * beta3_t,
        beta2=beta2_t,
        beta3=beta3_t,
        tau1=init.tau1,
        tau2=init.tau2,
    )
    return params, gamma1_at(init, t)


def gamma2_law(init: DynamicsInitial, t: float) -> Tuple[float, float]:
    """Media y varianza de γ_II(t)."""
    t = _check_time(t)
    tau1, b3 = init.tau1, init.beta3
    growth = math.exp(t / tau1)
    mu = growth * ((init.beta2 / (b3 * tau1)) * t + init.beta1 / b3 + 2.0) - 2.0
    sigma2 = 2.0 * t * growth ** 2 / (b3 * tau1 ** 2)
    return mu, sigma2


# === HORIZONTES ===

def _log_horizon(tau1: float, ratio: float, shift: float = 0.0) -> float:
    return tau1 * max(shift + math.log(ratio), 0.0)


def horizons(init: DynamicsInitial) -> Horizons:
    tau1, b2, b3 = init.tau1, init.beta2, init.beta3
    if b2 == 0:
        logger.warning("beta2 = 0: gamma_I(t) queda fijo en 0 y los horizontes se informan como 0")
        return Horizons(0.0, 0.0, 0.0, 0.0, 0.0, branch=Sign.ZERO.value, flag=True)
    if b2 > 0:
        params = init.curve_params()
        x_star = cusp_abscissa(CurveKind.YIELD, params)
        cusp_g1, _ = envelope_point(CurveKind.YIELD, params, x_star)
        return Horizons(
            t_dagger_f=_log_horizon(tau1, 4.0 * b3 / b2, -2.5),
            t_star_f=None,
            t_dagger_y=_log_horizon(tau1, cusp_g1 * b3 / b2),
            t_star_star_y=None,
            t_star_y=None,
            branch=Sign.POSITIVE.value,
        )
    return Horizons(
        t_dagger_f=None,
        t_star_f=_log_horizon(tau1, 6.0 * b3 / abs(b2)),
        t_dagger_y=None,
        t_star_star_y=_log_horizon(tau1, 5.0 * b3 / (4.0 * abs(b2))),
        t_star_y=_log_horizon(tau1, 6.0 * b3 / abs(b2)),
        branch=Sign.NEGATIVE.value,
    )


def attainable_over_time(kind: str, init: DynamicsInitial, t: float) -> FrozenSet[str]:
    """
    Formas con probabilidad positiva en t. El instante exacto de un horizonte
    pertenece al conjunto más pequeño.
    """
    t = _check_time(t, strict=True)
    if init.beta2 == 0:
        return shape_probabilities(kind, init, t).support()
    h = horizons(init)
    if kind == CurveKind.FORWARD:
        if init.beta2 > 0:
            return TRAPPED_POSITIVE if t < h.t_dagger_f else frozenset({"i", "h"})
        return TRAPPED_NEGATIVE if t < h.t_star_f else frozenset({"n", "d"})
    if kind != CurveKind.YIELD:
        raise ArgumentError(f"unknown curve kind {kind!r}")
    if init.beta2 > 0:
        if t < h.t_dagger_y:
            return frozenset({"i", "h", "hd", "n"})
        return frozenset({"i", "h", "n"})
    if t < h.t_star_star_y:
        return frozenset({"i", "h", "hd", "n"})
    if t == h.t_star_star_y:
        return frozenset({"i", "hd", "n"})
    if t < h.t_star_y:
        return frozenset({"i", "d", "hd", "n"})
    return frozenset({"i", "d", "n"})


# === PROBABILIDADES ===

def _mass(lo: float, hi: float, mu: float, sigma: float) -> float:
    """P(lo < γ_II < hi) sin cancelación en la cola derecha."""
    if hi <= lo:
        return 0.0
    a = (lo - mu) / sigma
    b = (hi - mu) / sigma
    if a > 0:
        p = normal_sf(a) - normal_sf(b)
    else:
        p = normal_cdf(b) - normal_cdf(a)
    return p if p >= PROB_FLOOR else 0.0


def _forward_envelope_ordinate(tau1: float, x: float) -> float:
    u = x / tau1
    return -(4.0 / tau1 ** 2) * math.exp(-u) * (x ** 2 - 1.5 * x * tau1 + tau1 ** 2)


def forward_crossings(tau1: float, gamma1: float) -> List[Tuple[str, float]]:
    """
    Abscisas x con η₁(x) = γ_I sobre la envolvente forward con τ2 = τ1/2:
    (x - 3τ1/2)·e^(-x/τ1) = τ1·γ_I/4, resuelta con las ramas de Lambert W.
    """
    sols = solve_lambert_equation(-1.5 * tau1, -1.0 / tau1, tau1 * gamma1 / 4.0)
    return [(branch, x) for branch, x in sols if x >= 0]


def _forward_probabilities(init: DynamicsInitial, t: float, mu: float, sigma: float) -> Dict[str, float]:
    tau1 = init.tau1
    g = gamma1_at(init, t)
    i0 = 2.0 + g
    if init.beta2 > 0:
        probs = dict.fromkeys(("i", "h", "hdh"), 0.0)
        crossings = forward_crossings(tau1, g)
        if len(crossings) == 2:
            lo = _forward_envelope_ordinate(tau1, crossings[0][1])
            hi = _forward_envelope_ordinate(tau1, crossings[1][1])
            lo, hi = min(lo, hi), max(lo, hi)
            probs["hdh"] = _mass(lo, hi, mu, sigma)
        probs["i"] = _mass(i0, math.inf, mu, sigma)
        probs["h"] = max(1.0 - probs["i"] - probs["hdh"], 0.0)
        return probs
    probs = dict.fromkeys(("n", "d", "hd"), 0.0)
    crossings = forward_crossings(tau1, g) if g > -6.0 else []
    probs["d"] = _mass(i0, math.inf, mu, sigma)
    if crossings:
        lo = _forward_envelope_ordinate(tau1, crossings[0][1])
        probs["hd"] = _mass(lo, i0, mu, sigma)
    probs["n"] = max(1.0 - probs["d"] - probs["hd"], 0.0)
    return probs


def _band_probabilities(kind: str, init: DynamicsInitial, t: float, mu: float, sigma: float) -> Dict[str, float]:
    """
    Masas entre todos los cortes de la vertical γ_I(t) con ℓ₀, ℓ∞ y la
    envolvente; cada banda se etiqueta clasificando un punto interior.
    """
    tau1, tau2 = init.tau1, init.tau2
    g = gamma1_at(init, t)
    params = CurveParams.from_gamma(g, 0.0, tau1, tau2)
    cuts = [2.0 + g]
    if kind == CurveKind.YIELD:
        cuts.append(-g - 0.5)
    x_hi = max(200.0 * tau1, 50.0 * tau1 / max(abs(g), 1e-12))
    cuts.extend(pt[1] for _, pt in vertical_crossings(kind, params, g, x_hi=min(x_hi, max_horizon(kind, tau1, tau2))))
    cuts = sorted(set(round(c, 14) for c in cuts))
    logger.debug("cortes sobre la vertical gamma_I=%g: %s", g, cuts)

    edges = [-math.inf] + cuts + [math.inf]
    probs: Dict[str, float] = {}
    for lo, hi in zip(edges[:-1], edges[1:]):
        if math.isinf(lo):
            inner = hi - (1.0 + abs(hi))
        elif math.isinf(hi):
            inner = lo + (1.0 + abs(lo))
        else:
            inner = 0.5 * (lo + hi)
        tag = classify_direct(kind, CurveParams.from_gamma(g, inner, tau1, tau2)).tag
        probs[tag] = probs.get(tag, 0.0) + _mass(lo, hi, mu, sigma)
    return probs


def shape_probabilities(kind: str, init: DynamicsInitial, t: float) -> ShapeDistribution:
    t = _check_time(t, strict=True)
    mu, sigma2 = gamma2_law(init, t)
    sigma = math.sqrt(sigma2)
    if kind == CurveKind.FORWARD and init.beta2 != 0:
        probs = _forward_probabilities(init, t, mu, sigma)
    elif kind in (CurveKind.FORWARD, CurveKind.YIELD):
        probs = _band_probabilities(kind, init, t, mu, sigma)
    else:
        raise ArgumentError(f"unknown curve kind {kind!r}")
    total = sum(probs.values())
    if total > 0 and abs(total - 1.0) > 1e-12:
        probs = {k: v / total for k, v in probs.items()}
    return ShapeDistribution(t=t, kind=str(kind), probs=probs)


# === SIMULACIÓN ===

def sample_shapes(
    kind: str,
    init: DynamicsInitial,
    t: float,
    n: int,
    seed: int = None,
    threads: int = 1,
    points: int = None,
) -> ShapeDistribution:
    """
    Muestreo exacto de γ_II(t) (ley gaussiana, sin discretización) y
    clasificación directa de cada curva. Los fragmentos usan semillas hijas
    de SeedSequence(seed), así el resultado no depende de `threads`.
    """
    t = _check_time(t, strict=True)
    if n < 1:
        raise ArgumentError(f"n must be >= 1, got {n!r}")
    seed = int(seed if seed is not None else get_setting("SEED"))
    mu, sigma2 = gamma2_law(init, t)
    g = gamma1_at(init, t)
    sizes = [MC_SHARD] * (n // MC_SHARD) + ([n % MC_SHARD] if n % MC_SHARD else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    logger.info("Monte Carlo kind=%s t=%g n=%d fragmentos=%d", kind, t, n, len(sizes))

    def run(task):
        size, child = task
        gamma2 = gaussian_samples(mu, math.sqrt(sigma2), size, child)
        return classify_batch(kind, (init.tau1, init.tau2), gamma2, g, 1.0, points=points)

    tags = [tag for part in ordered_map(run, list(zip(sizes, children)), threads) for tag in part]
    counts = Counter(tags)
    probs = {tag: counts[tag] / n for tag in sorted(counts)}
    return ShapeDistribution(t=t, kind=str(kind), probs=probs, n=n, counts=dict(sorted(counts.items())))


def _beta1_drift(init: DynamicsInitial, s: float, beta1):
    tau1 = init.tau1
    return (
        init.beta2 / tau1 * math.exp(-s / tau1)
        + 2.0 * init.beta3 / tau1 * math.exp(-2.0 * s / tau1)
        - beta1 / tau1
    )


def euler_gamma2_moments(init: DynamicsInitial, t: float, steps_per_tau: int = EULER_STEPS_PER_TAU) -> Tuple[float, float]:
    """Media y varianza exactas del esquema de Euler-Maruyama para β1, llevadas a γ_II(t)."""
    t = _check_time(t)
    tau1 = init.tau1
    steps = max(int(math.ceil(t / tau1 * steps_per_tau)), 1)
    dt = t / steps
    mean, var = init.beta1, 0.0
    for k in range(steps):
        s = k * dt
        vol = math.sqrt(2.0 * init.beta3) / tau1 * math.exp(-s / tau1)
        mean = mean + _beta1_drift(init, s, mean) * dt
        var = (1.0 - dt / tau1) ** 2 * var + vol ** 2 * dt
    scale = math.exp(2.0 * t / tau1) / init.beta3
    return mean * scale, var * scale ** 2


def euler_gamma2_paths(
    init: DynamicsInitial,
    t: float,
    n_paths: int,
    seed: int = None,
    steps_per_tau: int = EULER_STEPS_PER_TAU,
) -> np.ndarray:
    """Valores de γ_II(t) por integración de Euler-Maruyama de la EDE de β1."""
    t = _check_time(t)
    if n_paths < 1:
        raise ArgumentError(f"n_paths must be >= 1, got {n_paths!r}")
    seed = int(seed if seed is not None else get_setting("SEED"))
    tau1 = init.tau1
    steps = max(int(math.ceil(t / tau1 * steps_per_tau)), 1)
    dt = t / steps
    rng = np.random.default_rng(seed)
    beta1 = np.full(n_paths, float(init.beta1))
    for k in range(steps):
        s = k * dt
        vol = math.sqrt(2.0 * init.beta3) / tau1 * math.exp(-s / tau1)
        dw = rng.standard_normal(n_paths) * math.sqrt(dt)
        beta1 = beta1 + _beta1_drift(init, s, beta1) * dt + vol * dw
    return beta1 * math.exp(2.0 * t / tau1) / init.beta3


def long_run_shape(init: DynamicsInitial) -> str:
    if init.beta2 > 0:
        return ShapeTag.INVERSE.value
    if init.beta2 < 0:
        return ShapeTag.NORMAL.value
    raise UndeterminedError("beta2 = 0 selects no long-run shape")

"""
Núcleos numéricos compartidos: raíces con bracketing (Brent), CDF normal,
las dos ramas reales de Lambert W y muestreo gaussiano determinista.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy import optimize, special

from .choices import WBranch
from .exceptions import BracketingError, DomainError, NumericalError

logger = logging.getLogger(__name__)

INV_E = math.exp(-1.0)
DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise DomainError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


def _finite_eval(f: Callable[[float], float], x: float) -> float:
    y = float(f(x))
    if not math.isfinite(y):
        raise NumericalError(f"non-finite function value at x={x!r}")
    return y


def brent_root(f: Callable[[float], float], bracket: Bracket, tol: float = DEFAULT_TOL) -> float:
    """
    Raíz de f en [lo, hi] por el método de Brent (scipy.optimize.brentq).

    Exige cambio de signo en los extremos o que uno de ellos ya sea raíz.
    """
    lo, hi = bracket.lo, bracket.hi
    f_lo = _finite_eval(f, lo)
    if f_lo == 0.0:
        return lo
    f_hi = _finite_eval(f, hi)
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise BracketingError(
            f"no sign change in [{lo}, {hi}]: f(lo)={f_lo:.3e}, f(hi)={f_hi:.3e}"
        )
    root = optimize.brentq(
        lambda x: _finite_eval(f, x), lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200
    )
    return float(root)


def expand_bracket_up(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    factor: float = 2.0,
    max_steps: int = 60,
) -> Bracket:
    """
    Aleja `hi` geométricamente hasta que f cambie de signo respecto de f(lo).
    """
    f_lo = _finite_eval(f, lo)
    for step in range(max_steps):
        f_hi = _finite_eval(f, hi)
        if f_hi == 0.0 or (f_hi > 0) != (f_lo > 0):
            return Bracket(lo, hi)
        logger.debug("expandiendo bracket: paso=%d hi=%g", step, hi)
        lo, f_lo = hi, f_hi
        hi = hi * factor
    raise BracketingError(f"could not bracket a sign change above {lo}")


def normal_cdf(z: float) -> float:
    """Φ(z) vía scipy.special.ndtr (satura a 0/1 en las colas)."""
    return float(special.ndtr(z))


def normal_sf(z: float) -> float:
    """1 - Φ(z) sin cancelación en la cola derecha."""
    return float(special.ndtr(-z))


# === LAMBERT W ===

def _halley(z: float, w: float) -> float:
    # Corless et al., iteración de Halley; ~5 pasos bastan salvo junto a -1/e
    for _ in range(100):
        ew = math.exp(w)
        f = w * ew - z
        w1 = w + 1.0
        if w1 == 0.0:
            break
        dw = f / (ew * w1 - (w + 2.0) * f / (2.0 * w1))
        w -= dw
        if abs(dw) <= 1e-15 * (1.0 + abs(w)):
            break
    return w


def _branch_point_series(z: float, sign: float) -> float:
    p = sign * math.sqrt(max(2.0 * (math.e * z + 1.0), 0.0))
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3


def lambert_w(branch: str, x: float) -> float:
    """
    Rama real de Lambert W: w·e^w = x.

    principal (W0): x >= -1/e, devuelve w >= -1.
    minus_one (W-1): -1/e <= x < 0, devuelve w <= -1.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"lambert_w argument must be finite, got {x!r}")
    if x < -INV_E:
        # tolerancia de redondeo en el punto de ramificación
        if x > -INV_E - 1e-15:
            x = -INV_E
        else:
            raise DomainError(f"lambert_w argument {x!r} is below -1/e")
    if x == -INV_E:
        return -1.0

    if branch == WBranch.PRINCIPAL:
        if x == 0.0:
            return 0.0
        if x < -0.25:
            w0 = _branch_point_series(x, 1.0)
        elif x < 3.0:
            w0 = math.log1p(x)
        else:
            l1 = math.log(x)
            l2 = math.log(l1)
            w0 = l1 - l2 + l2 / l1
        w = _halley(x, w0)
        return max(w, -1.0)

    if branch == WBranch.MINUS_ONE:
        if x >= 0.0:
            raise DomainError(f"lambert_w minus_one branch requires x < 0, got {x!r}")
        if x < -0.25:
            w0 = _branch_point_series(x, -1.0)
        else:
            l1 = math.log(-x)
            l2 = math.log(-l1)
            w0 = l1 - l2 + l2 / l1
        w = _halley(x, w0)
        return min(w, -1.0)

    raise DomainError(f"unknown Lambert W branch {branch!r}")


def solve_lambert_equation(a: float, b: float, c: float) -> List[Tuple[str, float]]:
    """
    Soluciones reales de (x + a)·e^(b·x) = c, con b != 0.

    Con y = b(x + a) la ecuación queda y·e^y = b·c·e^(a·b), por lo que
    x = W(b·c·e^(a·b))/b - a en cada rama real admisible.
    """
    if b == 0.0:
        raise DomainError("solve_lambert_equation requires b != 0")
    z = b * c * math.exp(a * b)
    if z < -INV_E:
        return []
    out = [(WBranch.PRINCIPAL.value, lambert_w(WBranch.PRINCIPAL, z) / b - a)]
    if -INV_E < z < 0.0:
        out.append((WBranch.MINUS_ONE.value, lambert_w(WBranch.MINUS_ONE, z) / b - a))
    return out


# === MUESTREO ===

def gaussian_samples(
    mean: float,
    stdev: float,
    n: int,
    seed: Union[int, np.random.SeedSequence, None],
) -> np.ndarray:
    """n muestras N(mean, stdev²) deterministas para una semilla (o SeedSequence) dada."""
    if stdev < 0 or not math.isfinite(stdev):
        raise DomainError(f"stdev must be >= 0, got {stdev!r}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    rng = np.random.default_rng(seed)
    if stdev == 0.0:
        return np.full(n, float(mean))
    return rng.normal(loc=mean, scale=stdev, size=n)

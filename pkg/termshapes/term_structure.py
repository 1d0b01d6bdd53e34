"""
Parámetros y evaluación puntual de las curvas forward y de rendimiento de las
familias Nelson-Siegel, Bliss y Svensson.

Convención: x y tau en años, tasas adimensionales con capitalización continua.
Todas las funciones aceptan un escalar o un np.ndarray en x.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

import numpy as np

from .choices import CurveKind, Family, RegimeTag, Sign
from .exceptions import DegenerateFamilyError, FamilyError, ParameterError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Debajo de este u = x/tau la función g de la curva de rendimiento se evalúa por serie.
YIELD_SERIES_CUTOFF = 0.5
YIELD_SERIES_TERMS = 24


# === TIPOS ===

@dataclass(frozen=True)
class CurveParams:
    beta0: float
    beta1: float
    beta2: float
    beta3: float
    tau1: float
    tau2: Optional[float] = None

    def __post_init__(self):
        for name in ("beta0", "beta1", "beta2", "beta3", "tau1"):
            value = getattr(self, name)
            if value is None or not math.isfinite(float(value)):
                raise ParameterError(f"{name} must be finite")
        if not self.tau1 > 0:
            raise ParameterError("tau1 must be positive")
        if self.tau2 is None:
            if self.beta3 != 0:
                raise ParameterError("tau2 is required when beta3 != 0")
        else:
            if not math.isfinite(float(self.tau2)):
                raise ParameterError("tau2 must be finite")
            if not self.tau2 > 0:
                raise ParameterError("tau2 must be positive")
            if self.beta3 != 0 and self.tau1 == self.tau2:
                raise DegenerateFamilyError(
                    "tau1 == tau2 with beta3 != 0 degenerates the Svensson family"
                )

    @property
    def family(self) -> Family:
        if self.beta3 == 0:
            return Family.NELSON_SIEGEL
        if self.beta2 == 0:
            return Family.BLISS
        return Family.SVENSSON

    @property
    def taus(self) -> Tuple[float, float]:
        """(tau1, tau2) con tau2 = tau1 cuando la familia es Nelson-Siegel sin tau2."""
        return self.tau1, (self.tau2 if self.tau2 is not None else self.tau1)

    @property
    def betas(self) -> Tuple[float, float, float, float]:
        return self.beta0, self.beta1, self.beta2, self.beta3

    @staticmethod
    def from_gamma(
        gamma1: float,
        gamma2: float,
        tau1: float,
        tau2: float,
        beta3: float = 1.0,
        beta0: float = 0.0,
    ) -> "CurveParams":
        return CurveParams(
            beta0=beta0,
            beta1=gamma2 * beta3,
            beta2=gamma1 * beta3,
            beta3=beta3,
            tau1=tau1,
            tau2=tau2,
        )

    def with_betas(self, **changes) -> "CurveParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class GammaPoint:
    gamma1: float
    gamma2: float
    beta3_sign: str

    def as_tuple(self) -> Tuple[float, float]:
        return self.gamma1, self.gamma2


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    r: float


# === UTILIDADES ===

def _as_output(value: np.ndarray, scalar: bool) -> ArrayLike:
    return float(value) if scalar else value


def _prepare_x(x: ArrayLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ParameterError("x must be finite")
    if np.any(arr < 0):
        raise ParameterError("x must be >= 0")
    return arr, arr.ndim == 0


def _level_average(u: np.ndarray) -> np.ndarray:
    """L(u) = (1 - e^-u)/u con L(0) = 1."""
    safe = np.where(u > 0, u, 1.0)
    return np.where(u > 0, -np.expm1(-safe) / safe, 1.0)


_SERIES_COEFFS = np.array(
    [(-1) ** (m + 1) * (m + 1) / math.factorial(m + 2) for m in range(YIELD_SERIES_TERMS)]
)


def _g_series(u: np.ndarray, order: int) -> np.ndarray:
    coeffs = _SERIES_COEFFS
    if order >= 1:
        coeffs = np.polynomial.polynomial.polyder(coeffs, order)
    return np.polynomial.polynomial.polyval(u, coeffs)


def _g_direct(u: np.ndarray, order: int) -> np.ndarray:
    e = np.exp(-u)
    n = (u + 1.0) * e - 1.0
    if order == 0:
        return n / u ** 2
    if order == 1:
        return -e / u - 2.0 * n / u ** 3
    if order == 2:
        return e / u + 3.0 * e / u ** 2 + 6.0 * n / u ** 4
    raise ParameterError(f"unsupported derivative order {order}")


def yield_kernel(u: ArrayLike, order: int = 0) -> np.ndarray:
    """
    g(u) = ((u + 1)e^-u - 1)/u² y sus derivadas, con la singularidad
    removible en 0 resuelta por serie de potencias.
    """
    u = np.asarray(u, dtype=float)
    small = u < YIELD_SERIES_CUTOFF
    safe = np.where(small, 1.0, u)
    return np.where(small, _g_series(np.where(small, u, 0.0), order), _g_direct(safe, order))


def basis_functions(kind: str, tau1: float, tau2: float, x: ArrayLike, order: int = 0):
    """
    (a, b, c) y sus derivadas de orden `order` (0, 1 o 2) en x.

    La derivada de la curva es beta3·(a + gamma_I·b + gamma_II·c), es decir,
    beta1·c + beta2·b + beta3·a.
    """
    x = np.asarray(x, dtype=float)
    u1 = x / tau1
    u2 = x / tau2
    e1 = np.exp(-u1)
    e2 = np.exp(-u2)
    sign = (-1.0) ** order
    if kind == CurveKind.FORWARD:
        # h(u) = (1 - u)e^-u, h' = (u - 2)e^-u, h'' = (3 - u)e^-u
        hs = {0: lambda u, e: (1.0 - u) * e, 1: lambda u, e: (u - 2.0) * e, 2: lambda u, e: (3.0 - u) * e}
        if order not in hs:
            raise ParameterError(f"unsupported derivative order {order}")
        h = hs[order]
        a = h(u2, e2) / tau2 ** (order + 1)
        b = h(u1, e1) / tau1 ** (order + 1)
        c = -sign * e1 / tau1 ** (order + 1)
        return a, b, c
    if kind == CurveKind.YIELD:
        g1 = yield_kernel(u1, order)
        g2 = yield_kernel(u2, order)
        a = (g2 + sign * e2) / tau2 ** (order + 1)
        b = (g1 + sign * e1) / tau1 ** (order + 1)
        c = g1 / tau1 ** (order + 1)
        return a, b, c
    raise ParameterError(f"unknown curve kind {kind!r}")


# === OPERACIONES ===

def forward_rate(params: CurveParams, x: ArrayLike) -> ArrayLike:
    x, scalar = _prepare_x(x)
    tau1, tau2 = params.taus
    u1 = x / tau1
    u2 = x / tau2
    e1 = np.exp(-u1)
    value = params.beta0 + params.beta1 * e1 + params.beta2 * u1 * e1
    if params.beta3 != 0:
        value = value + params.beta3 * u2 * np.exp(-u2)
    return _as_output(value, scalar)


def yield_rate(params: CurveParams, x: ArrayLike) -> ArrayLike:
    """Promedio corrido (1/x)∫₀ˣ f; en x = 0 vale beta0 + beta1."""
    x, scalar = _prepare_x(x)
    tau1, tau2 = params.taus
    u1 = x / tau1
    l1 = _level_average(u1)
    value = params.beta0 + params.beta1 * l1 + params.beta2 * (l1 - np.exp(-u1))
    if params.beta3 != 0:
        u2 = x / tau2
        value = value + params.beta3 * (_level_average(u2) - np.exp(-u2))
    return _as_output(value, scalar)


def curve_level(kind: str, params: CurveParams, x: ArrayLike) -> ArrayLike:
    if kind == CurveKind.FORWARD:
        return forward_rate(params, x)
    if kind == CurveKind.YIELD:
        return yield_rate(params, x)
    raise ParameterError(f"unknown curve kind {kind!r}")


def curve_derivative(kind: str, params: CurveParams, x: ArrayLike) -> ArrayLike:
    x, scalar = _prepare_x(x)
    tau1, tau2 = params.taus
    a, b, c = basis_functions(kind, tau1, tau2, x)
    value = params.beta1 * c + params.beta2 * b
    if params.beta3 != 0:
        value = value + params.beta3 * a
    return _as_output(value, scalar)


def to_gamma(params: CurveParams) -> GammaPoint:
    if params.beta3 == 0:
        raise FamilyError("gamma coordinates need beta3 != 0; use the Nelson-Siegel path")
    return GammaPoint(
        gamma1=params.beta2 / params.beta3,
        gamma2=params.beta1 / params.beta3,
        beta3_sign=Sign.POSITIVE if params.beta3 > 0 else Sign.NEGATIVE,
    )


def regime_from_ratio(r: float) -> RegimeTag:
    if not (r > 0 and math.isfinite(r)):
        raise ParameterError(f"ratio r must be positive and finite, got {r!r}")
    if r > 1:
        return RegimeTag.SCALE_REGULAR
    if r == 1:
        raise DegenerateFamilyError("r = 1 does not define a regime")
    if r >= 1.0 / 3.0:
        return RegimeTag.WEAKLY_SCALE_INVERTED
    return RegimeTag.STRONGLY_SCALE_INVERTED


def regime_of(params: CurveParams) -> Regime:
    """Régimen según r = tau1/tau2 (r = 1/3 cuenta como débilmente invertido)."""
    if params.tau2 is None:
        raise ParameterError("tau2 is required to determine the regime")
    r = params.tau1 / params.tau2
    return Regime(tag=regime_from_ratio(r), r=r)

"""Reference values that do not go through the COS series.

* Gil-Pelaez inversion of the CF by panel-wise Gauss-Legendre quadrature.
* The closed-form standard normal CDF and quantile.
* A high-precision COS pipeline (tiny eps, very many terms) cross-checked
  against Gil-Pelaez.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .cf_core import CharacteristicFunctionSpec, Family, cf_eval, mean
from .cos_engine import CosApproximation, ToleranceConfig, build_cos, cdf_eval
from .inversion import bisect_quantile

HIGH_PRECISION_EPS = 1e-9
DESK_N = 100_000
FULL_N = 10_000_000

U_MAX = 1e6


class Method(str, Enum):
    GIL_PELAEZ = "gil-pelaez"
    CLOSED_FORM = "closed-form"
    COS_HIGH_PRECISION = "cos-high-precision"


class ConvergenceError(ArithmeticError):
    """A reference integral could not be driven below its tolerance."""


@dataclass(frozen=True)
class CdfReference:
    y: float
    value: float
    method: Method
    est_error: float


@lru_cache(maxsize=None)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _truncation_point(spec: CharacteristicFunctionSpec, tol: float) -> tuple[float, float]:
    """Smallest doubling U with an exponential-fit tail bound below tol / 2."""
    sd = math.sqrt(spec.cumulants[1]) if math.isfinite(spec.cumulants[1]) else 1.0
    U = 1.0 / sd
    while U <= U_MAX:
        lo, hi = abs(cf_eval(spec, 0.5 * U)), abs(cf_eval(spec, U))
        if hi == 0.0:
            return U, 0.0
        if lo > hi:
            # |phi(u)| <= C exp(-c u) on [U/2, U]; int_U^inf |phi|/u du <= |phi(U)| / (c U)
            rate = math.log(lo / hi) / (0.5 * U)
            tail = 2.0 * hi / (rate * U) / math.pi
            if tail < 0.5 * tol:
                return U, tail
        U *= 2.0
    raise ConvergenceError(f"Gil-Pelaez truncation for {spec.name} not reached below U={U_MAX:g}")


def _panel_integral(g, U: float, width: float, order: int) -> float:
    n_panels = max(16, math.ceil(U / width))
    edges = np.linspace(0.0, U, n_panels + 1)
    x, w = _legendre(order)
    half = 0.5 * (edges[1:] - edges[:-1])
    centre = 0.5 * (edges[1:] + edges[:-1])
    nodes = centre[:, None] + half[:, None] * x[None, :]
    return float(np.sum(half[:, None] * w[None, :] * g(nodes)))


def gil_pelaez_cdf(spec: CharacteristicFunctionSpec, y: float, tol: float = 1e-12) -> CdfReference:
    """F(y) by Gil-Pelaez inversion.

    Full-support laws use ``F(y) = 1/2 - (1/pi) int_0^inf Im{phi(u) e^{-iuy}} / u du``;
    laws on ``(0, inf)`` use ``F(y) = (2/pi) int_0^inf Re{phi(u)} sin(yu) / u du``.
    The removable singularity at ``u = 0`` is filled with its limit.
    """
    if not tol >= 1e-12:
        raise ValueError(f"tol must be at least 1e-12, got {tol}")
    y = float(y)
    positive = spec.support.alpha == 0.0 and spec.support.beta == math.inf
    if positive and y <= 0.0:
        return CdfReference(y, 0.0, Method.GIL_PELAEZ, tol)
    if y <= spec.support.alpha:
        return CdfReference(y, 0.0, Method.GIL_PELAEZ, tol)
    if y >= spec.support.beta:
        return CdfReference(y, 1.0, Method.GIL_PELAEZ, tol)

    mu = mean(spec)
    U, tail = _truncation_point(spec, tol)

    if positive:
        def g(u):
            safe = np.where(u == 0.0, 1.0, u)
            val = np.real(cf_eval(spec, u)) * np.sin(y * u) / safe
            return np.where(u == 0.0, y, val)
        scale, offset = 2.0 / math.pi, 0.0
    else:
        def g(u):
            safe = np.where(u == 0.0, 1.0, u)
            val = np.imag(cf_eval(spec, u) * np.exp(-1j * u * y)) / safe
            return np.where(u == 0.0, mu - y, val)
        scale, offset = -1.0 / math.pi, 0.5

    # one oscillation of e^{-iuy} (and of the CF's drift) per panel
    width = math.pi / max(abs(y), abs(mu), 1.0)
    prev = None
    for order in (8, 16, 32, 64, 128):
        val = offset + scale * _panel_integral(g, U, width, order)
        if prev is not None and abs(val - prev) < 0.5 * tol:
            err = max(abs(val - prev), tail, 1e-16)
            return CdfReference(y, min(1.0, max(0.0, val)), Method.GIL_PELAEZ, err)
        prev = val
    raise ConvergenceError(f"Gil-Pelaez quadrature for {spec.name} at y={y} did not settle to {tol:g}")


# ---------------------------------------------------------------------------
# standard normal
# ---------------------------------------------------------------------------

# Acklam's rational approximation, |rel err| < 1.15e-9 before refinement
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(y: float) -> float:
    return 0.5 * math.erfc(-y / math.sqrt(2.0))


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        return num / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    return num / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)


def normal_quantile(p: float) -> float:
    """Standard normal quantile: rational start plus two Newton steps on the erfc CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")
    x = _acklam(p)
    for _ in range(2):
        # work with the smaller tail to keep the residual accurate
        if x > 0:
            resid = 0.5 * math.erfc(x / math.sqrt(2.0)) - (1.0 - p)
            x += resid / (math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi))
        else:
            resid = normal_cdf(x) - p
            x -= resid / (math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi))
    return x


def normal_closed_form(y: float) -> CdfReference:
    return CdfReference(float(y), normal_cdf(y), Method.CLOSED_FORM, 1e-16)


# ---------------------------------------------------------------------------
# high-precision COS pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HighPrecisionReference:
    p: float
    quantile: float
    cdf: CdfReference
    gil_pelaez: CdfReference
    flagged: bool

    @property
    def discrepancy(self) -> float:
        return abs(self.cdf.value - self.gil_pelaez.value)


@lru_cache(maxsize=16)
def high_precision_build(spec: CharacteristicFunctionSpec, N: int = DESK_N) -> CosApproximation:
    return build_cos(spec, ToleranceConfig(eps=HIGH_PRECISION_EPS, N_override=N))


def high_precision_reference(
    spec: CharacteristicFunctionSpec, p: float, N: int = DESK_N, tol: float = 1e-12
) -> HighPrecisionReference:
    """Reference quantile at ``p`` from a COS build with eps=1e-9 and ``N`` terms.

    The CDF at the quantile is cross-checked with Gil-Pelaez; a disagreement
    beyond eps plus the quadrature error sets ``flagged``.
    """
    cos = high_precision_build(spec, N)
    q = bisect_quantile(cos, p, HIGH_PRECISION_EPS)
    cos_ref = CdfReference(q, cdf_eval(cos, q), Method.COS_HIGH_PRECISION, HIGH_PRECISION_EPS)
    gp = gil_pelaez_cdf(spec, q, tol)
    flagged = abs(cos_ref.value - gp.value) > HIGH_PRECISION_EPS + gp.est_error
    return HighPrecisionReference(float(p), q, cos_ref, gp, flagged)


def reference_cdf(spec: CharacteristicFunctionSpec, y: float, tol: float = 1e-12) -> CdfReference:
    """Best available F(y): closed form for the standard normal, Gil-Pelaez otherwise."""
    if spec.family is Family.NORMAL and spec.params == {"mean": 0.0, "std": 1.0}:
        return normal_closed_form(y)
    return gil_pelaez_cdf(spec, y, tol)


def validate_build(cos: CosApproximation, points: int = 11, tol: float = 1e-10) -> float:
    """Largest |H_COS - F_GilPelaez| over ``points`` interior points; warns above eps."""
    ys = np.linspace(cos.a, cos.b, points + 2)[1:-1]
    worst = max(abs(cdf_eval(cos, y) - gil_pelaez_cdf(cos.spec, y, tol).value) for y in ys)
    if worst > cos.eps:
        warnings.warn(
            f"COS build for {cos.spec.name} misses its tolerance: {worst:.3g} > eps={cos.eps:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    return worst

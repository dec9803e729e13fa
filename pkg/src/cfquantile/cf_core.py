"""Characteristic functions, cumulants and central moments.

Three closed-form families are built in (normal, tempered stable, normal
inverse Gaussian); anything else can be wrapped as a ``custom`` spec by
handing over a CF callable, a support interval and a list of cumulants.

Cumulants are obtained exactly from the power series of the cumulant
generating function ``K(t) = log E[exp(tX)]``; central moments then follow
from the usual cumulant recursion.  No numerical differentiation is done on
the production path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln, kve, roots_genlaguerre

N_MAX = 12


class Family(str, Enum):
    NORMAL = "normal"
    TEMPERED_STABLE = "ts"
    NIG = "nig"
    CUSTOM = "custom"


class SpecError(ValueError):
    """Invalid distribution parameters or unsupported request."""


class QuadratureError(ArithmeticError):
    """Gauss-Laguerre quadrature failed its node-doubling stability check."""


@dataclass(frozen=True)
class SupportInterval:
    alpha: float = -math.inf
    beta: float = math.inf

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise SpecError(f"empty support ({self.alpha}, {self.beta})")
        if self.alpha == math.inf or self.beta == -math.inf:
            raise SpecError("support endpoints point the wrong way")


# ---------------------------------------------------------------------------
# truncated power series helpers
# ---------------------------------------------------------------------------

def _series_pow(base: Sequence[float], power: float, order: int) -> np.ndarray:
    """Coefficients of ``B(t)**power`` up to ``t**order``.

    J.C.P. Miller's recurrence; requires ``base[0] > 0``.
    """
    b = np.zeros(order + 1)
    b[: min(len(base), order + 1)] = base[: order + 1]
    if b[0] <= 0.0:
        raise SpecError("series base must have a positive constant term")
    p = np.zeros(order + 1)
    p[0] = b[0] ** power
    for k in range(1, order + 1):
        acc = 0.0
        for j in range(1, k + 1):
            acc += ((power + 1.0) * j - k) * b[j] * p[k - j]
        p[k] = acc / (k * b[0])
    return p


def _cumulants_from_cgf_series(coeffs: np.ndarray) -> tuple[float, ...]:
    # kappa_n = n! * [t^n] K(t)
    # + 0.0 folds -0.0 into 0.0
    return tuple(math.factorial(n) * float(coeffs[n]) + 0.0 for n in range(1, len(coeffs)))


def central_moments_from_cumulants(cumulants: Sequence[float], order: int) -> list[float]:
    """Central moments m_0..m_order from cumulants kappa_1..kappa_order.

    Uses ``m_n = sum_{k=2}^{n} C(n-1, k-1) kappa_k m_{n-k}`` which is the
    complete Bell polynomial with the first cumulant zeroed.
    """
    if len(cumulants) < order:
        raise SpecError(f"need {order} cumulants, have {len(cumulants)}")
    kap = [0.0, 0.0] + [float(c) for c in cumulants[1:order]]
    m = [1.0] + [0.0] * order
    for n in range(1, order + 1):
        m[n] = sum(math.comb(n - 1, k - 1) * kap[k] * m[n - k] for k in range(2, n + 1))
    return m


# ---------------------------------------------------------------------------
# the spec object
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CharacteristicFunctionSpec:
    """A distribution known through its characteristic function.

    Use the :func:`normal`, :func:`tempered_stable`, :func:`nig` and
    :func:`custom` constructors rather than building this directly.
    """

    family: Family
    params: Mapping[str, float]
    support: SupportInterval
    cumulants: tuple[float, ...]
    _cf: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)

    def _key(self):
        cf_id = id(self._cf) if self.family is Family.CUSTOM else None
        return (self.family, tuple(sorted(self.params.items())), self.support, self.cumulants, cf_id)

    def __eq__(self, other):
        if not isinstance(other, CharacteristicFunctionSpec):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    @property
    def name(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family.value}({inner})"

    def __call__(self, u):
        return cf_eval(self, u)


def normal(mean: float = 0.0, std: float = 1.0) -> CharacteristicFunctionSpec:
    if not (math.isfinite(mean) and math.isfinite(std)) or std <= 0:
        raise SpecError(f"normal needs finite mean and std > 0, got ({mean}, {std})")
    var = std * std

    def cf(u):
        return np.exp(1j * mean * u - 0.5 * var * u * u)

    cum = (float(mean), var) + (0.0,) * (N_MAX - 2)
    return CharacteristicFunctionSpec(
        Family.NORMAL, {"mean": float(mean), "std": float(std)}, SupportInterval(), cum, cf
    )


def tempered_stable(c: float = 1.0, d: float = 1.0, kappa: float = 0.75) -> CharacteristicFunctionSpec:
    """TS law on (0, inf) with CF ``exp(c d - c (d^(1/kappa) - 2iu)^kappa)``."""
    if not c > 0 or not d >= 0 or not 0 < kappa < 1:
        raise SpecError(f"tempered stable needs c>0, d>=0, 0<kappa<1, got ({c}, {d}, {kappa})")
    shift = d ** (1.0 / kappa)

    def cf(u):
        # principal branch; real part of the base is shift >= 0 for real u
        return np.exp(c * d - c * (shift - 2j * u) ** kappa)

    if d > 0:
        # K(t) = c d - c (shift - 2t)^kappa
        series = -c * _series_pow([shift, -2.0], kappa, N_MAX)
        series[0] += c * d
        cum = _cumulants_from_cgf_series(series)
    else:
        # untempered: no finite moments
        cum = (math.inf,) * N_MAX
    return CharacteristicFunctionSpec(
        Family.TEMPERED_STABLE,
        {"c": float(c), "d": float(d), "kappa": float(kappa)},
        SupportInterval(0.0, math.inf),
        cum,
        cf,
    )


def nig(gamma: float = 1.0, theta: float = 0.0, nu: float = 1.0) -> CharacteristicFunctionSpec:
    """NIG law with CF ``exp(-nu (sqrt(gamma^2 - (theta+iu)^2) - sqrt(gamma^2 - theta^2)))``."""
    if not gamma > 0 or not -gamma < theta < gamma or not nu > 0:
        raise SpecError(f"NIG needs gamma>0, |theta|<gamma, nu>0, got ({gamma}, {theta}, {nu})")
    g2 = gamma * gamma
    root0 = math.sqrt(g2 - theta * theta)

    def cf(u):
        z = theta + 1j * u
        return np.exp(-nu * (np.sqrt(g2 - z * z) - root0))

    # K(t) = -nu (sqrt(gamma^2 - theta^2 - 2 theta t - t^2) - root0)
    series = -nu * _series_pow([g2 - theta * theta, -2.0 * theta, -1.0], 0.5, N_MAX)
    series[0] += nu * root0
    return CharacteristicFunctionSpec(
        Family.NIG,
        {"gamma": float(gamma), "theta": float(theta), "nu": float(nu)},
        SupportInterval(),
        _cumulants_from_cgf_series(series),
        cf,
    )


def custom(
    cf: Callable[[np.ndarray], np.ndarray],
    cumulants: Sequence[float],
    support: SupportInterval | tuple[float, float] = SupportInterval(),
    **params: float,
) -> CharacteristicFunctionSpec:
    """Wrap a user-supplied CF.

    ``cf`` must accept a float ndarray and return the complex CF values.
    ``cumulants`` lists kappa_1, kappa_2, ... up to the largest moment order
    that will be requested.
    """
    if not isinstance(support, SupportInterval):
        support = SupportInterval(*support)
    cum = tuple(float(c) for c in cumulants)
    if len(cum) < 2 or not cum[1] > 0:
        raise SpecError("custom spec needs at least mean and a positive variance")
    one = complex(np.asarray(cf(np.zeros(1)))[0])
    if abs(one - 1.0) > 1e-12:
        raise SpecError(f"custom CF has phi(0) = {one}, expected 1")
    return CharacteristicFunctionSpec(Family.CUSTOM, dict(params), support, cum, cf)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def cf_eval(spec: CharacteristicFunctionSpec, u):
    """phi(u) for scalar or array ``u``; scalar input gives a Python complex."""
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise SpecError("characteristic function argument must be finite")
    out = np.asarray(spec._cf(arr), dtype=complex)
    if arr.ndim == 0:
        return complex(out)
    return out


def mean(spec: CharacteristicFunctionSpec) -> float:
    mu = spec.cumulants[0]
    if not math.isfinite(mu):
        raise SpecError(f"{spec.name} has no finite mean")
    return mu


def central_moment(spec: CharacteristicFunctionSpec, n: int) -> float:
    """E[(X - mu)^n] for even ``n`` between 2 and the number of cumulants."""
    if n < 2 or n % 2 or n > len(spec.cumulants):
        raise SpecError(f"central moment order must be even in [2, {len(spec.cumulants)}], got {n}")
    if not all(math.isfinite(k) for k in spec.cumulants[:n]):
        raise SpecError(f"{spec.name} has no finite moment of order {n}")
    return central_moments_from_cumulants(spec.cumulants, n)[n]


@dataclass(frozen=True)
class MomentReport:
    mean: float
    central_moments: dict[int, float]
    method: str = "analytic-cumulant"


def moment_report(spec: CharacteristicFunctionSpec, n: int = 8) -> MomentReport:
    return MomentReport(mean(spec), {k: central_moment(spec, k) for k in range(2, n + 1, 2)})


def standardized_moments(spec: CharacteristicFunctionSpec) -> tuple[float, float, float, float]:
    """(mean, variance, skewness, kurtosis) from the cumulants."""
    k1, k2, k3, k4 = spec.cumulants[:4]
    return k1, k2, k3 / k2**1.5, 3.0 + k4 / (k2 * k2)


def log_abs_cf_tail_integral(spec: CharacteristicFunctionSpec, s: int) -> float:
    """log of ``(1/pi) * int_0^inf u^(s+1) |phi(u)| du``.

    Closed forms for the normal and the symmetric NIG; generalized
    Gauss-Laguerre quadrature with node doubling otherwise.
    """
    if s < 1 or s % 2 == 0:
        raise SpecError(f"smoothness order s must be odd and positive, got {s}")
    m = s + 1
    p = spec.params
    if spec.family is Family.NORMAL:
        # int u^m exp(-sigma^2 u^2 / 2) du = 2^((m-1)/2) Gamma((m+1)/2) / sigma^(m+1)
        log_int = 0.5 * (m - 1) * math.log(2.0) + gammaln(0.5 * (m + 1)) - (m + 1) * math.log(p["std"])
    elif spec.family is Family.NIG and p["theta"] == 0.0:
        # int u^m exp(-nu (sqrt(u^2+g^2) - g)) du
        #   = nu Gamma((m+1)/2) / (2 sqrt(pi)) (2g/nu)^((m+2)/2) e^(nu g) K_{(m+2)/2}(nu g)
        g, nu_ = p["gamma"], p["nu"]
        order = 0.5 * (m + 2)
        log_int = (
            math.log(nu_)
            + gammaln(0.5 * (m + 1))
            - math.log(2.0 * math.sqrt(math.pi))
            + order * math.log(2.0 * g / nu_)
            + math.log(kve(order, nu_ * g))
        )
    else:
        log_int = _log_laguerre_moment(spec, m)
    return log_int - math.log(math.pi)


def abs_cf_tail_integral(spec: CharacteristicFunctionSpec, s: int) -> float:
    """``(1/pi) * int_0^inf u^(s+1) |phi(u)| du``; may overflow to inf for large s."""
    return math.exp(log_abs_cf_tail_integral(spec, s))


def _log_abs_cf(spec, u: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(spec._cf(u)))


def _laguerre_scale(spec, m: int) -> float:
    # place the peak of u^m |phi(u)| where the weight x^m e^-x peaks (x = m),
    # with the local decay rate of |phi| there mapped to 1
    grid = np.geomspace(1e-3, 1e6, 4000)
    logf = m * np.log(grid) + _log_abs_cf(spec, grid)
    u_star = grid[int(np.nanargmax(logf))]
    h = 1e-4 * u_star
    rate = -(_log_abs_cf(spec, np.array([u_star + h]))[0] - _log_abs_cf(spec, np.array([u_star - h]))[0]) / (2 * h)
    if not math.isfinite(rate) or rate <= 0:
        return u_star / m
    return min(1.0 / rate, u_star / m) if rate * u_star > m else u_star / m


def _log_laguerre_moment(spec, m: int, rtol: float = 1e-6) -> float:
    lam = _laguerre_scale(spec, m)
    prev = None
    for n in (32, 64, 128, 256, 512):
        x, w = roots_genlaguerre(n, m)
        keep = w > 0
        x, w = x[keep], w[keep]
        # u = lam x:  lam^(m+1) * sum w_i exp(x_i) |phi(lam x_i)|
        terms = np.log(w) + x + _log_abs_cf(spec, lam * x)
        top = np.max(terms)
        val = (m + 1) * math.log(lam) + top + math.log(np.sum(np.exp(terms - top)))
        if prev is not None and abs(math.expm1(val - prev)) < rtol:
            return val
        prev = val
    raise QuadratureError(
        f"Gauss-Laguerre moment of order {m} for {spec.name} did not stabilise under node doubling"
    )

"""COS approximation of a density and its CDF from the characteristic function.

The density is truncated to ``(a, b)`` and expanded in a cosine series whose
coefficients come straight from CF evaluations::

    c_k = 2/(b-a) * Re{ phi(k pi/(b-a)) * exp(-i k a pi/(b-a)) }
    h(x) = c_0/2 + sum_k c_k cos(k pi (x-a)/(b-a))
    H(y) = c_0/2 (y-a) + sum_k c_k (b-a)/(k pi) sin(k pi (y-a)/(b-a))

The range comes from a Markov-type bound on the n-th central moment and the
number of terms from a smoothness bound involving ``int u^(s+1) |phi(u)| du``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cf_core import (
    CharacteristicFunctionSpec,
    cf_eval,
    central_moment,
    log_abs_cf_tail_integral,
    mean,
)

# matrix elements per chunk when evaluating series on many points
_CHUNK = 1 << 21
MONOTONE_SLACK = 1e-3


class TruncationError(ValueError):
    """The truncation interval collapsed; eps is too large for this law."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Tuning knobs for a COS build.

    Attributes:
        eps: sup-norm tolerance for the CDF approximation.
        delta: target accuracy for quantiles.
        n: even moment order used for the truncation range.
        s: odd smoothness order used for the term count.
        N_override: fixed number of terms, bypassing the term-count bound.
    """

    eps: float = 0.005
    delta: float = 0.01
    n: int = 8
    s: int = 39
    N_override: int | None = None

    def __post_init__(self):
        if not 0.0 < self.eps < 0.5:
            raise ValueError(f"eps must lie in (0, 1/2), got {self.eps}")
        if not self.delta > 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.n < 2 or self.n % 2:
            raise ValueError(f"moment order n must be even and >= 2, got {self.n}")
        if self.s < 1 or self.s % 2 == 0:
            raise ValueError(f"smoothness order s must be odd and >= 1, got {self.s}")
        if self.N_override is not None and self.N_override < 1:
            raise ValueError(f"N_override must be a positive integer, got {self.N_override}")


@dataclass(frozen=True)
class CosApproximation:
    a: float
    b: float
    N: int
    coeffs: np.ndarray = field(repr=False)
    mu: float
    ell: float
    eps: float
    spec: CharacteristicFunctionSpec = field(repr=False, compare=False)
    N_from_formula: bool = True
    monotone: bool = True
    # derived caches
    _freq: np.ndarray = field(init=False, repr=False, compare=False)
    _sin_w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        k = np.arange(1, self.N + 1, dtype=float)
        freq = k * math.pi / (self.b - self.a)
        sin_w = coeffs[1:] / freq
        freq.setflags(write=False)
        sin_w.setflags(write=False)
        object.__setattr__(self, "_freq", freq)
        object.__setattr__(self, "_sin_w", sin_w)

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def mass(self) -> float:
        """c_0 (b-a)/2; one up to round-off."""
        return 0.5 * self.coeffs[0] * (self.b - self.a)

    def cdf(self, y):
        return cdf_eval(self, y)

    def pdf(self, x):
        return density_eval(self, x)


def truncation_range(spec: CharacteristicFunctionSpec, cfg: ToleranceConfig) -> tuple[float, float, float]:
    """Return ``(a, b, ell)`` with ``ell = (2 E[(X-mu)^n] / eps)^(1/n)``.

    The interval ``(mu - ell, mu + ell)`` is clipped to the support.
    """
    mu = mean(spec)
    ell = (2.0 * central_moment(spec, cfg.n) / cfg.eps) ** (1.0 / cfg.n)
    a = max(mu - ell, spec.support.alpha)
    b = min(mu + ell, spec.support.beta)
    if not a < b:
        raise TruncationError(f"degenerate truncation range ({a}, {b}) at eps={cfg.eps}")
    return a, b, ell


def log_term_bound(spec: CharacteristicFunctionSpec, cfg: ToleranceConfig, L: float) -> float:
    """log of the smallest admissible N for half-width ``L`` (before rounding up)."""
    s = cfg.s
    log_int = log_abs_cf_tail_integral(spec, s)
    log_rest = (
        (s + 2.5) * math.log(2.0)
        + (s + 2) * math.log(L)
        - math.log(s)
        - (s + 1) * math.log(math.pi)
        + math.log(12.0 / cfg.eps)
    )
    return (log_int + log_rest) / s


def choose_N(spec: CharacteristicFunctionSpec, cfg: ToleranceConfig, L: float) -> int:
    """Number of cosine terms for half-width ``L``; honours ``cfg.N_override``."""
    if cfg.N_override is not None:
        return int(cfg.N_override)
    if not L > 0:
        raise ValueError(f"half-width L must be positive, got {L}")
    return max(1, math.ceil(math.exp(log_term_bound(spec, cfg, L))))


def cos_coefficients(spec: CharacteristicFunctionSpec, a: float, b: float, N: int) -> np.ndarray:
    k = np.arange(N + 1, dtype=float)
    u = k * math.pi / (b - a)
    phi = cf_eval(spec, u)
    return 2.0 / (b - a) * np.real(phi * np.exp(-1j * u * a))


def build_cos(spec: CharacteristicFunctionSpec, cfg: ToleranceConfig | None = None) -> CosApproximation:
    """Truncation range, term count and coefficients for ``spec`` at ``cfg``."""
    cfg = cfg or ToleranceConfig()
    a, b, ell = truncation_range(spec, cfg)
    N = choose_N(spec, cfg, 0.5 * (b - a))
    coeffs = cos_coefficients(spec, a, b, N)
    cos = CosApproximation(
        a=a,
        b=b,
        N=N,
        coeffs=coeffs,
        mu=mean(spec),
        ell=ell,
        eps=cfg.eps,
        spec=spec,
        N_from_formula=cfg.N_override is None,
    )
    # ripples far below eps cannot move a bisection bracket
    slack = max(1e-12, MONOTONE_SLACK * cfg.eps)
    grid = np.linspace(a, b, 101)
    object.__setattr__(cos, "monotone", bool(np.all(np.diff(cdf_eval(cos, grid)) >= -slack)))
    return cos


def _series(t: np.ndarray, omega: float, weights: np.ndarray, kind: str) -> np.ndarray:
    """``sum_k weights[k-1] * trig(k * omega * t)`` for k = 1..len(weights), trig in {sin, cos}.

    Splits k = m*B + j and expands trig((mB + j) theta) with the angle-addition
    formulas, so each point needs about 2*sqrt(N) trig calls plus two matrix
    products instead of N trig calls.  Every term is still formed exactly.
    """
    n = weights.shape[0] + 1
    B = max(1, math.isqrt(n - 1) + 1)
    M = -(-n // B)
    w = np.zeros(M * B)
    w[1:n] = weights
    wt = w.reshape(M, B).T
    j = np.arange(B, dtype=float)
    mb = np.arange(M, dtype=float) * B
    out = np.empty(t.shape[0])
    step = max(1, _CHUNK // (2 * (B + M)))
    for lo in range(0, t.shape[0], step):
        theta = t[lo : lo + step] * omega
        phase_j = np.outer(theta, j)
        phase_m = np.outer(theta, mb)
        a = np.cos(phase_j) @ wt
        b = np.sin(phase_j) @ wt
        sm, cm = np.sin(phase_m), np.cos(phase_m)
        if kind == "sin":
            out[lo : lo + step] = np.sum(sm * a + cm * b, axis=1)
        else:
            out[lo : lo + step] = np.sum(cm * a - sm * b, axis=1)
    return out


def density_eval(cos: CosApproximation, x):
    """h_COS(x); zero outside ``[a, b]``.  Negative Gibbs lobes are not clipped."""
    xs = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xs).ravel()
    inside = (flat >= cos.a) & (flat <= cos.b)
    out = np.zeros(flat.shape)
    if np.any(inside):
        shifted = flat[inside] - cos.a
        out[inside] = 0.5 * cos.coeffs[0] + _series(shifted, cos._freq[0], cos.coeffs[1:], "cos")
    if xs.ndim == 0:
        return float(out[0])
    return out.reshape(xs.shape)


def cdf_eval(cos: CosApproximation, y):
    """H_COS(y); zero for ``y <= a`` and one for ``y >= b``."""
    ys = np.asarray(y, dtype=float)
    if ys.ndim == 0:
        yv = float(ys)
        if yv <= cos.a:
            return 0.0
        if yv >= cos.b:
            return 1.0
        t = yv - cos.a
        return float(0.5 * cos.coeffs[0] * t + np.sin(t * cos._freq) @ cos._sin_w)
    flat = ys.ravel()
    out = np.where(flat <= cos.a, 0.0, 1.0)
    inside = (flat > cos.a) & (flat < cos.b)
    if np.any(inside):
        t = flat[inside] - cos.a
        out[inside] = 0.5 * cos.coeffs[0] * t + _series(t, cos._freq[0], cos._sin_w, "sin")
    return out.reshape(ys.shape)

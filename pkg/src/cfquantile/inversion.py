"""Quantiles of a COS approximation with a certified error bound.

Bisection gives full control over the inversion error: after the bracket
shrinks below ``eps`` its midpoint is within ``eps`` of the exact root of
``H_COS(y) = p``.  Combined with ``sup |H_COS - F| <= eps`` the distance to
the true quantile is bounded (to first order in ``eps``) by::

    2 eps / min{h(y - eps), h(y + eps)} + 2 eps

where ``h`` is the COS density.  When that bound is above the requested
``delta`` the CDF tolerance is shrunk and the build repeated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .cf_core import CharacteristicFunctionSpec
from .cos_engine import CosApproximation, ToleranceConfig, build_cos, cdf_eval, density_eval

MAX_REFINEMENTS = 10


class QuantileError(ArithmeticError):
    """Base class for quantile failures; ``result`` holds the last diagnostics, if any."""

    def __init__(self, message: str, result: "QuantileResult | None" = None):
        super().__init__(message)
        self.result = result


class ProbabilityRangeError(QuantileError, ValueError):
    """p is outside (0, 1), or p -/+ eps leaves (0, 1)."""


class BracketError(QuantileError):
    """H_COS - p lost its sign change; the build needs more terms."""


class RefinementError(QuantileError):
    """The refinement budget ran out before the bound met delta."""


@dataclass(frozen=True)
class QuantileResult:
    p: float
    y: float
    eps_used: float
    h_min: float
    bound: float
    refinements: int
    delta: float = math.inf
    cos_build: CosApproximation | None = field(default=None, repr=False, compare=False)

    @property
    def certified(self) -> bool:
        return self.bound <= self.delta


def _check_p(p: np.ndarray, eps: float) -> np.ndarray:
    return (p - eps > 0.0) & (p + eps < 1.0)


def _bisect(cos: CosApproximation, p: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    lo = np.full(p.shape, cos.a)
    hi = np.full(p.shape, cos.b)
    mid = 0.5 * (lo + hi)
    width = cos.b - cos.a
    while width >= eps:
        mid = 0.5 * (lo + hi)
        below = cdf_eval(cos, mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        width *= 0.5
    # the last midpoint is an end of the final bracket, so the root is
    # within eps of it; a non-monotone H shows up as a failed bracket here
    ok = (cdf_eval(cos, mid - eps) <= p) & (cdf_eval(cos, mid + eps) >= p)
    return mid, ok


def bisect_quantile(cos: CosApproximation, p, eps: float):
    """Invert ``H_COS`` by bisection on ``(a, b)`` until the bracket is narrower than ``eps``.

    Accepts a scalar or an array of probabilities.  The value returned is the
    last midpoint evaluated, which is one end of the final bracket and hence
    within ``eps`` of the exact root.

    Raises:
        ProbabilityRangeError: if any ``p`` is outside ``(0, 1)``.
        BracketError: if ``H_COS`` is not monotone around the root found.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    ps = np.asarray(p, dtype=float)
    flat = np.atleast_1d(ps).ravel()
    if np.any(~((flat > 0.0) & (flat < 1.0))):
        raise ProbabilityRangeError(f"probabilities must lie in (0, 1), got {p!r}")
    y, ok = _bisect(cos, flat, eps)
    if not np.all(ok):
        raise BracketError(
            f"H_COS is not monotone near p={flat[~ok][0]:g} with N={cos.N}; increase the number of terms"
        )
    if ps.ndim == 0:
        return float(y[0])
    return y.reshape(ps.shape)


def error_bound(cos: CosApproximation, y, eps: float):
    """``2 eps / min{h(y-eps), h(y+eps)} + 2 eps``, or ``inf`` when that minimum is not positive."""
    ys = np.asarray(y, dtype=float)
    m = np.minimum(density_eval(cos, ys - eps), density_eval(cos, ys + eps))
    with np.errstate(divide="ignore"):
        bound = np.where(m > 0, 2.0 * eps / np.where(m > 0, m, 1.0) + 2.0 * eps, math.inf)
    if ys.ndim == 0:
        return float(bound)
    return bound


def _h_min(cos: CosApproximation, y, eps: float):
    return np.minimum(density_eval(cos, np.asarray(y) - eps), density_eval(cos, np.asarray(y) + eps))


def next_eps(eps: float, h_min: float, delta: float) -> float:
    """Next CDF tolerance in the refinement loop.

    Aims at ``0.9 delta / (2/h_min + 2)`` and rounds down onto the 1-2-5
    ladder; falls back to ``eps / 10`` when the density is not positive.
    """
    if not h_min > 0:
        return eps / 10.0
    target = 0.9 * delta / (2.0 / h_min + 2.0)
    if not target > 0:
        # h_min so small that 2/h_min overflows
        return eps / 10.0
    decade = 10.0 ** math.floor(math.log10(target))
    for mult in (5.0, 2.0, 1.0):
        if mult * decade <= target * (1 + 1e-12):
            target = mult * decade
            break
    return min(target, eps / 10.0) if target >= eps else target


def quantile_with_tolerance(
    spec: CharacteristicFunctionSpec,
    p: float,
    delta: float | None = None,
    cfg: ToleranceConfig | None = None,
    refine: bool = True,
) -> QuantileResult:
    """Quantile of ``spec`` at ``p`` whose certified bound is at most ``delta``.

    Starts at ``cfg.eps`` and rebuilds with smaller tolerances until the
    bound holds.  With ``refine=False`` the first build is returned as is.

    Raises:
        ProbabilityRangeError: ``p`` outside ``(0, 1)`` or too close to an end for the current eps.
        RefinementError: bound still above ``delta`` after ``MAX_REFINEMENTS`` rebuilds.
    """
    out = quantile_batch(spec, [p], delta, cfg, refine=refine)[0]
    if isinstance(out, QuantileError):
        raise out
    return out


def quantile_batch(
    spec: CharacteristicFunctionSpec,
    ps: Sequence[float],
    delta: float | None = None,
    cfg: ToleranceConfig | None = None,
    refine: bool = True,
) -> list[QuantileResult | QuantileError]:
    """Quantiles for several probabilities sharing a single COS build.

    Entries that fail are returned as exception instances in place of a
    result; the others are unaffected.
    """
    cfg = cfg or ToleranceConfig()
    delta = cfg.delta if delta is None else float(delta)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    p = np.asarray(ps, dtype=float).ravel()
    out: list = [None] * p.size
    in_range = (p > 0.0) & (p < 1.0)
    for i in np.flatnonzero(~in_range):
        out[i] = ProbabilityRangeError(f"probability must lie in (0, 1), got {p[i]!r}")

    eps = cfg.eps
    refinements = 0
    while True:
        cos = build_cos(spec, replace(cfg, eps=eps))
        if not cos.monotone:
            warnings.warn(
                f"H_COS for {spec.name} is not monotone at N={cos.N}; the quantile bound may be invalid",
                RuntimeWarning,
                stacklevel=2,
            )
        active = in_range & _check_p(p, eps)
        results = {}
        if np.any(active):
            idx = np.flatnonzero(active)
            y, ok = _bisect(cos, p[idx], eps)
            m = _h_min(cos, y, eps)
            bnd = error_bound(cos, y, eps)
            for j, i in enumerate(idx):
                results[i] = QuantileResult(
                    float(p[i]), float(y[j]), eps, float(m[j]), float(bnd[j]), refinements, delta, cos
                )
                if not ok[j]:
                    results[i] = BracketError(
                        f"H_COS is not monotone near p={p[i]:g} with N={cos.N}; increase the number of terms",
                        results[i],
                    )
        failing = [r for r in results.values() if isinstance(r, QuantileResult) and not r.certified]
        if not refine or not failing or refinements >= MAX_REFINEMENTS:
            break
        eps = min(next_eps(eps, r.h_min, delta) for r in failing)
        refinements += 1

    for i in np.flatnonzero(in_range):
        r = results.get(i)
        if r is None:
            out[i] = ProbabilityRangeError(
                f"p={p[i]:g} is within eps={eps:g} of 0 or 1; use a smaller eps", None
            )
        elif refine and isinstance(r, QuantileResult) and not r.certified:
            out[i] = RefinementError(
                f"bound {r.bound:.3g} > delta {delta:g} after {refinements} refinements", r
            )
        else:
            out[i] = r
    return out

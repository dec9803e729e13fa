"""Inverse-transform sampling through a shared, refined COS build."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cf_core import CharacteristicFunctionSpec
from .cos_engine import CosApproximation, ToleranceConfig, build_cos
from .inversion import MAX_REFINEMENTS, RefinementError, _bisect, _h_min, error_bound, next_eps


@dataclass
class SampleReport:
    values: np.ndarray = field(repr=False)
    eps_used: float
    max_bound: float
    refinements: int
    resampled: int
    cos_build: CosApproximation | None = field(default=None, repr=False)


def uniform_stream(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


def sample(
    spec: CharacteristicFunctionSpec,
    size: int,
    seed: int = 0,
    delta: float | None = None,
    cfg: ToleranceConfig | None = None,
) -> SampleReport:
    """Draw ``size`` variates as ``H_Num^{-1}(U)`` with every draw certified to ``delta``.

    Uniforms within the current eps of 0 or 1 are redrawn from the same
    stream.  One COS build is shared by all draws; it is refined until the
    worst draw meets ``delta``.
    """
    if size < 1:
        raise ValueError(f"sample size must be at least 1, got {size}")
    cfg = cfg or ToleranceConfig()
    delta = cfg.delta if delta is None else float(delta)
    rng = uniform_stream(seed)
    u = rng.random(size)
    eps = cfg.eps
    resampled = 0
    refinements = 0
    cos = None
    while True:
        if cos is None or cos.eps != eps:
            cos = build_cos(spec, replace(cfg, eps=eps))
        # draws within eps of 0 or 1 wait for a smaller eps
        ready = (u - eps > 0.0) & (u + eps < 1.0)
        y = np.full(size, np.nan)
        bound = np.zeros(size)
        y[ready], _ = _bisect(cos, u[ready], eps)
        bound[ready] = error_bound(cos, y[ready], eps)
        failing = bound > delta
        if np.any(failing):
            if refinements >= MAX_REFINEMENTS:
                raise RefinementError(
                    f"sampling bound {bound.max():.3g} > delta {delta:g} after {refinements} refinements"
                )
            h = np.unique(_h_min(cos, y[failing], eps))
            eps = min(next_eps(eps, m, delta) for m in h)
            refinements += 1
            continue
        if not np.all(ready):
            n_bad = int((~ready).sum())
            resampled += n_bad
            u[~ready] = rng.random(n_bad)
            continue
        return SampleReport(y, eps, float(bound.max()), refinements, resampled, cos)

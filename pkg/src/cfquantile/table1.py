"""Regression table: quantiles of N(0,1), TS(1,1,3/4) and NIG(1,0,1) with diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cf_core import CharacteristicFunctionSpec, Family, normal, nig, tempered_stable
from .cos_engine import ToleranceConfig, cdf_eval
from .inversion import QuantileResult, quantile_batch
from .reference_oracle import DESK_N, high_precision_reference, normal_quantile, reference_cdf

COLUMNS = (
    "F",
    "eps",
    "b_minus_a",
    "N",
    "p",
    "y",
    "F_y",
    "abs_H_minus_F",
    "abs_quantile_error",
    "h_min",
    "rhs",
)

# printed precision per column, mirroring the published table
FORMATS = {
    "eps": "{:g}",
    "b_minus_a": "{:.1f}",
    "N": "{:d}",
    "p": "{:g}",
    "y": "{:.5f}",
    "F_y": "{:.5f}",
    "abs_H_minus_F": "{:.5f}",
    "abs_quantile_error": "{:.5f}",
    "h_min": "{:.3f}",
    "rhs": "{:.2f}",
}


@dataclass(frozen=True)
class Block:
    label: str
    spec: CharacteristicFunctionSpec
    eps: float
    probabilities: tuple[float, ...]
    N_override: int | None = None


def blocks() -> list[Block]:
    ts, std, nig_ = tempered_stable(1.0, 1.0, 0.75), normal(0.0, 1.0), nig(1.0, 0.0, 1.0)
    return [
        Block("TS", ts, 0.005, (0.01, 0.1, 0.25, 0.75, 0.9, 0.99), N_override=50),
        Block("N(0,1)", std, 0.005, (0.75, 0.9, 0.99)),
        Block("NIG", nig_, 0.005, (0.75, 0.9, 0.99)),
        Block("NIG", nig_, 0.0005, (0.99,)),
    ]


def _reference_quantile(spec: CharacteristicFunctionSpec, p: float, ref_N: int) -> float:
    if spec.family is Family.NORMAL and spec.params == {"mean": 0.0, "std": 1.0}:
        return normal_quantile(p)
    return high_precision_reference(spec, p, ref_N).quantile


def row(block: Block, result: QuantileResult, ref_N: int = DESK_N) -> dict:
    cos = result.cos_build
    F_y = reference_cdf(block.spec, result.y).value
    return {
        "F": block.label,
        "eps": block.eps,
        "b_minus_a": cos.width,
        "N": cos.N,
        "p": result.p,
        "y": result.y,
        "F_y": F_y,
        "abs_H_minus_F": abs(cdf_eval(cos, result.y) - F_y),
        "abs_quantile_error": abs(result.y - _reference_quantile(block.spec, result.p, ref_N)),
        "h_min": result.h_min,
        "rhs": result.bound,
    }


def compute(ref_N: int = DESK_N) -> list[dict | Exception]:
    """All rows of the table; a row whose reference fails is replaced by the exception."""
    rows: list[dict | Exception] = []
    for block in blocks():
        cfg = ToleranceConfig(eps=block.eps, delta=math.inf, N_override=block.N_override)
        for res in quantile_batch(block.spec, block.probabilities, math.inf, cfg, refine=False):
            if isinstance(res, Exception):
                rows.append(res)
                continue
            try:
                rows.append(row(block, res, ref_N))
            except ArithmeticError as exc:
                rows.append(exc)
    return rows


def format_row(r: dict) -> dict[str, str]:
    return {k: FORMATS.get(k, "{}").format(v) for k, v in r.items()}

"""Density, CDF and quantiles with certified error bounds from a characteristic function."""

from .cf_core import (
    CharacteristicFunctionSpec,
    Family,
    MomentReport,
    SpecError,
    SupportInterval,
    abs_cf_tail_integral,
    central_moment,
    cf_eval,
    custom,
    mean,
    moment_report,
    nig,
    normal,
    tempered_stable,
)
from .cos_engine import (
    CosApproximation,
    ToleranceConfig,
    TruncationError,
    build_cos,
    cdf_eval,
    choose_N,
    density_eval,
    truncation_range,
)
from .inversion import (
    BracketError,
    ProbabilityRangeError,
    QuantileError,
    QuantileResult,
    RefinementError,
    bisect_quantile,
    error_bound,
    quantile_batch,
    quantile_with_tolerance,
)
from .reference_oracle import (
    CdfReference,
    gil_pelaez_cdf,
    high_precision_reference,
    normal_cdf,
    normal_quantile,
)
from .sampling import sample

__version__ = "0.1.0"

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad

from cfquantile import cf_eval, custom, gil_pelaez_cdf, nig, normal, normal_cdf, normal_quantile
from cfquantile.cos_engine import ToleranceConfig, build_cos, cdf_eval
from cfquantile.reference_oracle import (
    ConvergenceError,
    Method,
    high_precision_build,
    high_precision_reference,
    normal_closed_form,
    reference_cdf,
    validate_build,
)

from tabledata import FAMILIES, NIG, STD, TS, TS_QUANTILES, phi

# scipy's norminvgauss(a, b, scale) is NIG(gamma=a/scale, theta=b/scale, nu=scale)
NIG_SCIPY = stats.norminvgauss(a=1.0, b=0.0, scale=1.0)


def ts_cdf_by_quad(y, spec=TS):
    # positive-support Gil-Pelaez with QUADPACK's sine-weighted rule
    f = lambda u: cf_eval(spec, u).real / u if u > 0 else 0.0
    total = sum(quad(f, lo, hi, weight="sin", wvar=y, limit=2000)[0] for lo, hi in [(0, 50), (50, 400), (400, 3000)])
    return 2 / math.pi * total


def oracle_grid(spec):
    sd = math.sqrt(spec.cumulants[1])
    mu = spec.cumulants[0]
    lo = max(mu - 5 * sd, spec.support.alpha + 1e-3)
    return np.linspace(lo, mu + 5 * sd, 21)


# --- gil_pelaez_cdf --------------------------------------------------------


def test_normal_median():
    ref = gil_pelaez_cdf(STD, 0.0)
    assert ref.value == pytest.approx(0.5, abs=1e-14)
    assert ref.method is Method.GIL_PELAEZ
    assert ref.est_error > 0


def test_normal_upper_decile_point():
    assert round(gil_pelaez_cdf(STD, 1.28214).value, 5) == 0.90010


@pytest.mark.parametrize("y", [-6.0, -2.5, -0.3, 0.7, 1.9, 4.0])
def test_normal_against_closed_form(y):
    assert gil_pelaez_cdf(STD, y).value == pytest.approx(phi(y), abs=1e-12)


@pytest.mark.parametrize("y", [-3.0, -0.5, 0.4, 1.14023, 2.70203, 6.0])
def test_nig_against_bessel_density(y):
    assert gil_pelaez_cdf(NIG, y).value == pytest.approx(NIG_SCIPY.cdf(y), abs=1e-9)


def test_skewed_nig_against_bessel_density():
    spec = nig(2.0, -0.8, 1.5)
    law = stats.norminvgauss(a=2.0 * 1.5, b=-0.8 * 1.5, scale=1.5)
    for y in (-2.0, -0.7, 0.3):
        assert gil_pelaez_cdf(spec, y).value == pytest.approx(law.cdf(y), abs=1e-9)


@pytest.mark.xfail(strict=True, reason="expected TS column is inconsistent with the stated TS law")
def test_ts_table_point():
    assert round(gil_pelaez_cdf(TS, 0.98974).value, 5) == 0.89978


@pytest.mark.parametrize("p", sorted(TS_QUANTILES))
def test_ts_at_reference_quantiles(p):
    y = TS_QUANTILES[p]
    assert gil_pelaez_cdf(TS, y).value == pytest.approx(p, abs=1e-9)


@pytest.mark.parametrize("y", [0.6064128621, 1.2520102690, 4.8721438716])
def test_ts_against_sine_weighted_quadpack(y):
    assert gil_pelaez_cdf(TS, y).value == pytest.approx(ts_cdf_by_quad(y), abs=1e-8)


def test_ts_is_zero_below_support():
    assert gil_pelaez_cdf(TS, -1.0).value == 0.0
    assert gil_pelaez_cdf(TS, 0.0).value == 0.0


@pytest.mark.parametrize("name", ["TS", "N(0,1)", "NIG"])
def test_gil_pelaez_is_monotone(name):
    spec = FAMILIES[name]
    vals = [gil_pelaez_cdf(spec, y).value for y in oracle_grid(spec)]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert np.all(np.diff(vals) >= -1e-12)


def test_rejects_tolerance_below_double_precision():
    with pytest.raises(ValueError):
        gil_pelaez_cdf(STD, 0.0, tol=1e-15)


def test_slow_decay_does_not_converge():
    spec = custom(lambda u: np.exp(-np.abs(u) ** 0.05) + 0j, [0.0, 1.0])
    with pytest.raises(ConvergenceError):
        gil_pelaez_cdf(spec, 0.3)


# --- normal closed form ----------------------------------------------------


def test_normal_closed_form_values():
    assert normal_closed_form(0.0).value == 0.5
    assert normal_closed_form(0.0).method is Method.CLOSED_FORM
    assert round(normal_quantile(0.75), 7) == 0.6744898
    assert round(normal_quantile(0.99), 7) == 2.3263479


@pytest.mark.parametrize("p", [1e-6, 1e-4, 0.01, 0.02425, 0.3, 0.5, 0.9, 0.97575, 1 - 1e-6])
def test_normal_quantile_against_scipy(p):
    assert normal_quantile(p) == pytest.approx(stats.norm.ppf(p), abs=1e-12)


@given(p=st.floats(1e-6, 1 - 1e-6))
def test_cdf_after_quantile_is_identity(p):
    assert normal_cdf(normal_quantile(p)) == pytest.approx(p, abs=1e-10)


@given(y=st.floats(-30, 30))
def test_normal_cdf_against_scipy(y):
    assert normal_cdf(y) == pytest.approx(stats.norm.cdf(y), abs=1e-15, rel=1e-13)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5])
def test_normal_quantile_rejects_bad_probability(p):
    with pytest.raises(ValueError):
        normal_quantile(p)


def test_reference_cdf_picks_closed_form_for_standard_normal():
    assert reference_cdf(STD, 1.0).method is Method.CLOSED_FORM
    assert reference_cdf(normal(1.0, 2.0), 1.0).method is Method.GIL_PELAEZ
    assert reference_cdf(NIG, 1.0).method is Method.GIL_PELAEZ


# --- high-precision pipeline -----------------------------------------------


@pytest.mark.parametrize("name", ["TS", "N(0,1)", "NIG"])
def test_high_precision_build_agrees_with_gil_pelaez(name):
    spec = FAMILIES[name]
    cos = high_precision_build(spec)
    assert cos.N == 100_000
    ys = oracle_grid(spec)
    diff = [abs(cdf_eval(cos, y) - gil_pelaez_cdf(spec, y).value) for y in ys]
    assert max(diff) <= 1e-9


def test_high_precision_normal_quantile():
    ref = high_precision_reference(STD, 0.75)
    assert ref.quantile == pytest.approx(normal_quantile(0.75), abs=1e-9)
    assert not ref.flagged
    assert ref.discrepancy < 1e-9
    assert ref.cdf.method is Method.COS_HIGH_PRECISION


@pytest.mark.parametrize("p", [0.75, 0.9, 0.99])
def test_high_precision_nig_quantile(p):
    ref = high_precision_reference(NIG, p)
    assert ref.quantile == pytest.approx(NIG_SCIPY.ppf(p), abs=1e-8)
    assert not ref.flagged


@pytest.mark.xfail(strict=True, reason="expected TS column is inconsistent with the stated TS law")
def test_high_precision_ts_upper_quantile_matches_table():
    assert abs(high_precision_reference(TS, 0.99).quantile - 3.36711) <= 0.005


def test_high_precision_ts_upper_quantile():
    ref = high_precision_reference(TS, 0.99)
    assert ref.quantile == pytest.approx(TS_QUANTILES[0.99], abs=1e-9)
    assert ts_cdf_by_quad(ref.quantile) == pytest.approx(0.99, abs=1e-8)
    assert not ref.flagged


# --- validate_build --------------------------------------------------------


def test_validate_build_within_eps():
    assert validate_build(build_cos(STD, ToleranceConfig(eps=0.005))) <= 0.005
    assert validate_build(build_cos(NIG, ToleranceConfig(eps=0.0005))) <= 0.0005


def test_validate_build_warns_on_undersized_build():
    cos = build_cos(STD, ToleranceConfig(eps=1e-4, N_override=4))
    with pytest.warns(RuntimeWarning, match="misses its tolerance"):
        assert validate_build(cos) > 1e-4

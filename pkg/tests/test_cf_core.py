import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import k1

from cfquantile import cf_core
from cfquantile.cf_core import (
    Family,
    SpecError,
    abs_cf_tail_integral,
    central_moment,
    cf_eval,
    custom,
    mean,
    nig,
    normal,
    standardized_moments,
    tempered_stable,
)

BUILTINS = [normal(), tempered_stable(1.0, 1.0, 0.75), nig(1.0, 0.0, 1.0)]
EXTRA = [normal(0.7, 1.9), tempered_stable(2.0, 0.5, 0.4), nig(2.0, -0.8, 1.5)]


def nig_pdf(x, gamma=1.0, theta=0.0, nu=1.0):
    # Bessel-K form with alpha=gamma, beta=theta, delta=nu
    r = np.sqrt(nu * nu + x * x)
    return gamma * nu / np.pi * k1(gamma * r) / r * np.exp(nu * math.sqrt(gamma**2 - theta**2) + theta * x)


# --- cf_eval ---------------------------------------------------------------


@pytest.mark.parametrize("spec", BUILTINS + EXTRA, ids=lambda s: s.name)
def test_cf_at_zero_is_one(spec):
    assert cf_eval(spec, 0.0) == 1.0 + 0.0j


def test_normal_cf_at_one_matches_integral_of_density():
    val, _ = quad(lambda x: math.cos(x) * math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), -np.inf, np.inf)
    assert val == pytest.approx(0.6065307, abs=1e-7)
    got = cf_eval(normal(), 1.0)
    assert got.real == pytest.approx(val, abs=1e-10)
    assert got.imag == pytest.approx(0.0, abs=1e-15)


def test_nig_cf_at_one_matches_bessel_density_integral():
    val, _ = quad(lambda x: math.cos(x) * nig_pdf(x), -np.inf, np.inf, limit=200)
    assert val == pytest.approx(0.6608598, abs=1e-7)
    got = cf_eval(nig(), 1.0)
    assert got.real == pytest.approx(math.exp(-(math.sqrt(2) - 1)), abs=1e-14)
    assert got.real == pytest.approx(val, abs=1e-8)


def test_skewed_nig_cf_matches_bessel_density_integral():
    spec = nig(2.0, -0.8, 1.5)
    pdf = lambda x: nig_pdf(x, 2.0, -0.8, 1.5)
    # density is below 1e-30 outside [-60, 60]
    re, _ = quad(pdf, -60, 60, weight="cos", wvar=0.7, limit=400)
    im, _ = quad(pdf, -60, 60, weight="sin", wvar=0.7, limit=400)
    assert cf_eval(spec, 0.7) == pytest.approx(complex(re, im), abs=1e-8)


def test_cf_accepts_arrays():
    u = np.linspace(-3, 3, 7)
    out = cf_eval(nig(), u)
    assert out.shape == (7,)
    assert out.dtype == complex


def test_cf_rejects_non_finite_argument():
    with pytest.raises(SpecError):
        cf_eval(normal(), math.inf)
    with pytest.raises(SpecError):
        cf_eval(normal(), np.array([0.0, math.nan]))


@settings(max_examples=200, deadline=None)
@given(u=st.floats(-100, 100), which=st.integers(0, len(BUILTINS + EXTRA) - 1))
def test_cf_modulus_and_conjugate_symmetry(u, which):
    spec = (BUILTINS + EXTRA)[which]
    val = cf_eval(spec, u)
    assert abs(val) <= 1 + 1e-12
    assert cf_eval(spec, -u) == pytest.approx(val.conjugate(), abs=1e-15)


# --- construction -------------------------------------------------------------


@pytest.mark.parametrize(
    "make",
    [
        lambda: normal(0.0, 0.0),
        lambda: normal(0.0, -1.0),
        lambda: tempered_stable(0.0, 1.0, 0.5),
        lambda: tempered_stable(1.0, -1.0, 0.5),
        lambda: tempered_stable(1.0, 1.0, 1.0),
        lambda: nig(0.0, 0.0, 1.0),
        lambda: nig(1.0, 1.0, 1.0),
        lambda: nig(1.0, 0.0, 0.0),
    ],
)
def test_invalid_parameters_rejected(make):
    with pytest.raises(SpecError):
        make()


def test_supports():
    assert tempered_stable().support.alpha == 0.0
    assert tempered_stable().support.beta == math.inf
    for spec in (normal(), nig()):
        assert spec.support.alpha == -math.inf and spec.support.beta == math.inf


def test_specs_compare_by_value():
    assert nig(1, 0, 1) == nig(1.0, 0.0, 1.0)
    assert hash(nig(1, 0, 1)) == hash(nig(1.0, 0.0, 1.0))
    assert nig(1, 0, 1) != nig(1, 0, 2)


def test_custom_spec_round_trip():
    spec = custom(lambda u: np.exp(-0.5 * u * u), [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], name=1.0)
    assert spec.family is Family.CUSTOM
    assert central_moment(spec, 8) == pytest.approx(105.0)
    assert cf_eval(spec, 1.0) == pytest.approx(math.exp(-0.5))


def test_custom_spec_checks_phi_at_zero():
    with pytest.raises(SpecError):
        custom(lambda u: 0.5 * np.exp(-u * u), [0.0, 2.0])


def test_untempered_stable_has_no_moments():
    spec = tempered_stable(1.0, 0.0, 0.5)
    with pytest.raises(SpecError):
        mean(spec)


# --- moments ----------------------------------------------------------------


def test_mean_examples():
    assert mean(normal()) == 0.0
    assert mean(tempered_stable(1, 1, 0.75)) == pytest.approx(1.5, abs=1e-14)
    assert mean(nig(1, 0, 1)) == 0.0


def test_normal_eighth_moment_by_brute_force():
    brute, _ = quad(lambda x: x**8 * math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), -np.inf, np.inf)
    assert brute == pytest.approx(105.0, rel=1e-10)
    assert central_moment(normal(), 8) == pytest.approx(brute, rel=1e-12)


def test_ts_variance_and_nig_fourth_moment():
    assert central_moment(tempered_stable(1, 1, 0.75), 2) == pytest.approx(0.75, rel=1e-14)
    assert central_moment(nig(1, 0, 1), 4) == pytest.approx(6.0, rel=1e-14)


@pytest.mark.parametrize(
    "spec, expected",
    [
        (tempered_stable(1, 1, 0.75), (1.5, 0.75, 2.89, 18)),
        (nig(1, 0, 1), (0, 1, 0, 6)),
        (normal(), (0, 1, 0, 3)),
    ],
    ids=["ts", "nig", "normal"],
)
def test_standardized_moments_to_printed_precision(spec, expected):
    got = standardized_moments(spec)
    for g, e in zip(got, expected):
        decimals = len(str(e).split(".")[1]) if "." in str(e) else 0
        assert round(g, decimals) == pytest.approx(e)


def test_variance_equals_second_cumulant():
    for spec in BUILTINS + EXTRA:
        assert central_moment(spec, 2) == pytest.approx(spec.cumulants[1], rel=1e-10)


@pytest.mark.parametrize("n", [0, 3, 14, -2])
def test_bad_moment_orders(n):
    with pytest.raises(SpecError):
        central_moment(normal(), n)


def _mp_cf(spec):
    p = spec.params
    if spec.family is Family.NORMAL:
        m, s = mpmath.mpf(p["mean"]), mpmath.mpf(p["std"])
        return lambda u: mpmath.exp(1j * m * u - s * s * u * u / 2)
    if spec.family is Family.TEMPERED_STABLE:
        c, d, k = (mpmath.mpf(p[x]) for x in ("c", "d", "kappa"))
        return lambda u: mpmath.exp(c * d - c * mpmath.power(d ** (1 / k) - 2j * u, k))
    g, t, nu = (mpmath.mpf(p[x]) for x in ("gamma", "theta", "nu"))
    return lambda u: mpmath.exp(-nu * (mpmath.sqrt(g * g - (t + 1j * u) ** 2) - mpmath.sqrt(g * g - t * t)))


@pytest.mark.parametrize("spec", BUILTINS + EXTRA, ids=lambda s: s.name)
def test_central_moments_match_finite_differences_of_psi(spec):
    # independent oracle: high-precision central differences of
    # psi(u) = phi(u) exp(-i u mu) at u = 0, E[(X-mu)^n] = psi^(n)(0) / i^n
    phi = _mp_cf(spec)
    with mpmath.workdps(50):
        mu = mpmath.diff(phi, 0, 1) / 1j
        psi = lambda u: phi(u) * mpmath.exp(-1j * u * mu)
        sd = mpmath.sqrt(mpmath.re(-mpmath.diff(psi, 0, 2)))
        for n in (2, 4, 6, 8):
            fd = mpmath.re(mpmath.diff(psi, 0, n, h=mpmath.mpf("1e-6") / sd) / (1j) ** n)
            assert central_moment(spec, n) == pytest.approx(float(fd), rel=1e-6)


def test_moment_report_fields():
    rep = cf_core.moment_report(nig(), 8)
    assert rep.mean == 0.0
    assert sorted(rep.central_moments) == [2, 4, 6, 8]
    assert all(v > 0 for v in rep.central_moments.values())
    assert rep.method == "analytic-cumulant"


# --- |phi| moment integral -----------------------------------------------------


def _quad_log_scaled(spec, s, shift):
    m = s + 1

    def log_f(u):
        a = abs(cf_eval(spec, u))
        return -math.inf if (u <= 0 or a == 0) else m * math.log(u) + math.log(a)

    grid = np.geomspace(1e-3, 1e6, 2000)
    peak = grid[int(np.argmax([log_f(u) for u in grid]))]
    f = lambda u: math.exp(log_f(u) - shift)
    # split around the peak so quad cannot miss it
    pieces = [(0, peak / 4), (peak / 4, peak), (peak, 4 * peak), (4 * peak, 64 * peak), (64 * peak, np.inf)]
    return sum(quad(f, lo, hi, limit=1000)[0] for lo, hi in pieces)


def test_normal_tail_integral_s1():
    expected = math.sqrt(math.pi / 2) / math.pi
    assert expected == pytest.approx(0.3989, abs=1e-4)
    assert abs_cf_tail_integral(normal(), 1) == pytest.approx(expected, rel=1e-14)


def test_nig_tail_integral_s1_against_quadrature():
    spec = nig()
    val = abs_cf_tail_integral(spec, 1)
    assert math.isfinite(val)
    oracle = quad(lambda u: u * u * abs(cf_eval(spec, u)), 0, np.inf, limit=500)[0] / math.pi
    assert val == pytest.approx(oracle, rel=1e-8)


@pytest.mark.parametrize("spec", BUILTINS + EXTRA, ids=lambda s: s.name)
@pytest.mark.parametrize("s", [1, 19, 39])
def test_log_tail_integral_against_adaptive_quadrature(spec, s):
    log_val = cf_core.log_abs_cf_tail_integral(spec, s)
    ratio = _quad_log_scaled(spec, s, log_val + math.log(math.pi))
    assert ratio == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("spec", [normal(), nig(), normal(1.0, 2.0)], ids=lambda s: s.name)
def test_laguerre_path_agrees_with_closed_forms(spec):
    for s in (1, 19, 39):
        closed = cf_core.log_abs_cf_tail_integral(spec, s)
        lag = cf_core._log_laguerre_moment(spec, s + 1) - math.log(math.pi)
        assert lag == pytest.approx(closed, abs=1e-6)


def test_tail_integral_rejects_even_s():
    with pytest.raises(SpecError):
        abs_cf_tail_integral(normal(), 2)


def test_series_power_against_binomial():
    # (1 - 2t)^0.75 has coefficients binom(0.75, k) (-2)^k
    got = cf_core._series_pow([1.0, -2.0], 0.75, 6)
    expected = [math.prod(0.75 - i for i in range(k)) / math.factorial(k) * (-2.0) ** k for k in range(7)]
    assert got == pytest.approx(expected, rel=1e-14)

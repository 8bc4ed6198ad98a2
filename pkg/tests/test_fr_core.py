from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from frgeom.fr_core import (
    NEG_INF_DEGREE,
    FitError,
    FRDomainError,
    FRFunction,
    Polynomial,
    certify,
    combine,
    convolve,
    evaluate,
    fr_fit,
    poly_convolution,
    seminorm,
)

coef = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def four_sinh_sq() -> FRFunction:
    return FRFunction(Polynomial((1.0,)), 2.0, 0.0, lambda l: -2.0 + math.exp(-l))


# ---------------------------------------------------------------- polynomial

def test_zero_polynomial_degree_sentinel():
    z = Polynomial((0.0, 0.0))
    assert z.is_zero and z.coefficients == ()
    assert z.degree == NEG_INF_DEGREE


def test_trailing_zeros_trimmed():
    assert Polynomial((1.0, 2.0, 0.0)).degree == 1


@given(st.lists(coef, min_size=1, max_size=4), st.lists(coef, min_size=1, max_size=4),
       st.floats(min_value=0.5, max_value=6.0))
@settings(max_examples=40, deadline=None)
def test_poly_convolution_matches_quadrature(p, q, ell):
    P, Q = Polynomial(tuple(p)), Polynomial(tuple(q))
    exact = poly_convolution(P, Q)(ell)
    num = integrate.quad(lambda t: P(t) * Q(ell - t), 0.0, ell, epsabs=1e-12, epsrel=1e-12)[0]
    assert exact == pytest.approx(num, rel=1e-9, abs=1e-9)


# ---------------------------------------------------------------- eval / seminorm

def test_eval_four_sinh_squared():
    assert evaluate(four_sinh_sq(), 1.0) == pytest.approx(1.0861612696304876, rel=1e-15)


def test_eval_zero_function():
    f = FRFunction.exact(())
    assert f(3.7) == 0.0


def test_eval_l_exp_l():
    assert FRFunction.exact((0.0, 1.0))(2.0) == pytest.approx(14.7781121978613, rel=1e-14)


def test_eval_domain_error():
    with pytest.raises(FRDomainError):
        four_sinh_sq()(0.0)


def test_eval_without_remainder_flags_principal_only():
    f = FRFunction(Polynomial((1.0,)), 1.0, 0.0)
    val, principal_only = f.evaluate(1.0)
    assert principal_only and val == pytest.approx(math.e)


@pytest.mark.parametrize("p,expected", [((1.0,), 1.0), ((), 0.0), ((-3.0, 2.0), 3.0)])
def test_seminorm_examples(p, expected):
    assert seminorm(FRFunction.exact(p)) == expected


@given(st.lists(coef, max_size=4), st.lists(coef, max_size=4), coef, coef)
def test_seminorm_triangle(p, q, a, b):
    f, g = FRFunction.exact(p), FRFunction.exact(q)
    assert seminorm(combine(a, f, b, g)) <= abs(a) * seminorm(f) + abs(b) * seminorm(g) + 1e-12


# ---------------------------------------------------------------- convolution

def test_convolve_exp_exp():
    out = convolve(FRFunction.exact((1.0,)), FRFunction.exact((1.0,)))
    assert out.principal.coefficients == (0.0, 1.0)
    assert out.exact_remainder_zero


def test_convolve_exp_with_half_exp():
    half = FRFunction(Polynomial(), 1.0, 0.0, lambda l: math.exp(l / 2))
    out = convolve(FRFunction.exact((1.0,)), half, grid=np.linspace(1, 30, 30))
    assert out.principal.allclose(Polynomial((2.0,)), atol=1e-9)
    for ell in (1.0, 5.0, 12.0):
        assert out.r(ell) == pytest.approx(-2.0 * math.exp(ell / 2), rel=1e-8)


def test_convolve_pure_remainders():
    half = FRFunction(Polynomial(), 1.0, 0.0, lambda l: math.exp(l / 2))
    out = convolve(half, half, grid=np.linspace(1, 30, 30))
    assert out.principal.is_zero
    for ell in (2.0, 9.0):
        assert abs(out.r(ell)) == pytest.approx(ell * math.exp(ell / 2), rel=1e-9)
        assert abs(out.r(ell)) <= out.constant * (ell + 1) ** out.exponent * math.exp(ell / 2)


@given(st.lists(coef, min_size=1, max_size=3), st.lists(coef, min_size=1, max_size=3))
def test_principal_homomorphism(p, q):
    out = convolve(FRFunction.exact(p), FRFunction.exact(q))
    assert out.principal.allclose(poly_convolution(Polynomial(tuple(p)), Polynomial(tuple(q))), atol=1e-12)


remainder_span = st.tuples(st.floats(0.1, 2.0), st.floats(0.0, 2.0), st.floats(0.0, 2.0))


@given(st.lists(st.floats(0.2, 2.0), min_size=1, max_size=2), remainder_span, remainder_span)
@settings(max_examples=4, deadline=None)
def test_convolution_closure_certified(p, ra, rb):
    def make(princ, r):
        a, b, c = r
        rem = lambda l: a * math.exp(l / 2) + b * (l + 1) * math.exp(l / 2) + c * math.exp(-l)  # noqa: E731
        return FRFunction(Polynomial(tuple(princ)), a + b + c, 1.0, rem)
    grid = np.geomspace(1.0, 40.0, 60)
    out = convolve(make(p, ra), make((), rb), grid=grid)
    check = np.linspace(1.0, 40.0, 200)
    assert certify(out, check) == 0.0


# ---------------------------------------------------------------- fitting

def test_fit_four_sinh_squared():
    ell = np.linspace(5, 30, 60)
    rep = fr_fit(zip(ell, 4 * np.sinh(ell / 2) ** 2), 0)
    assert rep.fitted_principal.coefficients[0] == pytest.approx(1.0, abs=1e-6)
    assert rep.max_violation == 0.0


def test_fit_pure_remainder():
    ell = np.linspace(5, 30, 60)
    rep = fr_fit(zip(ell, np.exp(ell / 2)), 0)
    assert abs(rep.fitted_principal(20.0)) < 1e-5
    assert rep.fitted_exponent == pytest.approx(0.0, abs=1e-6)


def test_fit_linear_principal_with_growing_remainder():
    ell = np.linspace(5, 40, 80)
    vals = ell * np.exp(ell) + (ell + 1) * np.exp(ell / 2)
    rep = fr_fit(zip(ell, vals), 1)
    c0, c1 = rep.fitted_principal.coefficients
    assert abs(c0) < 0.01 and c1 == pytest.approx(1.0, rel=0.01)
    assert rep.fitted_exponent == pytest.approx(1.0, abs=0.05)


@given(st.lists(st.floats(0.5, 3.0), min_size=1, max_size=2), st.floats(0.1, 5.0))
@settings(max_examples=20, deadline=None)
def test_fit_recovers_exact_fr(p, c):
    ell = np.linspace(5, 40, 80)
    P = Polynomial(tuple(p))
    vals = P(ell) * np.exp(ell) + c * np.exp(ell / 2)
    rep = fr_fit(zip(ell, vals), len(p) - 1)
    got = np.array(rep.fitted_principal.coefficients + (0.0,) * (len(p) - len(rep.fitted_principal.coefficients)))
    assert np.allclose(got, p, rtol=1e-3, atol=1e-3 * max(map(abs, p)))


def test_fit_errors():
    with pytest.raises(FitError):
        fr_fit([(5.0, 1.0), (6.0, 2.0)], 1)
    with pytest.raises(FitError):
        fr_fit([(float(x), 1.0) for x in np.linspace(5, 6, 20)], 0)


def test_report_serialisation():
    ell = np.linspace(5, 30, 40)
    rep = fr_fit(zip(ell, 4 * np.sinh(ell / 2) ** 2), 0)
    text = rep.to_text()
    assert text.splitlines()[0] == "degree=0"
    assert "grid_points=40" in text
    assert rep.csv_header() == "deg,p0,c1,c2,max_violation"
    assert rep.csv_row().split(",")[0] == "0"


def test_certify_modes():
    f = four_sinh_sq()
    grid = np.linspace(1, 20, 50)
    assert certify(f, grid, "strong") == 0.0
    assert certify(f, grid, "weak") >= 0.0
    bad = FRFunction(Polynomial((1.0,)), 0.1, 0.0, lambda l: math.exp(l / 2))
    assert certify(bad, grid, "strong") > 0.0

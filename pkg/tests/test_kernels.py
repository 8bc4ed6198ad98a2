from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from frgeom import kernels as K

# reference value of int H from a 50-digit quadrature
INT_H = 0.22199690808403971891


@pytest.fixture(scope="module")
def k10():
    return K.make_kernel(10.0)


def test_bump_values():
    assert K.bump(0.0) == pytest.approx(math.exp(-1))
    assert K.bump(np.array([-0.5, 0.5, 0.7])).tolist() == [0.0, 0.0, 0.0]
    assert K.make_bump().normalization == pytest.approx(INT_H, rel=1e-12)


def test_h_matches_adaptive_quadrature():
    for x in (-0.9, -0.3, 0.0, 0.41, 0.77):
        assert float(K.h(x)[0]) == pytest.approx(K.h_quad(x), abs=1e-14)


@given(st.floats(-1.5, 1.5))
def test_h_even_nonnegative_supported(x):
    a, b = float(K.h(x)[0]), float(K.h(-x)[0])
    assert a == pytest.approx(b, abs=1e-15)
    assert a >= 0.0
    if abs(x) >= 1.0:
        assert a == 0.0


def test_scaled_kernel_rejects_small_L():
    with pytest.raises(K.KernelDomainError):
        K.make_kernel(0.5)


def test_derivative_examples(k10):
    assert K.eval_hL_derivative(k10, 12.0, 0) == 0.0
    assert K.eval_hL_derivative(k10, 0.0, 1) == pytest.approx(0.0, abs=1e-15)
    x, s = 5.0, 1e-4
    fd = (K.eval_hL_derivative(k10, x + s) - 2 * K.eval_hL_derivative(k10, x) + K.eval_hL_derivative(k10, x - s)) / s ** 2
    assert K.eval_hL_derivative(k10, x, 2) == pytest.approx(fd, rel=1e-6)


def test_derivative_cap(k10):
    with pytest.raises(K.KernelDomainError):
        K.eval_hL_derivative(k10, 1.0, 13)
    with pytest.raises(K.KernelDomainError):
        K.apply_D_power(k10, 7, 1.0)


def test_apply_D_examples(k10):
    for x in (0.0, 3.0, 8.5):
        assert K.apply_D_power(k10, 0, x) == K.eval_hL_derivative(k10, x)
    assert K.apply_D_power(k10, 1, 10.0) == 0.0
    assert K.apply_D_power(k10, 1, -11.0) == 0.0
    hl = lambda t: K.eval_hL_derivative(k10, t)  # noqa: E731
    fd = float(K.apply_D_numeric(hl, 2, np.array([3.0]))[0])
    assert K.apply_D_power(k10, 2, 3.0) == pytest.approx(fd, rel=1e-5)


@given(st.floats(10.0, 50.0), st.integers(0, 3))
def test_apply_D_zero_outside_support(x, m):
    k = K.make_kernel(10.0)
    assert K.apply_D_power(k, m, x) == 0.0
    assert K.apply_D_power(k, m, -x) == 0.0


@given(st.integers(0, 4), st.lists(st.floats(-2, 2), min_size=1, max_size=5))
def test_D_annihilates_low_degree(extra, coeffs):
    q = K.apply_D_exp_poly(coeffs, len(coeffs) + extra)
    assert len(q) == 0


def test_D_annihilation_at_points():
    x = np.linspace(0.5, 5.0, 50)
    for d in range(3):
        fd = K.apply_D_numeric(lambda t, d=d: t ** d * np.exp(t / 2), d + 1, x)
        assert np.max(np.abs(fd)) <= 1e-5
        assert len(K.apply_D_exp_poly([0.0] * d + [1.0], d + 1)) == 0
    # one power short leaves a nonzero multiple of e^{l/2}
    assert K.apply_D_exp_poly([0.0, 1.0], 1).tolist() == [-1.0]


# ---------------------------------------------------------------- Fourier

def test_fourier_at_zero(k10):
    assert K.fourier(k10, 0.0) == pytest.approx(10.0 * INT_H ** 2, rel=1e-10)


def test_fourier_imaginary_axis(k10):
    t = 0.3
    val = K.fourier(k10, 1j * t)
    ref = 2 * 10.0 * integrate.quad(lambda s: K.h_quad(s) * math.cosh(t * 10.0 * s), 0, 1, epsabs=1e-13)[0]
    assert isinstance(val, float) and val > 0
    assert val == pytest.approx(ref, rel=1e-9)


def test_fourier_frozen_values(k10):
    assert K.fourier(k10, 0.3) == pytest.approx(0.34192, rel=1e-4)
    assert K.fourier(k10, 0.5j) == pytest.approx(1.24374, rel=1e-4)


def test_fourier_scaling_identity():
    rng = np.random.default_rng(7)
    for L in (3.0, 10.0):
        k = K.make_kernel(L)
        for _ in range(10):
            r = complex(rng.uniform(-5, 5), rng.uniform(-0.5, 0.5))
            a, b = K.fourier(k, r), K.fourier_via_square(k, r)
            assert abs(a - b) <= 1e-8 * max(abs(b), 1e-12)


def test_fourier_positive_on_axes():
    k = K.make_kernel(10.0)
    rng = np.random.default_rng(8)
    for r in rng.uniform(-50, 50, 50):
        assert K.fourier(k, r) >= -1e-10
    for t in rng.uniform(-0.5, 0.5, 50):
        assert K.fourier(k, 1j * t) >= -1e-10


def test_fourier_strip_error(k10):
    with pytest.raises(K.KernelDomainError):
        K.fourier(k10, 0.6j)


@pytest.mark.parametrize("alpha,eps", [(0.25, 0.01), (1 / 6, 0.005)])
def test_growth_bound(alpha, eps):
    for L in (5.0, 10.0, 20.0, 40.0):
        C, ok = K.growth_bound_check(K.make_kernel(L), alpha, eps)
        assert C > 0 and ok


def test_growth_bound_parameter_errors(k10):
    with pytest.raises(K.KernelDomainError):
        K.growth_bound_check(k10, 0.6, 0.01)
    with pytest.raises(K.KernelDomainError):
        K.growth_bound_check(k10, 0.25, 0.5)


# ---------------------------------------------------------------- cancellation

def four_sinh_sq(x):
    return 4.0 * math.sinh(x / 2) ** 2


def test_cancellation_zero_function(k10):
    assert K.cancellation_integral(lambda x: 0.0, 1, k10) == 0.0


@pytest.mark.parametrize("L", [10.0, 20.0])
def test_cancellation_boundary_term(L):
    # f = e^l, m = 1: integration by parts leaves -h(0)/2
    k = K.make_kernel(L)
    val = K.cancellation_integral(math.exp, 1, k)
    assert val == pytest.approx(-0.5 * float(K.h(0.0)[0]), rel=1e-8)


@pytest.mark.parametrize("L", [10.0, 20.0, 30.0, 40.0])
def test_cancellation_four_sinh_sq_identity(L):
    # boundary terms cancel; only the e^{-3l/2} part survives
    k = K.make_kernel(L)
    ref = -2.0 * integrate.quad(lambda x: math.exp(-1.5 * x) * K.h_quad(x / L), 0, L, epsabs=1e-13)[0]
    val = K.cancellation_integral(four_sinh_sq, 1, k)
    assert val == pytest.approx(ref, rel=1e-7)
    assert abs(val) < 0.1


def test_cancellation_m0_ratio_decays():
    # m = 0: value / e^{L/2} matches an adaptive-quadrature oracle and shrinks with L
    ratios = []
    for L in (10.0, 20.0, 30.0):
        k = K.make_kernel(L)
        ratio = K.cancellation_integral(four_sinh_sq, 0, k) / math.exp(L / 2)
        ref = integrate.quad(lambda x: four_sinh_sq(x) * math.exp(-x / 2) * K.h_quad(x / L), 0, L,
                             epsabs=0.0, epsrel=1e-11, limit=200)[0] / math.exp(L / 2)
        assert ratio == pytest.approx(ref, rel=1e-7)
        ratios.append(ratio)
    assert ratios[0] > ratios[1] > ratios[2] > 0


def test_cancellation_growth_law_degree_one():
    # f = l e^l + (l+1) e^{l/2}: degree 1, m = 2; |value| / (|f|_F + c1 (L+1)^{c2+1}) with c1 = c2 = 1
    f = lambda x: x * math.exp(x) + (x + 1) * math.exp(x / 2)  # noqa: E731
    ratios = []
    for L in (10.0, 20.0, 30.0, 40.0):
        v = K.cancellation_integral(f, 2, K.make_kernel(L))
        ratios.append(abs(v) / (1.0 + (L + 1) ** 2))
    C = max(ratios)
    assert C < 1e-3
    assert max(ratios[1:]) / min(ratios[1:]) < 1.1


@pytest.mark.parametrize("H1,L", [
    (lambda x, o: math.exp(x / 2) / 2 ** o, 10.0),
    (lambda x, o: 1.0 if o == 0 else 0.0, 7.0),
    (lambda x, o: [x, 1.0, 0.0][o], 20.0),
])
def test_ibp_identity(H1, L):
    assert K.ibp_identity_check(H1, K.make_kernel(L)) <= 1e-8

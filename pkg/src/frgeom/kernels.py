"""Bump kernels h = H * H, their rescalings h_L, D = 1/4 - d^2 and Fourier transforms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial as NPoly
from numpy.polynomial.legendre import leggauss
from scipy import integrate

GL_NODES = 240
_EXP_CUTOFF = 700.0


class KernelDomainError(ValueError):
    pass


@lru_cache(maxsize=None)
def _bump_numerators(k: int) -> tuple[NPoly, ...]:
    """P_0..P_k with H^(i)(x) = P_i(x) / q(x)^(2i) H(x), q = 1 - 4x^2."""
    q = NPoly([1.0, 0.0, -4.0])
    x = NPoly([0.0, 1.0])
    out = [NPoly([1.0])]
    for i in range(k):
        P = out[-1]
        out.append(q * (q * P.deriv() + 16 * i * x * P) - 8 * x * P)
    return tuple(out)


def bump(x, order: int = 0) -> np.ndarray:
    """H(x) = exp(-1/(1-4x^2)) on (-1/2, 1/2) and its derivatives."""
    x = np.asarray(x, dtype=float)
    q = 1.0 - 4.0 * x * x
    out = np.zeros_like(x)
    inside = q > 1.0 / _EXP_CUTOFF
    xi, qi = x[inside], q[inside]
    val = np.exp(-1.0 / qi)
    if order:
        P = _bump_numerators(order)[order]
        val = val * P(xi) / qi ** (2 * order)
    out[inside] = val
    return out


@dataclass(frozen=True)
class BumpKernel:
    half_support: float
    normalization: float

    def __call__(self, x, order: int = 0):
        return bump(x, order)


@dataclass(frozen=True)
class TestKernel:
    base: BumpKernel
    derivative_order_cap: int = 12


@dataclass(frozen=True)
class ScaledKernel:
    kernel: TestKernel
    L: float

    def __post_init__(self):
        if not self.L >= 1.0:
            raise KernelDomainError("scale L must be >= 1")


@lru_cache(maxsize=1)
def make_bump() -> BumpKernel:
    norm, _ = integrate.quad(lambda x: float(bump(np.array([x]))[0]), -0.5, 0.5, epsabs=0.0, epsrel=1e-12)
    return BumpKernel(0.5, norm)


def make_kernel(L: float, derivative_order_cap: int = 12) -> ScaledKernel:
    return ScaledKernel(TestKernel(make_bump(), derivative_order_cap), float(L))


_GL = leggauss(GL_NODES)


def h(x, order: int = 0) -> np.ndarray:
    """h = H * H (support [-1, 1]) and its derivatives, by Gauss-Legendre.

    The integrand is flat at both ends of its support, so a fixed rule converges
    fast and varies smoothly with x (finite differences of h stay clean).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(x)
    lo = np.maximum(-0.5, x - 0.5)
    hi = np.minimum(0.5, x + 0.5)
    m = hi > lo
    if not m.any():
        return out
    t, w = _GL
    a, b = lo[m][:, None], hi[m][:, None]
    y = 0.5 * (b - a) * t[None, :] + 0.5 * (a + b)
    vals = bump(y, order) * bump(x[m][:, None] - y)
    out[m] = 0.5 * (b - a)[:, 0] * (vals @ w)
    return out


def h_quad(x: float, order: int = 0) -> float:
    """h by adaptive quadrature, an independent check on h."""
    lo, hi = max(-0.5, x - 0.5), min(0.5, x + 0.5)
    if hi <= lo:
        return 0.0
    f = lambda y: float(bump(np.array([y]), order)[0] * bump(np.array([x - y]))[0])  # noqa: E731
    return integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)[0]


def eval_hL_derivative(k: ScaledKernel, ell, order: int = 0):
    """d^order/dl^order of h_L(l) = h(l / L)."""
    if order < 0:
        raise KernelDomainError("order must be nonnegative")
    if order > k.kernel.derivative_order_cap:
        raise KernelDomainError(f"order {order} exceeds cap {k.kernel.derivative_order_cap}")
    scalar = np.ndim(ell) == 0
    out = h(np.asarray(ell, dtype=float) / k.L, order) / k.L ** order
    return float(out[0]) if scalar else out


def apply_D_power(k: ScaledKernel, m: int, ell):
    """(1/4 - d^2)^m h_L at ell."""
    if m < 0:
        raise KernelDomainError("m must be nonnegative")
    if 2 * m > k.kernel.derivative_order_cap:
        raise KernelDomainError("derivative cap too small for this m")
    scalar = np.ndim(ell) == 0
    x = np.atleast_1d(np.asarray(ell, dtype=float))
    total = np.zeros_like(x)
    for i in range(m + 1):
        coef = math.comb(m, i) * 0.25 ** (m - i) * (-1) ** i
        total += coef * eval_hL_derivative(k, x, 2 * i)
    total[np.abs(x) >= k.L] = 0.0
    return float(total[0]) if scalar else total


def apply_D_exp_poly(coeffs, m: int, rate: float = 0.5) -> np.ndarray:
    """Exact action of D^m on p(l) e^{rate l}: returns the coefficients of q with D^m[p e^{rate l}] = q e^{rate l}."""
    p = NPoly(np.asarray(coeffs, dtype=float))
    for _ in range(m):
        p = (0.25 - rate ** 2) * p - 2 * rate * p.deriv() - p.deriv(2)
    c = p.coef.copy()
    if np.all(c == 0):
        return np.zeros(0)
    return np.trim_zeros(c, "b")


def apply_D_numeric(f: Callable[[np.ndarray], np.ndarray], m: int, x, step: float = 0.8,
                    levels: int = 4) -> np.ndarray:
    """D^m f by nested central differences with a Richardson tableau over halved steps."""
    x = np.asarray(x, dtype=float)

    def nested(hh: float) -> np.ndarray:
        offs = np.arange(-m, m + 1)
        stencil = np.zeros(2 * m + 1)
        stencil[m] = 1.0
        base = np.array([-1.0, 2.0, -1.0]) / hh ** 2
        for _ in range(m):
            stencil = 0.25 * stencil + np.convolve(stencil, base)[1:-1]
        return sum(c * f(x + o * hh) for c, o in zip(stencil, offs))

    T = [nested(step / 2 ** k) for k in range(levels)]
    for lev in range(1, levels):
        T = [(4 ** lev * T[k + 1] - T[k]) / (4 ** lev - 1) for k in range(len(T) - 1)]
    return T[0]


def fourier(k: ScaledKernel, r: complex):
    """h_L hat (r) = int h_L(l) e^{-irl} dl = 2 int_0^L h(l/L) cos(rl) dl."""
    r = complex(r)
    if abs(r.imag) > 0.5 + 1e-15:
        raise KernelDomainError("|Im r| must be <= 1/2")
    L = k.L
    # Gauss-Legendre on panels of [0, L], refined with the oscillation count
    panels = max(8, int(abs(r.real) * L / 2.0) + 8)
    edges = np.linspace(0.0, L, panels + 1)
    t, w = leggauss(40)
    a, b = edges[:-1, None], edges[1:, None]
    ell = (0.5 * (b - a) * t + 0.5 * (a + b)).ravel()
    ww = (0.5 * (b - a) * w).ravel()
    hv = h(ell / L)
    val = 2.0 * np.sum(ww * hv * np.cos(r * ell))
    if r.imag == 0.0 or r.real == 0.0:
        return float(val.real)
    return complex(val)


def bump_fourier(r: complex) -> complex:
    """H hat (r) = 2 int_0^{1/2} H(x) cos(r x) dx."""
    r = complex(r)
    t, w = leggauss(GL_NODES)
    x = 0.25 * (t + 1.0)
    return complex(2.0 * np.sum(0.25 * w * bump(x) * np.cos(r * x)))


def fourier_via_square(k: ScaledKernel, r: complex):
    """L * H hat (rL)^2, the same transform through the convolution theorem."""
    v = k.L * bump_fourier(complex(r) * k.L) ** 2
    r = complex(r)
    if r.imag == 0.0 or r.real == 0.0:
        return float(v.real)
    return v


def growth_bound_check(k: ScaledKernel, alpha: float, eps: float) -> tuple[float, bool]:
    """C = 2 int_{s0}^1 h with s0 = (alpha+eps)/sqrt(alpha^2+eps); checks h_L hat(i sqrt(alpha^2+eps)) >= C e^{(alpha+eps)L}."""
    if not 0.0 < alpha < 0.5:
        raise KernelDomainError("alpha must lie in (0, 1/2)")
    if not 0.0 < eps < 0.25 - alpha ** 2:
        raise KernelDomainError("eps must lie in (0, 1/4 - alpha^2)")
    t = math.sqrt(alpha ** 2 + eps)
    s0 = (alpha + eps) / t
    C = 2.0 * integrate.quad(lambda s: float(h(s)[0]), s0, 1.0, epsabs=1e-14, epsrel=1e-12)[0]
    val = fourier(k, 1j * t)
    return C, bool(val >= C * math.exp((alpha + eps) * k.L))


def cancellation_integral(f: Callable[[float], float], m: int, k: ScaledKernel, tol: float = 1e-10,
                          rtol: float = 1e-8) -> float:
    """int_0^L f(l) e^{-l/2} D^m h_L(l) dl with absolute/relative tolerances (tol, rtol)."""
    if m < 0:
        raise KernelDomainError("m must be nonnegative")
    L = k.L
    g = lambda ell: f(ell) * math.exp(-ell / 2) * apply_D_power(k, m, ell)  # noqa: E731
    pts = list(np.linspace(0.0, L, 9)[1:-1])
    val, err = integrate.quad(g, 0.0, L, epsabs=tol, epsrel=rtol, limit=500, points=pts)
    return val


def ibp_identity_check(H1: Callable[[float, int], float], k: ScaledKernel, L: float | None = None) -> float:
    """|int_0^L H1 D h_L - (int_0^L D H1 h_L - H1'(0) h_L(0) + H1(0) h_L'(0))|.

    H1(x, order) must return the order-th derivative (order <= 2).
    """
    L = k.L if L is None else L
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    lhs = integrate.quad(lambda x: H1(x, 0) * apply_D_power(k, 1, x), 0.0, L, **opts)[0]
    DH1 = lambda x: 0.25 * H1(x, 0) - H1(x, 2)  # noqa: E731
    rhs = integrate.quad(lambda x: DH1(x) * eval_hL_derivative(k, x, 0), 0.0, L, **opts)[0]
    rhs += -H1(0.0, 1) * eval_hL_derivative(k, 0.0, 0) + H1(0.0, 0) * eval_hL_derivative(k, 0.0, 1)
    return abs(lhs - rhs)

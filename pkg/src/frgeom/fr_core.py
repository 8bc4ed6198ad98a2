"""Friedman-Ramanujan functions p(l) e^l + O((l+1)^c e^{l/2}).

Principal parts are exact polynomials; remainders are carried as evaluators
and certified against their envelope on a sample grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy import integrate

NEG_INF_DEGREE = -math.inf
DEFAULT_GRID = tuple(np.geomspace(1.0, 60.0, 400))
TRUNCATION = 80.0


class FRDomainError(ValueError):
    pass


class IntegrationError(RuntimeError):
    def __init__(self, msg: str, achieved: float):
        super().__init__(f"{msg} (achieved tolerance {achieved:.3g})")
        self.achieved = achieved


class FitError(RuntimeError):
    def __init__(self, msg: str, condition: float):
        super().__init__(f"{msg} (condition estimate {condition:.3g})")
        self.condition = condition


@dataclass(frozen=True)
class Polynomial:
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        c = [float(x) for x in self.coefficients]
        while c and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coefficients", tuple(c))

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> float:
        """Degree, or NEG_INF_DEGREE for the zero polynomial."""
        return NEG_INF_DEGREE if self.is_zero else len(self.coefficients) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in reversed(self.coefficients):
            out = out * x + c
        return out if out.ndim else float(out)

    def __add__(self, o: "Polynomial") -> "Polynomial":
        n = max(len(self.coefficients), len(o.coefficients))
        a = self.coefficients + (0.0,) * (n - len(self.coefficients))
        b = o.coefficients + (0.0,) * (n - len(o.coefficients))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    def scale(self, s: float) -> "Polynomial":
        return Polynomial(tuple(s * c for c in self.coefficients))

    def __mul__(self, o: "Polynomial") -> "Polynomial":
        if self.is_zero or o.is_zero:
            return Polynomial()
        return Polynomial(tuple(np.convolve(self.coefficients, o.coefficients)))

    def derivative(self, k: int = 1) -> "Polynomial":
        c = list(self.coefficients)
        for _ in range(k):
            c = [i * c[i] for i in range(1, len(c))]
        return Polynomial(tuple(c))

    def sup_norm(self) -> float:
        return max((abs(c) for c in self.coefficients), default=0.0)

    def allclose(self, o: "Polynomial", atol: float = 1e-12) -> bool:
        d = self + o.scale(-1.0)
        return d.sup_norm() <= atol


def poly_convolution(p: Polynomial, q: Polynomial) -> Polynomial:
    """(p*q)(l) = int_0^l p(t) q(l-t) dt, exact via Beta integrals."""
    if p.is_zero or q.is_zero:
        return Polynomial()
    out = [0.0] * (len(p.coefficients) + len(q.coefficients))
    for a, pa in enumerate(p.coefficients):
        for b, qb in enumerate(q.coefficients):
            out[a + b + 1] += pa * qb * math.factorial(a) * math.factorial(b) / math.factorial(a + b + 1)
    return Polynomial(tuple(out))


Evaluator = Callable[[float], float]


@dataclass(frozen=True)
class FRFunction:
    principal: Polynomial
    constant: float = 0.0
    exponent: float = 0.0
    remainder: Optional[Evaluator] = field(default=None, compare=False)
    exact_remainder_zero: bool = False

    def __post_init__(self):
        if self.constant < 0 or self.exponent < 0:
            raise FRDomainError("constant and exponent must be nonnegative")

    @classmethod
    def exact(cls, principal: Polynomial | Sequence[float]) -> "FRFunction":
        """p(l) e^l with identically zero remainder."""
        p = principal if isinstance(principal, Polynomial) else Polynomial(tuple(principal))
        return cls(p, 0.0, 0.0, lambda ell: 0.0, True)

    @property
    def has_remainder(self) -> bool:
        return self.remainder is not None

    def r(self, ell: float) -> float:
        if self.remainder is None:
            raise FRDomainError("no remainder evaluator attached")
        return float(self.remainder(ell))

    def evaluate(self, ell: float) -> tuple[float, bool]:
        """(value, principal_only)."""
        if not ell > 0:
            raise FRDomainError(f"ell must be positive, got {ell}")
        base = self.principal(ell) * math.exp(ell)
        if self.remainder is None:
            return base, True
        return base + self.r(ell), False

    def __call__(self, ell: float) -> float:
        return self.evaluate(ell)[0]

    def envelope(self, ell):
        ell = np.asarray(ell, dtype=float)
        return self.constant * (ell + 1.0) ** self.exponent * np.exp(ell / 2)

    def __add__(self, o: "FRFunction") -> "FRFunction":
        return combine(1.0, self, 1.0, o)

    def __rmul__(self, s: float) -> "FRFunction":
        return combine(s, self, 0.0, FRFunction.exact(()))

    def __neg__(self) -> "FRFunction":
        return (-1.0) * self


def combine(a: float, f: FRFunction, b: float, g: FRFunction) -> FRFunction:
    """a f + b g with the envelope |a| c_f + |b| c_g at the larger exponent."""
    p = f.principal.scale(a) + g.principal.scale(b)
    c1 = abs(a) * f.constant + abs(b) * g.constant
    c2 = max(f.exponent if a else 0.0, g.exponent if b else 0.0)
    if f.remainder is None or g.remainder is None:
        rem = None
    else:
        fr, gr = f.remainder, g.remainder
        rem = lambda ell: a * fr(ell) + b * gr(ell)  # noqa: E731
    zero = (f.exact_remainder_zero or a == 0) and (g.exact_remainder_zero or b == 0)
    return FRFunction(p, c1, c2, rem, zero)


def evaluate(f: FRFunction, ell: float) -> float:
    return f(ell)


def seminorm(f: FRFunction) -> float:
    return f.principal.sup_norm()


def _quad(fun, a, b, tol, what):
    val, err = integrate.quad(fun, a, b, epsabs=tol, epsrel=tol, limit=400)
    if not math.isfinite(val) or err > max(tol, tol * abs(val)) * 100:
        raise IntegrationError(f"quadrature for {what} did not converge", err)
    return val, err


def _moments(rem: Evaluator, c1: float, c2: float, kmax: int, tol: float) -> tuple[list[float], float]:
    """M_k = int_0^inf t^k r(t) e^{-t} dt truncated at T with its tail bound."""
    M = []
    tail = 0.0
    for k in range(kmax + 1):
        val, _ = _quad(lambda t: t ** k * rem(t) * math.exp(-t), 0.0, TRUNCATION, tol, f"moment {k}")
        M.append(val)
        tb, _ = integrate.quad(lambda t: c1 * t ** k * (t + 1) ** c2 * math.exp(-t / 2), TRUNCATION, math.inf)
        tail = max(tail, tb)
    return M, tail


def _cross_poly(p: Polynomial, M: list[float]) -> Polynomial:
    """int_0^inf p(l-t) r(t) e^{-t} dt as a polynomial in l."""
    out = Polynomial()
    for k in range(len(p.coefficients)):
        out = out + p.derivative(k).scale((-1) ** k * M[k] / math.factorial(k))
    return out


@dataclass(frozen=True)
class ConvolutionInfo:
    tail_bound: float
    grid: tuple[float, ...]


def convolve(f1: FRFunction, f2: FRFunction, quadrature_tol: float = 1e-10,
             grid: Sequence[float] = DEFAULT_GRID, slack: float = 1.05) -> FRFunction:
    """f1 * f2 (l) = int_0^l f1(t) f2(l-t) dt."""
    if f1.exact_remainder_zero and f2.exact_remainder_zero:
        return FRFunction.exact(poly_convolution(f1.principal, f2.principal))
    if f1.remainder is None or f2.remainder is None:
        raise FRDomainError("numeric convolution needs remainder evaluators on both operands")
    p1, p2, r1, r2 = f1.principal, f2.principal, f1.remainder, f2.remainder
    P = poly_convolution(p1, p2)
    tail = 0.0
    if not p1.is_zero and not f2.exact_remainder_zero:
        M, t = _moments(r2, f2.constant, f2.exponent, len(p1.coefficients) - 1, quadrature_tol)
        P = P + _cross_poly(p1, M)
        tail = max(tail, t)
    if not p2.is_zero and not f1.exact_remainder_zero:
        M, t = _moments(r1, f1.constant, f1.exponent, len(p2.coefficients) - 1, quadrature_tol)
        P = P + _cross_poly(p2, M)
        tail = max(tail, t)

    tol = quadrature_tol

    def rem(ell: float) -> float:
        total = 0.0
        if not p1.is_zero and not f2.exact_remainder_zero:
            total -= _quad(lambda s: p1(-s) * r2(ell + s) * math.exp(-s), 0.0, TRUNCATION, tol, "tail")[0]
        if not p2.is_zero and not f1.exact_remainder_zero:
            total -= _quad(lambda s: p2(-s) * r1(ell + s) * math.exp(-s), 0.0, TRUNCATION, tol, "tail")[0]
        if not (f1.exact_remainder_zero or f2.exact_remainder_zero):
            total += _quad(lambda t: r1(t) * r2(ell - t), 0.0, ell, tol, "remainder convolution")[0]
        return total

    # exponent from the proof decomposition, constant certified on the grid
    deg1 = max(p1.degree, 0) if not p1.is_zero else 0
    deg2 = max(p2.degree, 0) if not p2.is_zero else 0
    c2 = max(f1.exponent + f2.exponent + 1.0, deg1 + f2.exponent + 1.0, deg2 + f1.exponent + 1.0)
    g = np.asarray(grid, dtype=float)
    vals = np.array([abs(rem(x)) for x in g])
    env = (g + 1.0) ** c2 * np.exp(g / 2)
    c1 = float(np.max(vals / env)) * slack if len(g) else 0.0
    return FRFunction(P, c1, c2, rem)


# ---------------------------------------------------------------- empirical fits

@dataclass(frozen=True)
class FRReport:
    fitted_principal: Polynomial
    fitted_exponent: float
    fitted_constant: float
    max_violation: float
    grid: tuple[float, ...]
    refined_violation: float = 0.0
    condition: float = 1.0
    raw_slope: float = 0.0

    def to_text(self) -> str:
        lines = [
            f"degree={self.fitted_principal.degree}",
            "coefficients=" + ",".join(repr(c) for c in self.fitted_principal.coefficients),
            f"c1={self.fitted_constant!r}",
            f"c2={self.fitted_exponent!r}",
            f"max_violation={self.max_violation!r}",
            f"refined_violation={self.refined_violation!r}",
            f"condition={self.condition!r}",
            f"grid_min={float(self.grid[0])!r}",
            f"grid_max={float(self.grid[-1])!r}",
            f"grid_points={len(self.grid)}",
        ]
        return "\n".join(lines)

    def csv_header(self) -> str:
        n = len(self.fitted_principal.coefficients)
        return ",".join(["deg"] + [f"p{i}" for i in range(n)] + ["c1", "c2", "max_violation"])

    def csv_row(self) -> str:
        p = self.fitted_principal
        deg = "-inf" if p.is_zero else str(int(p.degree))
        vals = [deg] + [repr(c) for c in p.coefficients] + [repr(self.fitted_constant),
                                                              repr(self.fitted_exponent), repr(self.max_violation)]
        return ",".join(vals)


def _outward(x: float) -> float:
    return float(np.nextafter(x * (1 + 4 * np.finfo(float).eps), math.inf))


def remainder_envelope(ell: np.ndarray, res: np.ndarray, fit_mask: np.ndarray | None = None) -> tuple[float, float, float]:
    """(c1, c2, raw slope): log-log slope of |res| e^{-l/2} against l+1, then the grid envelope."""
    ell = np.asarray(ell, dtype=float)
    res = np.asarray(res, dtype=float)
    scaled = np.abs(res) * np.exp(-ell / 2)
    m = np.ones_like(ell, dtype=bool) if fit_mask is None else fit_mask.copy()
    m &= scaled > 0
    if m.sum() >= 2:
        slope = float(np.polyfit(np.log(ell[m] + 1.0), np.log(scaled[m]), 1)[0])
    else:
        slope = 0.0
    c2 = max(slope, 0.0)
    ratio = scaled / (ell + 1.0) ** c2
    c1 = _outward(float(np.max(ratio))) if len(ratio) else 0.0
    return c1, c2, slope


def _violation(ell, res, c1, c2) -> float:
    ell = np.asarray(ell, dtype=float)
    v = np.abs(res) - c1 * (ell + 1.0) ** c2 * np.exp(ell / 2)
    return float(max(0.0, np.max(v)))


def fr_fit(samples: Iterable[tuple[float, float]], principal_degree_cap: int,
           refine: Optional[Callable[[float], float]] = None, max_condition: float = 1e12) -> FRReport:
    """Fit value ~ p(l) e^l + remainder and report the certified envelope.

    The principal part is a weighted least-squares fit of value e^{-l} on the upper
    half of the grid, with weights e^{l/2} so residuals are measured on the
    e^{l/2} scale. The exponent comes from the lower half, where the principal
    fit error is negligible. When `refine` is given it is evaluated at grid
    midpoints and the violation there is reported as refined_violation.
    """
    pts = sorted((float(a), float(b)) for a, b in samples)
    ell = np.array([p[0] for p in pts])
    val = np.array([p[1] for p in pts])
    if len(ell) < 2 * (principal_degree_cap + 2):
        raise FitError("too few samples", math.inf)
    if np.any(np.diff(ell) <= 0):
        raise FitError("abscissae must be strictly increasing", math.inf)
    if ell[-1] - ell[0] < 5:
        raise FitError("grid range must be at least 5", math.inf)
    half = len(ell) // 2
    up = slice(half, None)
    x0, x1 = ell[up][0], ell[up][-1]
    t = (ell[up] - 0.5 * (x0 + x1)) / (0.5 * (x1 - x0))
    V = np.vander(t, principal_degree_cap + 1, increasing=True)
    w = np.exp(ell[up] / 2)
    Aw = V * w[:, None]
    yw = val[up] * np.exp(-ell[up]) * w
    cond = float(np.linalg.cond(Aw))
    if not math.isfinite(cond) or cond > max_condition:
        raise FitError("ill-conditioned normal equations", cond)
    coef_t, *_ = np.linalg.lstsq(Aw, yw, rcond=None)
    # back to powers of l
    shift, scale = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
    poly = np.polynomial.Polynomial(coef_t)
    lin = np.polynomial.Polynomial([-shift / scale, 1.0 / scale])
    coeffs = poly(lin).coef if len(coef_t) else np.array([])
    P = Polynomial(tuple(coeffs))
    res = val - P(ell) * np.exp(ell)
    lower = np.zeros_like(ell, dtype=bool)
    lower[:half] = True
    c1, c2, slope = remainder_envelope(ell, res, lower)
    viol = _violation(ell, res, c1, c2)
    rviol = 0.0
    if refine is not None:
        mids = 0.5 * (ell[1:] + ell[:-1])
        rv = np.array([refine(x) for x in mids])
        rviol = _violation(mids, rv - P(mids) * np.exp(mids), c1, c2)
    return FRReport(P, c2, c1, viol, tuple(float(x) for x in ell), rviol, cond, slope)


def certify(f: FRFunction, grid: Sequence[float] = DEFAULT_GRID, mode: str = "strong") -> float:
    """Violation of the remainder bound on the grid (0 means certified).

    mode "strong": max of |r| - envelope. mode "weak": the grid-integrated
    ratio |r| / ((l+1)^c2 e^{l/2}) minus c1, clipped at 0.
    """
    if f.remainder is None:
        raise FRDomainError("no remainder to certify")
    g = np.asarray(grid, dtype=float)
    r = np.array([f.r(x) for x in g])
    if mode == "strong":
        return _violation(g, r, f.constant, f.exponent)
    if mode == "weak":
        ratio = np.abs(r) / ((g + 1.0) ** f.exponent * np.exp(g / 2))
        return float(max(0.0, integrate.trapezoid(ratio, g) - f.constant))
    raise FRDomainError(f"unknown mode {mode!r}")

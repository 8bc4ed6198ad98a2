"""Closed-form hyperbolic trigonometry of a pair of pants.

Lengths of the figure-eight and one-sided iterated eights in terms of the
three cuff lengths, the (L1, L2, u) coordinates that turn level sets of the
figure-eight length into convolution slices, their Jacobian and domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

LOG_DOMAIN_THRESHOLD = 500.0
ELL0 = 4.0 * math.acosh(math.sqrt(2.0))
"""Infimum of figure-eight lengths, equal to 2 argcosh(3)."""


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class BoundaryLengths:
    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        for v in (self.l1, self.l2, self.l3):
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"boundary lengths must be positive and finite, got {self}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)

    @property
    def total(self) -> float:
        return self.l1 + self.l2 + self.l3


@dataclass(frozen=True)
class ConvCoords:
    L1: float
    L2: float
    u: float

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise DomainError(f"L1, L2 must be positive, got {self}")
        if not (0.0 < self.u < 1.0):
            raise DomainError(f"u must lie in (0,1), got {self.u}")


@dataclass(frozen=True)
class DomainParams:
    ell: float
    u: float
    u_minus: float
    u_plus: float
    L_minus_inf: float
    L_minus: float
    in_E1: bool
    ell0: float = ELL0


def _argcosh_exp(y: float) -> float:
    """argcosh(e^y) for y >= 0 without forming e^y."""
    return y + math.log1p(math.sqrt(-math.expm1(-2.0 * y)))


def _log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


def _log_sinh(x: float) -> float:
    return x + math.log(-math.expm1(-2.0 * x)) - math.log(2.0)


def _logaddexp(a: float, b: float) -> float:
    return float(np.logaddexp(a, b))


def fig8_length(b: BoundaryLengths) -> float:
    """Length of the figure-eight separating cuffs 1, 2 from cuff 3."""
    l1, l2, l3 = b.as_tuple()
    if max(l1, l2, l3) / 2 > LOG_DOMAIN_THRESHOLD:
        y = _logaddexp(math.log(2.0) + _log_cosh(l1 / 2) + _log_cosh(l2 / 2), _log_cosh(l3 / 2))
        return 2.0 * _argcosh_exp(y)
    c = 2.0 * math.cosh(l1 / 2) * math.cosh(l2 / 2) + math.cosh(l3 / 2)
    return 2.0 * math.acosh(c)


def iterated_length(b: BoundaryLengths, j: int) -> float:
    """Length of the one-sided iterated eight turning j times around cuff 2."""
    if j < 1:
        raise DomainError("j must be >= 1")
    l1, l2, l3 = b.as_tuple()
    if j == 1:
        return fig8_length(b)
    x = l2 / 2
    if (j + 1) * x > LOG_DOMAIN_THRESHOLD or max(l1, l3) / 2 > LOG_DOMAIN_THRESHOLD:
        y = _logaddexp(_log_cosh(l1 / 2) + _log_sinh((j + 1) * x),
                       _log_cosh(l3 / 2) + _log_sinh(j * x)) - _log_sinh(x)
        return 2.0 * _argcosh_exp(y)
    c = (math.cosh(l1 / 2) * math.sinh((j + 1) * x) + math.cosh(l3 / 2) * math.sinh(j * x)) / math.sinh(x)
    return 2.0 * math.acosh(c)


def iterated_recursion_residual(b: BoundaryLengths, j: int) -> float:
    """Relative residual of cosh(L_j/2) = 2cosh(l1/2)cosh(j l2/2) + cosh(L_{j-1}(l3,l2,l1)/2)."""
    if j < 2:
        raise DomainError("recursion needs j >= 2")
    l1, l2, l3 = b.as_tuple()
    lhs = math.cosh(iterated_length(b, j) / 2)
    prev = iterated_length(BoundaryLengths(l3, l2, l1), j - 1)
    rhs = 2.0 * math.cosh(l1 / 2) * math.cosh(j * l2 / 2) + math.cosh(prev / 2)
    return abs(lhs - rhs) / abs(rhs)


def _ab(l2: float, j: int) -> tuple[float, float]:
    if j == 1:
        return 1.0, 1.0
    x = l2 / 2
    a = math.sinh(x) / math.sinh(j * x)
    bb = math.sinh((j + 1) * x) / (2.0 * math.sinh(x) * math.cosh(j * x))
    return a, bb


def _cuff_cosh(c: ConvCoords, j: int) -> tuple[float, float, float, float]:
    """cosh(l1/2), cosh(j l2/2), cosh(l3/2) and l2 at the given coordinates."""
    su = math.sqrt(c.u)
    c1 = su * math.cosh(c.L1 / 2)
    cj = su * math.cosh(c.L2 / 2)
    l2 = 2.0 * math.acosh(cj) / j if cj > 1.0 else float("nan")
    if j == 1:
        a, bb = 1.0, 1.0
    elif math.isnan(l2):
        return c1, cj, float("nan"), l2
    else:
        a, bb = _ab(l2, j)
    cp = math.cosh((c.L1 + c.L2) / 2)
    cm = math.cosh((c.L1 - c.L2) / 2)
    c3 = a * ((1.0 - bb * c.u) * cp - bb * c.u * cm)
    return c1, cj, c3, l2


def in_domain_E(c: ConvCoords, j: int = 1) -> tuple[bool, str | None]:
    """Membership in the coordinate domain; the tag names the first violated cuff."""
    if j < 1:
        raise DomainError("j must be >= 1")
    c1, cj, c3, _ = _cuff_cosh(c, j)
    if not c1 > 1.0:
        return False, "cuff1"
    if not cj > 1.0:
        return False, "cuff2"
    if not c3 > 1.0:
        return False, "cuff3"
    return True, None


def coords_to_boundary(c: ConvCoords, j: int = 1) -> BoundaryLengths:
    ok, tag = in_domain_E(c, j)
    if not ok:
        raise DomainError(f"coordinates outside the domain ({tag} constraint)")
    c1, cj, c3, l2 = _cuff_cosh(c, j)
    return BoundaryLengths(2.0 * math.acosh(c1), l2, 2.0 * math.acosh(c3))


def boundary_to_coords(b: BoundaryLengths, j: int = 1) -> ConvCoords:
    """Inverse of coords_to_boundary: L1 + L2 is the iterated-eight length."""
    l1, l2, l3 = b.as_tuple()
    ell = iterated_length(b, j)
    ch1 = math.cosh(l1 / 2)
    chj = math.cosh(j * l2 / 2)
    # cosh((L1+L2)/2) is fixed; u solves the cuff-1/cuff-2 ratio relation
    ratio = ch1 / chj
    # L1 - L2 = 2 argcosh-type relation: cosh(L1/2)/cosh(L2/2) = ratio with L1 + L2 = ell
    # write L1 = ell/2 + d, L2 = ell/2 - d and solve for d
    h = ell / 2
    # cosh(h/2 + d/2) = ratio cosh(h/2 - d/2)  =>  tanh(d/2) = (ratio - 1)/(ratio + 1) coth(h/2)
    t = (ratio - 1.0) / (ratio + 1.0) / math.tanh(h / 2)
    if not abs(t) < 1.0:
        raise DomainError("no coordinates for these boundary lengths")
    d = 2.0 * math.atanh(t)
    L1, L2 = h + d, h - d
    u = (ch1 / math.cosh(L1 / 2)) ** 2
    return ConvCoords(L1, L2, u)


def jacobian(c: ConvCoords, j: int = 1) -> float:
    """|det d(l1,l2,l3)/d(L1,L2,u)|."""
    bl = coords_to_boundary(c, j)
    l1, l2, l3 = bl.as_tuple()
    val = math.sinh((c.L1 + c.L2) / 2) ** 2 / (math.sinh(l1 / 2) * math.sinh(l2 / 2) * math.sinh(l3 / 2))
    if j >= 2:
        val *= math.sinh(l2 / 2) ** 2 / (j * math.sinh(j * l2 / 2) ** 2)
    return val


def jacobian_weight(l2: float, j: int) -> float:
    """Extra factor relating iterated-eight coordinates to the j = 1 Jacobian."""
    if j == 1:
        return 1.0
    return math.sinh(l2 / 2) ** 2 / (j * math.sinh(j * l2 / 2) ** 2)


def jacobian_fd(c: ConvCoords, j: int = 1, step: float = 1e-6) -> float:
    """Central finite-difference Jacobian determinant, used as an oracle."""
    x0 = np.array([c.L1, c.L2, c.u])
    J = np.empty((3, 3))
    for k in range(3):
        h = step * max(1.0, abs(x0[k])) if k < 2 else step * min(x0[2], 1 - x0[2])
        xp, xm = x0.copy(), x0.copy()
        xp[k] += h
        xm[k] -= h
        fp = np.array(coords_to_boundary(ConvCoords(*xp), j).as_tuple())
        fm = np.array(coords_to_boundary(ConvCoords(*xm), j).as_tuple())
        J[:, k] = (fp - fm) / (2 * h)
    return abs(float(np.linalg.det(J)))


def u_minus(ell: float) -> float:
    return 1.0 / math.cosh(ell / 4) ** 2


def u_plus(ell: float) -> float:
    return 1.0 - u_minus(ell)


def L_minus_inf(u: float) -> float:
    return max(2.0 * math.acosh(1.0 / math.sqrt(u)), math.log(u / (1.0 - u)))


def L_minus_parts(ell: float, u: float) -> tuple[float, float]:
    """The two lower bounds on L1 from cuff 1 and cuff 3 at total length ell."""
    l1 = 2.0 * math.acosh(1.0 / math.sqrt(u))
    arg = (1.0 - u) / u * math.cosh(ell / 2) - 1.0 / u
    l3 = ell / 2 - math.acosh(arg) if arg >= 1.0 else float("nan")
    return l1, l3


def L_minus(ell: float, u: float) -> float:
    l1, l3 = L_minus_parts(ell, u)
    if math.isnan(l3):
        return float("nan")
    return max(l1, l3)


def domain_params(ell: float, u: float) -> DomainParams:
    if not ell > ELL0:
        raise DomainError(f"ell must exceed {ELL0}")
    if not 0.0 < u < 1.0:
        raise DomainError("u must lie in (0,1)")
    um, up = u_minus(ell), u_plus(ell)
    lm = L_minus(ell, u)
    inside = um < u < up and not math.isnan(lm) and lm < ell / 2
    return DomainParams(ell, u, um, up, L_minus_inf(u), lm, bool(inside))


def L_minus_gap_ratio(ell: float, u: float) -> float:
    """(L_minus - L_minus_inf) scaled by (1-u) e^{ell/2} / ell; bounded on E1."""
    d = L_minus(ell, u) - L_minus_inf(u)
    return d * (1.0 - u) * math.exp(ell / 2) / ell


def E1_slice(ell: float) -> tuple[float, float, Callable[[float], float]]:
    """u-range and lower L bound describing the j = 1 domain at fixed total length."""
    return u_minus(ell), u_plus(ell), lambda u: L_minus(ell, u)


def expansion_remainders(L: float, u: float) -> dict[str, float]:
    """r0 = l1(L,u) - L - log u and r = log(1 - u e^{-L}/(1-u))."""
    if not 0.0 < u < 1.0:
        raise DomainError("u must lie in (0,1)")
    if not L > L_minus_inf(u):
        raise DomainError("L must exceed L_minus_inf(u)")
    e = math.exp(-L)
    half = (1.0 + e) / 2
    disc = half * half - e / u
    r0 = 2.0 * math.log(half + math.sqrt(disc))
    r = math.log1p(-u / (1.0 - u) * e)
    return {"r0": r0, "r": r}


def l3_expansion(L1: float, L2: float, u: float) -> float:
    """Leading expansion of l3 in the j = 1 coordinates."""
    r1 = expansion_remainders(L1, u)["r"]
    r2 = expansion_remainders(L2, u)["r"]
    return L1 + L2 + 2.0 * math.log(1.0 - u) + r1 + r2


def double_fill_check(boundary_total: float, geodesic_length: float, mode: str = "filling") -> bool:
    """Boundary length is at most 2x (filling) or 1x (double filling) the loop length."""
    if boundary_total < 0 or geodesic_length <= 0:
        raise DomainError("lengths must be nonnegative / positive")
    if mode == "filling":
        return boundary_total <= 2.0 * geodesic_length
    if mode == "double_filling":
        return boundary_total <= geodesic_length
    raise DomainError(f"unknown mode {mode!r}")

"""Realisations of filling types, volume-ratio densities and level-set integrals."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import integrate, optimize

from . import pants_geom as pg
from .fr_core import FRReport, fr_fit
from .wp_volumes import MissingVolumeError, VolumeTable, default_table

Evaluator = Callable[[float], float]
QUAD_OPTS = dict(epsabs=0.0, epsrel=1e-10, limit=200)


class LevelSetIntegrationError(RuntimeError):
    pass


# ---------------------------------------------------------------- realisations

@dataclass(frozen=True)
class FillingType:
    g_S: int
    n_S: int

    def __post_init__(self):
        if self.g_S < 0 or self.n_S < 0 or 2 * self.g_S - 2 + self.n_S < 0:
            raise ValueError(f"invalid filling type ({self.g_S},{self.n_S})")

    @property
    def euler(self) -> int:
        return 2 - 2 * self.g_S - self.n_S


@dataclass(frozen=True)
class Realisation:
    partition: tuple[tuple[int, ...], ...]
    genera: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.partition)

    def euler_chars(self) -> tuple[int, ...]:
        return tuple(2 - 2 * g - len(I) for I, g in zip(self.partition, self.genera))

    @property
    def is_connected(self) -> bool:
        return self.q == 1


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    """All set partitions, blocks ordered by their minimum element."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def _genus_vectors(q: int, total: int, mins: Sequence[int]) -> Iterator[tuple[int, ...]]:
    if q == 0:
        if total == 0:
            yield ()
        return
    for g0 in range(mins[0], total - sum(mins[1:]) + 1):
        for tail in _genus_vectors(q - 1, total - g0, mins[1:]):
            yield (g0,) + tail


def enumerate_realisations(S: FillingType, g: int) -> list[Realisation]:
    """Ways of completing S to a closed genus-g surface; the connected one first."""
    if g < S.g_S + S.n_S:
        raise ValueError("g too small for the connected realisation")
    out: list[Realisation] = []
    for part in set_partitions(range(1, S.n_S + 1)):
        blocks = tuple(tuple(sorted(b)) for b in sorted(part, key=min))
        q = len(blocks)
        total = g - S.g_S - S.n_S + q
        # chi_j <= 0 needs 2 g_j + n_j >= 2
        mins = [1 if len(b) == 1 else 0 for b in blocks]
        if total < sum(mins):
            continue
        for gen in _genus_vectors(q, total, mins):
            out.append(Realisation(blocks, gen))
    out.sort(key=lambda r: (r.q, [len(b) for b in r.partition], r.partition, r.genera))
    return out


def rank(r: Realisation, S: FillingType, g: int) -> int:
    """|chi_g| - max_j |chi_j| = |chi_S| + sum of the other |chi_j|."""
    chis = [abs(c) for c in r.euler_chars()]
    jplus = max(range(len(chis)), key=lambda j: (chis[j], -j))
    return abs(S.euler) + sum(c for j, c in enumerate(chis) if j != jplus)


# ---------------------------------------------------------------- densities

def phi_simple(x: float, g: int, table: VolumeTable | None = None) -> float:
    """(x / V_g) [V_{g-1,2}(x,x) + sum_i V_{i,1}(x) V_{g-i,1}(x)]."""
    table = default_table() if table is None else table
    need = [(g, 0), (g - 1, 2)] + [(i, 1) for i in range(1, g)]
    missing = [s for s in need if s not in table]
    if missing:
        raise MissingVolumeError("phi_simple needs " + ", ".join(f"V_{a},{b}" for a, b in missing))
    inner = table[(g - 1, 2)]([x, x]) + sum(table[(i, 1)]([x]) * table[(g - i, 1)]([x]) for i in range(1, g))
    return x * inner / table[(g, 0)]([])


def simple_leading(x: float) -> float:
    """4 sinh^2(x/2) / x."""
    return 4.0 * math.sinh(x / 2) ** 2 / x


def leading_density_pants(x1: float, x2: float, x3: float) -> float:
    """(1/8 pi^2) prod 2 sinh(x_i/2)."""
    return (2 * math.sinh(x1 / 2)) * (2 * math.sinh(x2 / 2)) * (2 * math.sinh(x3 / 2)) / (8 * math.pi ** 2)


# ---------------------------------------------------------------- level sets

def _quad(f, a, b, what, **kw):
    opts = dict(QUAD_OPTS)
    opts.update(kw)
    val, err = integrate.quad(f, a, b, **opts)
    if not math.isfinite(val):
        raise LevelSetIntegrationError(f"{what}: non-finite value on [{a}, {b}]")
    return val


def _l1_bound(x: float, ell: float, j: int) -> float:
    """Upper bound for cosh(l1/2) at half-length x = l2/2 on the level set."""
    return (math.cosh(ell / 2) * math.sinh(x) - math.sinh(j * x)) / math.sinh((j + 1) * x)


def _l3_cosh(l1: float, l2: float, ell: float, j: int) -> float:
    x = l2 / 2
    if j == 1:
        return math.cosh(ell / 2) - 2 * math.cosh(l1 / 2) * math.cosh(x)
    return (math.sinh(x) * math.cosh(ell / 2) - math.cosh(l1 / 2) * math.sinh((j + 1) * x)) / math.sinh(j * x)


def level_set_nonempty(ell: float, j: int) -> bool:
    return math.cosh(ell / 2) > 2 * j + 1


def _boundary_param(f1, f2, f3, ell: float, j: int) -> float:
    if not level_set_nonempty(ell, j):
        return 0.0
    hi = 0.5 * ell / j + 1.0
    while _l1_bound(hi, ell, j) > 1.0:
        hi *= 2
    xs = optimize.brentq(lambda x: _l1_bound(x, ell, j) - 1.0, 1e-300, hi, xtol=1e-15, rtol=1e-15)
    sh = math.sinh(ell / 2)

    def inner(l2: float) -> float:
        B = _l1_bound(l2 / 2, ell, j)
        if B <= 1.0:
            return 0.0
        l1max = 2.0 * math.acosh(B)
        aj = 1.0 if j == 1 else math.sinh(l2 / 2) / math.sinh(j * l2 / 2)

        def g(l1: float) -> float:
            c3 = _l3_cosh(l1, l2, ell, j)
            l3 = 2.0 * math.acosh(max(c3, 1.0))
            return f1(l1) * f3(l3) * math.sinh(l1 / 2)

        # l1 = l1max - t^2 near the end where l3 -> 0
        split = 0.5 * l1max
        w = math.sqrt(l1max - split)
        val = _quad(g, 0.0, split, "boundary inner")
        val += _quad(lambda t: 2 * t * g(l1max - t * t), 0.0, w, "boundary inner")
        return val * f2(l2) * math.sinh(l2 / 2) * aj * sh

    return _quad(inner, 0.0, 2.0 * xs, "boundary outer")


def _conv_param_j1(f1, f2, f3, ell: float, const: bool = False) -> float:
    if not ell > pg.ELL0:
        return 0.0
    um, up = pg.u_minus(ell), pg.u_plus(ell)
    half = ell / 2
    pref = math.sinh(ell / 2) ** 2

    def kink() -> list[float]:
        def d(u):
            a, b = pg.L_minus_parts(ell, u)
            return a - (b if not math.isnan(b) else -math.inf)
        lo, hi = um * (1 + 1e-12), up * (1 - 1e-12)
        try:
            if d(lo) * d(hi) < 0:
                u = optimize.brentq(d, lo, hi, xtol=1e-15, rtol=1e-15)
                return [(u - um) / (up - um)]
        except ValueError:
            pass
        return []

    def slice_val(s: float) -> float:
        u = um + (up - um) * s
        Lm = pg.L_minus(ell, u)
        if math.isnan(Lm) or Lm >= half:
            return 0.0
        if const:
            return ell - 2 * Lm
        su = math.sqrt(u)

        def g(L: float) -> float:
            L2 = ell - L
            c1 = max(su * math.cosh(L / 2), 1.0)
            c2 = max(su * math.cosh(L2 / 2), 1.0)
            c3 = (1 - u) * math.cosh(ell / 2) - u * math.cosh((L - L2) / 2)
            c3 = max(c3, 1.0)
            return f1(2 * math.acosh(c1)) * f2(2 * math.acosh(c2)) * f3(2 * math.acosh(c3))

        # L = Lm + t^2 near each end removes the square-root behaviour of l1, l3 there
        w = math.sqrt(half - Lm)
        lo = _quad(lambda t: 2 * t * g(Lm + t * t), 0.0, w, "conv inner", epsrel=1e-11)
        hi = _quad(lambda t: 2 * t * g(ell - Lm - t * t), 0.0, w, "conv inner", epsrel=1e-11)
        return lo + hi

    pts = kink()
    return pref * (up - um) * _quad(slice_val, 0.0, 1.0, "conv outer", points=pts or None)


def _feasible_L(ell: float, u: float, j: int) -> list[tuple[float, float]]:
    """L-intervals with (L, ell-L, u) in the iterated-eight domain."""
    lo = 2.0 * math.acosh(1.0 / math.sqrt(u))
    hi = ell - lo
    if hi <= lo:
        return []

    def g(L: float) -> float:
        c = pg.ConvCoords(L, ell - L, u)
        _, _, c3, _ = pg._cuff_cosh(c, j)
        return c3 - 1.0 if not math.isnan(c3) else -1.0

    eps = 1e-12 * (hi - lo)
    xs = np.linspace(lo + eps, hi - eps, 65)
    # near the edge of the u-support the feasible interval is thinner than the sampling
    k = int(np.argmax([g(x) for x in xs]))
    best = optimize.minimize_scalar(lambda x: -g(x), bounds=(xs[max(k - 1, 0)], xs[min(k + 1, 64)]),
                                    method="bounded", options={"xatol": 1e-13})
    xs = np.unique(np.append(xs, best.x))
    vals = [g(x) for x in xs]
    out = []
    start = xs[0] if vals[0] > 0 else None
    for k in range(1, len(xs)):
        if (vals[k - 1] > 0) != (vals[k] > 0):
            r = optimize.brentq(g, xs[k - 1], xs[k], xtol=1e-14, rtol=1e-15)
            if vals[k] > 0:
                start = r
            else:
                out.append((start, r))
                start = None
    if start is not None:
        out.append((start, xs[-1]))
    return out


def _conv_param_general(f1, f2, f3, ell: float, j: int) -> float:
    if not level_set_nonempty(ell, j):
        return 0.0
    pref = math.sinh(ell / 2) ** 2
    u_lo = 1.0 / math.cosh(ell / 4) ** 2

    def slice_val(u: float) -> float:
        total = 0.0
        su = math.sqrt(u)
        for a, b in _feasible_L(ell, u, j):
            def g(L: float) -> float:
                c = pg.ConvCoords(L, ell - L, u)
                c1, cj, c3, l2 = pg._cuff_cosh(c, j)
                l1 = 2 * math.acosh(max(c1, 1.0))
                l3 = 2 * math.acosh(max(c3, 1.0))
                return f1(l1) * f2(l2) * f3(l3) * pg.jacobian_weight(l2, j)
            # square-root endpoints where a cuff degenerates; t^2 from both ends
            w = math.sqrt(0.5 * (b - a))
            total += _quad(lambda t: 2 * t * g(a + t * t), 0.0, w, "conv inner", epsrel=1e-11)
            total += _quad(lambda t: 2 * t * g(b - t * t), 0.0, w, "conv inner", epsrel=1e-11)
        return total

    # the u-support is an interval; locate its upper end
    us = np.linspace(u_lo, 1.0, 401)[1:-1]
    feas = [bool(_feasible_L(ell, u, j)) for u in us]
    if not any(feas):
        return 0.0
    idx = [k for k, f in enumerate(feas) if f]
    a_idx, b_idx = idx[0], idx[-1]
    ua = u_lo if a_idx == 0 else _bisect_edge(ell, j, us[a_idx - 1], us[a_idx])
    ub = 1.0 if b_idx == len(us) - 1 else _bisect_edge(ell, j, us[b_idx + 1], us[b_idx])
    # slice widths vanish like square roots at the support edges: u = ua + (ub-ua) sin^2
    span = ub - ua
    kinks = [math.asin(math.sqrt((k - ua) / span)) for k in _endpoint_switches(ell, j, us, ua, ub)]
    return pref * span * _quad(lambda th: math.sin(2 * th) * slice_val(ua + span * math.sin(th) ** 2),
                               0.0, 0.5 * math.pi, "conv outer", points=kinks or None)


def _endpoint_switches(ell: float, j: int, us: np.ndarray, ua: float, ub: float) -> list[float]:
    """u values where an L-interval endpoint passes from a cuff1/cuff2 bound to the cuff3 root."""
    def c3_at(u: float, side: int) -> float:
        lo = 2.0 * math.acosh(1.0 / math.sqrt(u))
        L = lo if side == 0 else ell - lo
        L += (1e-12 if side == 0 else -1e-12) * (ell - 2 * lo)
        _, _, c3, _ = pg._cuff_cosh(pg.ConvCoords(L, ell - L, u), j)
        return c3 - 1.0 if not math.isnan(c3) else -1.0

    inside = [u for u in us if ua < u < ub]
    out = []
    for side in (0, 1):
        vals = [c3_at(u, side) for u in inside]
        for k in range(1, len(inside)):
            if (vals[k - 1] > 0) != (vals[k] > 0):
                out.append(optimize.brentq(c3_at, inside[k - 1], inside[k], args=(side,), xtol=1e-15, rtol=1e-15))
    return sorted(out)


def _bisect_edge(ell, j, out_u, in_u, iters=60):
    for _ in range(iters):
        mid = 0.5 * (out_u + in_u)
        if _feasible_L(ell, mid, j):
            in_u = mid
        else:
            out_u = mid
    return 0.5 * (out_u + in_u)


def levelset_integral(f1: Evaluator, f2: Evaluator, f3: Evaluator, ell: float, j: int = 1,
                      method: str = "conv_param") -> float:
    """Integral of prod f_i(l_i) sinh(l_i/2) over the level set {L_j(l1,l2,l3) = ell}."""
    if j < 1:
        raise ValueError("j must be >= 1")
    if method == "boundary_param":
        return _boundary_param(f1, f2, f3, ell, j)
    if method == "conv_param":
        if j == 1:
            return _conv_param_j1(f1, f2, f3, ell)
        return _conv_param_general(f1, f2, f3, ell, j)
    raise ValueError(f"unknown method {method!r}")


def levelset_tor_integral(variant: int, f: Evaluator, ell: float) -> float:
    """Integrals over the curves where two of the three figure-eight cuffs coincide."""
    if not ell > pg.ELL0:
        return 0.0
    ch = math.cosh(ell / 2)
    sh = math.sinh(ell / 2)
    if variant in (1, 2):
        # cosh(ell/2) = cosh(y/2)(2 cosh(x/2) + 1); x carries f, y carries the weight
        ymax = 2.0 * math.acosh(ch / 3.0)

        def g(y: float) -> float:
            cx = (ch / math.cosh(y / 2) - 1.0) / 2.0
            x = 2.0 * math.acosh(max(cx, 1.0))
            return f(x) * y * sh / (2.0 * math.cosh(y / 2))

        return _quad(g, 0.0, ymax, "torus integral")
    if variant == 3:
        # cosh(ell/2) = 2 cosh^2(y/2) + cosh(x/2)
        ymax = 2.0 * math.acosh(math.sqrt((ch - 1.0) / 2.0))

        def g(y: float) -> float:
            cx = ch - 2.0 * math.cosh(y / 2) ** 2
            x = 2.0 * math.acosh(max(cx, 1.0))
            return f(x) * y * sh

        return _quad(g, 0.0, ymax, "torus integral")
    raise ValueError("variant must be 1, 2 or 3")


# ---------------------------------------------------------------- figure-eight density

@dataclass(frozen=True)
class DensityCurve:
    ell: tuple[float, ...]
    values: tuple[float, ...]
    order: str
    method: str = "conv_param"


def fig8_area(ell: float) -> float:
    """Area of the j = 1 coordinate domain slice at total length ell."""
    if not ell > pg.ELL0:
        return 0.0
    one = lambda _x: 1.0  # noqa: E731
    return _conv_param_j1(one, one, one, ell, const=True) / math.sinh(ell / 2) ** 2


def fig8_density_value(ell: float) -> float:
    """Leading pants density integrated over the figure-eight level set at ell."""
    if not ell > pg.ELL0:
        return 0.0
    return math.sinh(ell / 2) ** 2 * fig8_area(ell) / math.pi ** 2


def fig8_principal_oracle() -> tuple[float, float]:
    """Coefficients (p0, p1) of the expected principal part (ell - 2 C) / (4 pi^2).

    C = int_0^1 L_minus_inf(u) du follows from the large-ell limit of the domain.
    """
    us = optimize.brentq(lambda u: 2 * math.acosh(1 / math.sqrt(u)) - math.log(u / (1 - u)), 0.05, 0.95)
    C = integrate.quad(pg.L_minus_inf, 0.0, 1.0, points=[us], epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return -2.0 * C / (4 * math.pi ** 2), 1.0 / (4 * math.pi ** 2)


def _grid_values(grid: Sequence[float], workers: int) -> list[float]:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fig8_density_value, grid))
    return [fig8_density_value(x) for x in grid]


def fig8_density_order1(grid: Sequence[float], degree_cap: int = 1, workers: int = 1,
                        refine: bool = False) -> tuple[DensityCurve, FRReport]:
    grid = [float(x) for x in grid]
    if any(not (pg.ELL0 < x <= 60.0) for x in grid):
        raise ValueError("grid must lie in (2 argcosh 3, 60]")
    vals = _grid_values(grid, workers)
    rep = fr_fit(list(zip(grid, vals)), degree_cap, refine=fig8_density_value if refine else None)
    return DensityCurve(tuple(grid), tuple(vals), "order1"), rep


def form_coeff_check(values: Sequence[float], ell: Sequence[float], max_degree: int) -> float:
    """Residual of a polynomial-times-e^l fit of given degree, for structural form checks."""
    ell = np.asarray(ell, dtype=float)
    y = np.asarray(values, dtype=float) * np.exp(-ell)
    c = np.polyfit(ell, y, max_degree)
    return float(np.max(np.abs(np.polyval(c, ell) - y)))

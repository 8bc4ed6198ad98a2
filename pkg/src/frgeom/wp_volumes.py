"""Weil-Petersson volume polynomials and their large-genus approximations."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate, optimize

TABLE_ENV = "FRGEOM_VOLUME_TABLE"


class TableError(ValueError):
    pass


class MissingVolumeError(KeyError):
    pass


@dataclass(frozen=True)
class VolumePolynomial:
    g: int
    n: int
    coefficients: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        for e in self.coefficients:
            if len(e) != self.n:
                raise TableError(f"exponent {e} has wrong length for n={self.n}")
            if any(x % 2 or x < 0 for x in e):
                raise TableError(f"odd or negative exponent {e} in V_{self.g},{self.n}")

    @property
    def degree(self) -> int:
        return 6 * self.g - 6 + 2 * self.n

    def __call__(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected {self.n} lengths, got {x.shape}")
        total = 0.0
        for e, c in self.coefficients.items():
            total += c * float(np.prod(x ** np.array(e, dtype=float))) if e else c
        return total

    def constant(self) -> float:
        return self.coefficients.get((0,) * self.n, 0.0)


@dataclass
class VolumeTable:
    entries: dict[tuple[int, int], VolumePolynomial] = field(default_factory=dict)
    provenance: dict[tuple[int, int], str] = field(default_factory=dict)

    def __contains__(self, key) -> bool:
        return key in self.entries

    def __getitem__(self, key: tuple[int, int]) -> VolumePolynomial:
        try:
            return self.entries[key]
        except KeyError:
            raise MissingVolumeError(f"V_{key[0]},{key[1]} is not tabulated") from None

    def signatures(self) -> list[tuple[int, int]]:
        return sorted(self.entries, key=lambda s: (2 * s[0] - 2 + s[1], s))


def _builtin() -> dict[tuple[int, int], VolumePolynomial]:
    return {
        (0, 3): VolumePolynomial(0, 3, {(0, 0, 0): 1.0}),
        (1, 1): VolumePolynomial(1, 1, {(0,): math.pi ** 2 / 12, (2,): 1.0 / 48}),
    }


def _parse_coef(s: str) -> float:
    s = s.strip()
    if "/" in s:
        return float(Fraction(s))
    return float(s)


def parse_table(text: str, source: str = "<text>") -> VolumeTable:
    table = VolumeTable()
    for key, v in _builtin().items():
        table.entries[key] = v
        table.provenance[key] = "builtin"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            head, body = line.split(":", 1)
            g, n = (int(t) for t in head.split())
            coeffs: dict[tuple[int, ...], float] = {}
            for term in body.split(";"):
                term = term.strip()
                if not term:
                    continue
                e, c = term.split("=")
                e = e.strip().strip("()")
                exps = tuple(int(t) for t in e.split(",")) if e else ()
                coeffs[exps] = coeffs.get(exps, 0.0) + _parse_coef(c)
            poly = VolumePolynomial(g, n, coeffs)
        except TableError as exc:
            raise TableError(f"{source}:{lineno}: {exc}") from None
        except (ValueError, TypeError) as exc:
            raise TableError(f"{source}:{lineno}: malformed entry ({exc})") from None
        if 2 * g - 2 + n <= 0:
            raise TableError(f"{source}:{lineno}: unstable signature ({g},{n})")
        table.entries[(g, n)] = poly
        table.provenance[(g, n)] = source
    return table


def load_table(path: str | os.PathLike | None = None) -> VolumeTable:
    """Load a table file; defaults to $FRGEOM_VOLUME_TABLE, then the bundled table."""
    if path is None:
        path = os.environ.get(TABLE_ENV)
    if path is None:
        text = resources.files("frgeom").joinpath("data/volumes.txt").read_text()
        return parse_table(text, "bundled")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise TableError(f"cannot read volume table {p}: {exc}") from None
    return parse_table(text, str(p))


_CACHE: dict[str | None, VolumeTable] = {}


def default_table() -> VolumeTable:
    """The table named by $FRGEOM_VOLUME_TABLE, else the bundled one; cached per path."""
    key = os.environ.get(TABLE_ENV)
    if key not in _CACHE:
        _CACHE[key] = load_table(key)
    return _CACHE[key]


def volume(g: int, n: int, x: Sequence[float] | None = None, table: VolumeTable | None = None) -> float:
    table = default_table() if table is None else table
    poly = table[(g, n)]
    if x is None:
        x = [0.0] * n
    if any(v < 0 for v in x):
        raise ValueError("lengths must be nonnegative")
    return poly(x)


def first_order_ratio(x: Sequence[float]) -> float:
    """prod (2/x_i) sinh(x_i/2), the large-genus limit of V_{g,n}(x)/V_{g,n}."""
    out = 1.0
    for v in x:
        out *= 1.0 if v == 0 else 2.0 * math.sinh(v / 2) / v
    return out


def f_terms(x: float) -> tuple[float, float, float, float]:
    """f1 = 2 sinh(x/2), f2 = 2 x^2 sinh(x/2), f3 = x cosh(x/2), f4 = x."""
    s = math.sinh(x / 2)
    return 2.0 * s, 2.0 * x * x * s, x * math.cosh(x / 2), x


def _reduced(x: float) -> tuple[float, float, float, float]:
    """f_k(x)/x with the limits at x = 0."""
    if x == 0.0:
        return 1.0, 0.0, 1.0, 1.0
    return 2.0 * math.sinh(x / 2) / x, 2.0 * x * math.sinh(x / 2), math.cosh(x / 2), 1.0


def second_order_expansion(g: int, n: int, x: Sequence[float], ratio_gm1np1: float, ratio_gnm1: float) -> float:
    """Approximation of V_{g,n}(x)/V_{g,n} to second order in 1/g.

    ratio_gm1np1 = V_{g-1,n+1}/V_{g,n} and ratio_gnm1 = V_{g,n-1}/V_{g,n}.
    """
    if len(x) != n:
        raise ValueError("need n lengths")
    red = [_reduced(float(v)) for v in x]
    f1 = [r[0] for r in red]
    prod_all = float(np.prod(f1)) if n else 1.0

    def prod_except(*idx):
        out = 1.0
        for k in range(n):
            if k not in idx:
                out *= f1[k]
        return out

    s1 = 0.0
    for i, (r1, r2, r3, r4) in enumerate(red):
        s1 += (r3 + r4 - r2 / 16 - 2 * r1) * prod_except(i)
    s2 = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            ri, rj = red[i], red[j]
            s2 += (ri[2] * rj[2] + ri[3] * rj[3] - 2 * ri[0] * rj[0]) * prod_except(i, j)
    return 8.0 * ratio_gm1np1 * s1 - 4.0 * ratio_gnm1 * s2 + prod_all


@dataclass
class BoundReport:
    g: int
    n: int
    samples: int
    poly_bound_ok: bool
    exp_bound_ok: bool
    worst_poly_ratio: float
    worst_exp_ratio: float

    @property
    def ok(self) -> bool:
        return self.poly_bound_ok and self.exp_bound_ok


def bound_checks(g: int, n: int, table: VolumeTable | None = None, samples: int = 200,
                 seed: int = 0, hi: float = 10.0) -> BoundReport:
    """V(x) <= V(0)(1+max x)^{6g-6+2n} and V(x) <= V(0) e^{sum x / 2} on random x in [0,hi]^n."""
    table = default_table() if table is None else table
    poly = table[(g, n)]
    v0 = poly([0.0] * n)
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, hi, size=(samples, n))
    wp, we = 0.0, 0.0
    for x in X:
        v = poly(x)
        mx = float(np.max(x)) if n else 0.0
        wp = max(wp, v / (v0 * (1.0 + mx) ** poly.degree))
        we = max(we, v / (v0 * math.exp(float(np.sum(x)) / 2)))
    tol = 1 + 1e-12
    return BoundReport(g, n, samples, wp <= tol, we <= tol, wp, we)


def table_values_schedule(K: int) -> dict[str, Fraction]:
    """Parameters for an expansion with K terms beyond the leading one (error 1/g^{K+1}).

    Returns the log g multiplier of the length window, the exponent alpha and
    the spectral gap 1/4 - alpha^2.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    m = K + 2
    alpha = Fraction(1, 2 * m)
    return {"L_multiplier": Fraction(2 * m), "alpha": alpha, "gap": Fraction(1, 4) - alpha ** 2}


def torus_integrand(x: float) -> float:
    return (math.pi ** 2 / 6 + x * x / 12) * math.sinh(x / 2)


def torus_sandwich_a0() -> float:
    """Largest a0 with (pi^2/6 + x^2/12) sinh(x/2) <= x on (0, a0]."""
    f = lambda x: torus_integrand(x) - x  # noqa: E731
    return float(optimize.brentq(f, 0.5, 3.0, xtol=1e-15, rtol=1e-15))


def tor_expectation_main_term(a: float, g: int, ratio_gm11_over_g: float | None = None) -> float:
    """ratio * int_0^a (pi^2/6 + x^2/12) sinh(x/2) dx, ratio defaulting to 1/(8 pi^2 g)."""
    if a < 0 or g < 2:
        raise ValueError("need a >= 0 and g >= 2")
    if a == 0:
        return 0.0
    ratio = 1.0 / (8 * math.pi ** 2 * g) if ratio_gm11_over_g is None else ratio_gm11_over_g
    val = integrate.quad(torus_integrand, 0.0, a, epsabs=1e-15, epsrel=1e-13)[0]
    return ratio * val

"""Generate the Weil-Petersson volume table shipped with frgeom.

Runs the intersection-number recursion in exact rational arithmetic.
Brackets [tau_d]_{g,n} are stored as rationals r with the bracket equal to
r * pi**(2*m0), m0 = 3g-3+n-|d|.

    python tools/volume_recursion.py [max_euler] [max_n] > src/frgeom/data/volumes.txt
"""
from __future__ import annotations

import itertools
import math
import sys
from fractions import Fraction
from functools import lru_cache


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    if n == 0:
        return Fraction(1)
    return -sum(math.comb(n + 1, k) * bernoulli(k) for k in range(n)) / (n + 1)


@lru_cache(maxsize=None)
def alpha(k: int) -> Fraction:
    """zeta(2k)(1 - 2^(1-2k)) / pi^(2k)."""
    z = Fraction((-1) ** (k + 1)) * bernoulli(2 * k) * 2 ** (2 * k) / (2 * math.factorial(2 * k))
    return z * (1 - Fraction(2) ** (1 - 2 * k))


def dim(g: int, n: int) -> int:
    return 3 * g - 3 + n


@lru_cache(maxsize=None)
def bracket(g: int, d: tuple[int, ...]) -> Fraction:
    n = len(d)
    if g < 0 or n == 0 or 2 * g - 2 + n <= 0:
        return Fraction(0)
    if any(x < 0 for x in d):
        return Fraction(0)
    d = tuple(sorted(d))
    m0 = dim(g, n) - sum(d)
    if m0 < 0:
        return Fraction(0)
    if (g, n) == (0, 3):
        return Fraction(1) if d == (0, 0, 0) else Fraction(0)
    if (g, n) == (1, 1):
        return Fraction(1, 12) if d == (0,) else Fraction(1, 2)
    return _recurse(g, d)


def _recurse(g: int, d: tuple[int, ...]) -> Fraction:
    n = len(d)
    d1, rest = d[0], d[1:]
    m0 = dim(g, n) - sum(d)
    total = Fraction(0)
    for L in range(m0 + 1):
        aL = alpha(L)
        for j in range(len(rest)):
            others = rest[:j] + rest[j + 1:]
            idx = d1 + rest[j] + L - 1
            if idx >= 0:
                total += 8 * (2 * rest[j] + 1) * aL * bracket(g, (idx,) + others)
        s = L + d1 - 2
        if s < 0:
            continue
        for k1 in range(s + 1):
            k2 = s - k1
            total += 16 * aL * bracket(g - 1, (k1, k2) + rest)
            for mask in itertools.product((0, 1), repeat=len(rest)):
                I = tuple(x for x, b in zip(rest, mask) if b == 0)
                J = tuple(x for x, b in zip(rest, mask) if b == 1)
                for g1 in range(g + 1):
                    if 2 * g1 - 1 + len(I) <= 0 or 2 * (g - g1) - 1 + len(J) <= 0:
                        continue
                    total += 16 * aL * bracket(g1, (k1,) + I) * bracket(g - g1, (k2,) + J)
    return total


def _bounded_tuples(n: int, cap: int):
    if n == 0:
        yield ()
        return
    for first in range(cap + 1):
        for tail in _bounded_tuples(n - 1, cap - first):
            yield (first,) + tail


def polynomial(g: int, n: int) -> dict[tuple[int, ...], Fraction]:
    """Coefficients c with V_{g,n}(x) = sum_e c_e pi^(2(dim-|e|/2)) prod x^e."""
    out = {}
    for d in _bounded_tuples(n, dim(g, n)):
        b = bracket(g, d)
        if b == 0:
            continue
        den = 1
        for di in d:
            den *= math.factorial(2 * di + 1) * 4 ** di
        out[tuple(2 * di for di in d)] = b / den
    return out


def closed_volume(g: int) -> Fraction:
    """V_{g,0} / pi^(6g-6) via the dilaton relation at L = 2 pi i."""
    total = Fraction(0)
    for d in range(dim(g, 1) + 1):
        r = bracket(g, (d,))
        total += Fraction(2 * d * (-1) ** (d - 1)) * r / (4 * math.factorial(2 * d + 1))
    return total / (2 * g - 2)


def signatures(max_euler: int, max_n: int):
    for chi in range(1, max_euler + 1):
        for g in range(0, chi // 2 + 2):
            n = chi + 2 - 2 * g
            if 0 <= n <= max_n:
                yield g, n


def main(argv: list[str]) -> None:
    max_euler = int(argv[1]) if len(argv) > 1 else 8
    max_n = int(argv[2]) if len(argv) > 2 else 4
    print("# Weil-Petersson volume polynomials V_{g,n}(x), x = boundary lengths")
    print("# format: g n : e1,...,en=coefficient ; ...   (n = 0 uses an empty exponent list)")
    for g, n in signatures(max_euler, max_n):
        if (g, n) in ((0, 3), (1, 1)):
            continue
        dm = dim(g, n)
        if n == 0:
            terms = [("", float(closed_volume(g)) * math.pi ** (2 * dm))]
        else:
            poly = polynomial(g, n)
            terms = []
            for e, c in sorted(poly.items()):
                power = dm - sum(e) // 2
                terms.append((",".join(map(str, e)), float(c) * math.pi ** (2 * power)))
        body = " ; ".join(f"{e}={repr(c)}" for e, c in terms)
        print(f"{g} {n} : {body}")


if __name__ == "__main__":
    main(sys.argv)

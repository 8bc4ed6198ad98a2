"""Acceptance checks shared by the `verify` subcommand and the test suite.

Each check returns a CheckResult with a pass flag, a one-line summary and the
measured quantities. Everything is seeded and deterministic.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import densities as dn
from . import kernels as kr
from . import pants_geom as pg
from . import sl2_words as sw
from . import wp_volumes as wv


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.summary} ({self.elapsed:.2f}s)"


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, str, dict]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, summary, details = fn()
    return CheckResult(number, name, bool(ok), summary, details, time.perf_counter() - t0)


def _random_triples(rng: np.random.Generator, n: int, lo: float, hi: float) -> list[pg.BoundaryLengths]:
    return [pg.BoundaryLengths(*map(float, rng.uniform(lo, hi, 3))) for _ in range(n)]


# ---------------------------------------------------------------- 1

def fig8_trace_oracle(seed: int = 1, n: int = 1000) -> CheckResult:
    def run():
        t0 = time.perf_counter()
        rng = np.random.default_rng(seed)
        worst = 0.0
        for b in _random_triples(rng, n, 0.5, 6.0):
            rep = sw.build_pants_rep(b)
            oracle = rep.word_length((sw.A, sw.B_INV))
            closed = pg.fig8_length(b)
            worst = max(worst, abs(oracle - closed) / closed)
        dt = time.perf_counter() - t0
        ok = worst <= 1e-8 and dt < 5.0
        return ok, f"max rel err {worst:.2e} over {n} triples in {dt:.2f}s", {"worst": worst, "runtime": dt}
    return _timed(1, "figure-eight trace oracle", run)


# ---------------------------------------------------------------- 2

def iterated_recursion(seed: int = 2, n: int = 200, n_id: int = 100) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        triples = _random_triples(rng, n, 0.5, 6.0)
        worst_rec = max(pg.iterated_recursion_residual(b, j) for j in range(2, 7) for b in triples)
        worst_id = 0.0
        count = 0
        while count < n_id:
            t1, t2, p = map(float, rng.uniform(0.5, 3.0, 3))
            try:
                rep = sw.build_eight_rep(t1, t2, p)
            except pg.DomainError:
                continue
            count += 1
            worst_id = max(worst_id, sw.trace_product_identity_residual(rep.A1, rep.A2))
        ok = worst_rec <= 1e-9 and worst_id <= 1e-10
        return ok, f"recursion residual {worst_rec:.2e}, trace identity residual {worst_id:.2e}", {
            "recursion": worst_rec, "identity": worst_id}
    return _timed(2, "iterated-eight recursion and SL2 identity", run)


# ---------------------------------------------------------------- 3

def change_of_variables(seed: int = 3, n: int = 500) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        worst_rt, worst_jac = 0.0, 0.0
        for j in (1, 2, 3):
            k = 0
            while k < n:
                c = pg.ConvCoords(float(rng.uniform(0.2, 12.0)), float(rng.uniform(0.2, 12.0)),
                                  float(rng.uniform(0.01, 0.99)))
                if not pg.in_domain_E(c, j)[0]:
                    continue
                k += 1
                b = pg.coords_to_boundary(c, j)
                back = pg.boundary_to_coords(b, j)
                worst_rt = max(worst_rt, abs(back.L1 - c.L1), abs(back.L2 - c.L2), abs(back.u - c.u))
                J = pg.jacobian(c, j)
                worst_jac = max(worst_jac, abs(J - pg.jacobian_fd(c, j)) / J)
        ok = worst_rt <= 1e-9 and worst_jac <= 1e-5
        return ok, f"round trip {worst_rt:.2e}, Jacobian vs FD {worst_jac:.2e} (j=1,2,3)", {
            "round_trip": worst_rt, "jacobian": worst_jac}
    return _timed(3, "change of variables", run)


# ---------------------------------------------------------------- 4

def _basis_function(coeffs: np.ndarray) -> Callable[[float], float]:
    a, b, c = (float(x) for x in coeffs)
    return lambda x: a + (b + c * x) * math.exp(-x / 2)


def levelset_cross_validation(seed: int = 4, n: int = 20) -> CheckResult:
    def run():
        t0 = time.perf_counter()
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n):
            fs = [_basis_function(rng.uniform(0.0, 1.0, 3)) for _ in range(3)]
            ell = float(rng.uniform(8.0, 20.0))
            a = dn.levelset_integral(*fs, ell, 1, "boundary_param")
            b = dn.levelset_integral(*fs, ell, 1, "conv_param")
            worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
        dt = time.perf_counter() - t0
        ok = worst <= 1e-4 and dt < 60.0
        return ok, f"max rel disagreement {worst:.2e} over {n} configurations in {dt:.1f}s", {
            "worst": worst, "runtime": dt}
    return _timed(4, "level-set cross-validation", run)


# ---------------------------------------------------------------- 5

def fig8_fr_verification() -> CheckResult:
    def run():
        coarse = np.arange(6.0, 40.0 + 1e-9, 0.5)
        fine = np.arange(6.0, 40.0 + 1e-9, 0.25)
        _, rep = dn.fig8_density_order1(coarse, 1, refine=True)
        _, rep_f = dn.fig8_density_order1(fine, 1)
        p = np.array(rep.fitted_principal.coefficients)
        q = np.array(rep_f.fitted_principal.coefficients)
        drift = float(np.max(np.abs(p - q) / np.abs(q)))
        ok = (rep.max_violation == 0.0 and rep.fitted_exponent <= 4.0 and math.isfinite(rep.fitted_constant)
              and drift <= 0.01)
        coeffs = ", ".join(f"{c:.8f}" for c in p)
        return ok, (f"principal ({coeffs}), c1={rep.fitted_constant:.3e}, c2={rep.fitted_exponent:.3f}, "
                    f"violation={rep.max_violation}, drift {drift:.2e}"), {
            "coefficients": tuple(p), "c1": rep.fitted_constant, "c2": rep.fitted_exponent,
            "violation": rep.max_violation, "drift": drift}
    return _timed(5, "FR fit of the figure-eight density", run)


# ---------------------------------------------------------------- 6

CANCEL_LS = (10.0, 20.0, 30.0, 40.0)


def cancellation_values(m: int, Ls=CANCEL_LS) -> list[float]:
    f = lambda x: 4.0 * math.sinh(x / 2) ** 2  # noqa: E731
    return [kr.cancellation_integral(f, m, kr.make_kernel(L)) for L in Ls]


def cancellation_contrast() -> CheckResult:
    """m = 1 stays bounded; m = 0 is tested for value / e^{L/2} tending to a positive constant.

    Convergence to a positive constant is judged on the last two L values: the
    ratio must be positive and change by at most 10% between them.
    """
    def run():
        v1 = cancellation_values(1)
        v0 = cancellation_values(0)
        r0 = [v / math.exp(L / 2) for v, L in zip(v0, CANCEL_LS)]
        C1 = max(abs(v) for v in v1)
        incr = [abs(v1[k + 1] - v1[k]) for k in range(len(v1) - 1)]
        bounded = C1 < 1.0 and incr[-1] <= incr[0]
        approach = r0[-1] / r0[-2] if r0[-2] else math.nan
        converges = all(r > 0 for r in r0) and abs(approach - 1.0) <= 0.1
        summary = (f"m=1 values {', '.join(f'{v:.5f}' for v in v1)} (C={C1:.4f}, bounded={bounded}); "
                   f"m=0 ratios {', '.join(f'{r:.3e}' for r in r0)} "
                   f"(last step ratio {approach:.3f}, positive limit={converges})")
        return bounded and converges, summary, {"m1": v1, "m0_ratio": r0, "C": C1,
                                                "bounded": bounded, "converges": converges}
    return _timed(6, "cancellation contrast", run)


# ---------------------------------------------------------------- 7

def d_annihilation(n: int = 50) -> CheckResult:
    def run():
        x = np.linspace(0.5, 5.0, n)
        worst_sym, worst_fd = 0.0, 0.0
        for d in range(3):
            coeffs = [0.0] * d + [1.0]
            q = kr.apply_D_exp_poly(coeffs, d + 1)
            sym = np.polynomial.polynomial.polyval(x, q) * np.exp(x / 2) if len(q) else np.zeros_like(x)
            worst_sym = max(worst_sym, float(np.max(np.abs(sym))))
            fd = kr.apply_D_numeric(lambda t, d=d: t ** d * np.exp(t / 2), d + 1, x)
            worst_fd = max(worst_fd, float(np.max(np.abs(fd))))
        ok = worst_sym <= 1e-10 and worst_fd <= 1e-5
        return ok, f"symbolic residual {worst_sym:.2e}, finite-difference residual {worst_fd:.2e}", {
            "symbolic": worst_sym, "fd": worst_fd}
    return _timed(7, "D-annihilation", run)


# ---------------------------------------------------------------- 8

def counting_bound_check(L: float = 6.0) -> CheckResult:
    def run():
        rep = sw.build_pants_rep(pg.BoundaryLengths(2.0, 2.0, 2.0))
        counts = {cap: len(sw.enumerate_geodesics(rep, cap, L, primitive_only=True, cap=cap)) for cap in (12, 16)}
        bound = sw.counting_bound(L)
        ok = counts[12] == counts[16] and counts[16] <= bound
        return ok, f"count {counts[12]} (cap 12), {counts[16]} (cap 16), bound {bound:.1f}", {
            "counts": counts, "bound": bound}
    return _timed(8, "counting bound", run)


# ---------------------------------------------------------------- 9

def bruteforce_realisations(S: dn.FillingType, g: int) -> set[tuple]:
    """Independent enumeration: labelings of boundary components, then all genus vectors."""
    n = S.n_S
    found = set()
    for labels in itertools.product(range(n), repeat=n):
        blocks: dict[int, list[int]] = {}
        for i, lab in enumerate(labels, 1):
            blocks.setdefault(lab, []).append(i)
        part = tuple(sorted((tuple(b) for b in blocks.values()), key=min))
        q = len(part)
        total = g - S.g_S - n + q
        for gen in itertools.product(range(total + 1), repeat=q):
            if sum(gen) != total:
                continue
            if all(2 - 2 * gj - len(b) <= 0 for gj, b in zip(gen, part)):
                found.add((part, gen))
    return found


def realisation_enumeration() -> CheckResult:
    def run():
        counts = {}
        match = True
        S02 = dn.FillingType(0, 2)
        for g in range(3, 9):
            rs = dn.enumerate_realisations(S02, g)
            counts[g] = len(rs)
            match &= {(r.partition, r.genera) for r in rs} == bruteforce_realisations(S02, g)
        min_ok = True
        for S in (dn.FillingType(0, 2), dn.FillingType(0, 3), dn.FillingType(1, 1)):
            for g in range(S.g_S + S.n_S, 9):
                min_ok &= all(dn.rank(r, S, g) >= abs(S.euler) for r in dn.enumerate_realisations(S, g))
        ok = match and min_ok and all(counts[g] == g for g in counts)
        return ok, f"|R_g((0,2))| = {[counts[g] for g in sorted(counts)]} for g=3..8, brute force match={match}, ranks ok={min_ok}", {
            "counts": counts}
    return _timed(9, "realisation enumeration", run)


# ---------------------------------------------------------------- 10

def volume_bounds(samples: int = 200) -> CheckResult:
    def run():
        table = wv.default_table()
        bad = []
        for sig in table.signatures():
            rep = wv.bound_checks(*sig, table=table, samples=samples, seed=10)
            if not rep.ok:
                bad.append(sig)
        n_sig = len(table.signatures())
        return not bad, f"{n_sig} signatures checked, failures: {bad or 'none'}", {"failures": bad}
    return _timed(10, "volume bounds", run)


# ---------------------------------------------------------------- 11

def schedule_table() -> CheckResult:
    from fractions import Fraction as F

    def run():
        s0, s1 = wv.table_values_schedule(0), wv.table_values_schedule(1)
        got = [(s["L_multiplier"], s["alpha"], s["gap"]) for s in (s0, s1)]
        want = [(F(4), F(1, 4), F(3, 16)), (F(6), F(1, 6), F(2, 9))]
        return got == want, f"K=0 -> {tuple(map(str, got[0]))}, K=1 -> {tuple(map(str, got[1]))}", {}
    return _timed(11, "schedule table", run)


# ---------------------------------------------------------------- 12

def torus_sandwich() -> CheckResult:
    def run():
        a0 = wv.torus_sandwich_a0()
        x = np.linspace(1e-6, a0, 20001)
        T = np.array([wv.torus_integrand(float(v)) for v in x])
        sandwich = bool(np.all(x / 2 <= T) and np.all(T <= x * (1 + 1e-12)))
        c_lo, c_hi = 1.0 / (32 * math.pi ** 2), 1.0 / (16 * math.pi ** 2)
        ratios = []
        for a in np.linspace(0.01, a0, 40):
            for g in (2, 5, 20):
                ratios.append(wv.tor_expectation_main_term(float(a), g) / (a * a / g))
        lo, hi = min(ratios), max(ratios)
        ok = a0 > 0 and sandwich and c_lo <= lo and hi <= c_hi
        return ok, (f"a0={a0:.10f}, sandwich holds={sandwich}, ratio range [{lo:.6f}, {hi:.6f}] "
                    f"inside [{c_lo:.6f}, {c_hi:.6f}]"), {"a0": a0, "lo": lo, "hi": hi}
    return _timed(12, "torus-expectation sandwich", run)


ALL_CHECKS: dict[int, Callable[[], CheckResult]] = {
    1: fig8_trace_oracle,
    2: iterated_recursion,
    3: change_of_variables,
    4: levelset_cross_validation,
    5: fig8_fr_verification,
    6: cancellation_contrast,
    7: d_annihilation,
    8: counting_bound_check,
    9: realisation_enumeration,
    10: volume_bounds,
    11: schedule_table,
    12: torus_sandwich,
}

SUITES: dict[str, tuple[int, ...]] = {
    "acceptance": tuple(ALL_CHECKS),
    "trace-identities": (1, 2),
    "geometry": (1, 2, 3),
    "levelset": (4, 5),
    "kernels": (6, 7),
    "counting": (8,),
    "realisations": (9,),
    "volumes": (10, 11, 12),
}


def run_suite(name: str) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return [ALL_CHECKS[k]() for k in SUITES[name]]

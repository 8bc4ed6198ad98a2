from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frgeom import pants_geom as pg
from frgeom.pants_geom import BoundaryLengths, ConvCoords

# 50-digit reference values
FIG8_222 = 5.0563710812901065132
IT_111_J2 = 5.3108757653424987039
JAC_455 = 8.8827340385133263255
JAC_4504_J2 = 5.2203982672851714424

length = st.floats(min_value=0.2, max_value=8.0)
triple = st.builds(BoundaryLengths, length, length, length)


def random_domain_points(j: int, n: int, seed: int):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        c = ConvCoords(float(rng.uniform(0.2, 12)), float(rng.uniform(0.2, 12)), float(rng.uniform(0.01, 0.99)))
        if pg.in_domain_E(c, j)[0]:
            out.append(c)
    return out


# ---------------------------------------------------------------- lengths

def test_fig8_reference():
    assert pg.fig8_length(BoundaryLengths(2, 2, 2)) == pytest.approx(FIG8_222, rel=1e-14)


def test_fig8_floor():
    assert pg.ELL0 == pytest.approx(2 * math.acosh(3), rel=1e-15)
    assert pg.ELL0 == pytest.approx(4 * math.acosh(math.sqrt(2)), rel=1e-15)
    assert pg.fig8_length(BoundaryLengths(1e-7, 1e-7, 1e-7)) == pytest.approx(pg.ELL0, rel=1e-12)


def test_fig8_floor_approached_monotonically():
    vals = [pg.fig8_length(BoundaryLengths(s, s, s)) for s in (0.5, 0.25, 0.1, 0.05, 0.01)]
    assert all(v > pg.ELL0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


@given(triple)
def test_fig8_symmetric_in_first_two(b):
    swapped = BoundaryLengths(b.l2, b.l1, b.l3)
    assert pg.fig8_length(b) == pytest.approx(pg.fig8_length(swapped), rel=1e-14)


@given(triple)
def test_iterated_j1_is_fig8(b):
    assert pg.iterated_length(b, 1) == pytest.approx(pg.fig8_length(b), rel=1e-13)


def test_iterated_reference():
    assert pg.iterated_length(BoundaryLengths(1, 1, 1), 2) == pytest.approx(IT_111_J2, rel=1e-14)


def test_recursion_reference_point():
    assert pg.iterated_recursion_residual(BoundaryLengths(2, 1.5, 2.5), 3) <= 1e-10


@given(triple, st.integers(2, 8))
def test_recursion_property(b, j):
    assert pg.iterated_recursion_residual(b, j) <= 1e-9


def test_iterated_log_domain():
    b = BoundaryLengths(3.0, 60.0, 2.0)
    val = pg.iterated_length(b, 20)
    assert math.isfinite(val)
    # cosh(L/2) ~ e^{L/2}/2 dominated by the cosh(l1/2) sinh((j+1) l2/2)/sinh(l2/2) term
    approx = 2 * (math.log(math.cosh(1.5)) + 20 * 30.0 + math.log(2.0))
    assert val == pytest.approx(approx, rel=1e-6)


@given(triple)
def test_length_ordering(b):
    L = pg.fig8_length(b)
    assert b.l1 + b.l2 <= L and b.l3 <= L


# ---------------------------------------------------------------- coordinates

def test_round_trip_reference():
    b = BoundaryLengths(2, 3, 4)
    back = pg.coords_to_boundary(pg.boundary_to_coords(b, 1), 1)
    assert np.allclose(back.as_tuple(), b.as_tuple(), atol=1e-9, rtol=0)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_round_trips_both_directions(j):
    for c in random_domain_points(j, 500, seed=10 + j):
        b = pg.coords_to_boundary(c, j)
        c2 = pg.boundary_to_coords(b, j)
        assert abs(c2.L1 - c.L1) <= 1e-9 and abs(c2.L2 - c.L2) <= 1e-9 and abs(c2.u - c.u) <= 1e-9
        b2 = pg.coords_to_boundary(c2, j)
        assert np.allclose(b2.as_tuple(), b.as_tuple(), atol=1e-9, rtol=0)


@given(triple, st.integers(1, 4))
@settings(max_examples=60)
def test_boundary_to_coords_properties(b, j):
    c = pg.boundary_to_coords(b, j)
    assert 0.0 < c.u < 1.0
    assert c.L1 + c.L2 == pytest.approx(pg.iterated_length(b, j), rel=1e-12)
    assert pg.in_domain_E(c, j)[0]


def test_symmetric_input_gives_equal_arcs():
    c = pg.boundary_to_coords(BoundaryLengths(2.5, 2.5, 1.0), 1)
    assert c.L1 == pytest.approx(c.L2, rel=1e-14)


def test_fig8_of_coords_is_total_arc_length():
    for c in random_domain_points(1, 100, seed=5):
        assert pg.fig8_length(pg.coords_to_boundary(c, 1)) == pytest.approx(c.L1 + c.L2, abs=1e-9)


def test_u_toward_one_recovers_arcs():
    errs = []
    for u in (0.9, 0.95, 0.99):
        b = pg.coords_to_boundary(ConvCoords(6.0, 7.0, u), 1)
        errs.append(abs(b.l1 - 6.0) + abs(b.l2 - 7.0))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 0.05


def test_coords_outside_domain_raise():
    with pytest.raises(pg.DomainError, match="cuff3"):
        pg.coords_to_boundary(ConvCoords(1, 1, 0.999), 1)


# ---------------------------------------------------------------- Jacobian

def test_jacobian_references():
    c = ConvCoords(4, 5, 0.5)
    assert pg.jacobian(c, 1) == pytest.approx(JAC_455, rel=1e-12)
    assert pg.jacobian_fd(c, 1, step=1e-5) == pytest.approx(JAC_455, rel=1e-6)
    c2 = ConvCoords(4, 5, 0.4)
    assert pg.jacobian(c2, 2) == pytest.approx(JAC_4504_J2, rel=1e-12)
    assert pg.jacobian_fd(c2, 2) == pytest.approx(pg.jacobian(c2, 2), rel=1e-5)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_jacobian_matches_finite_differences(j):
    for c in random_domain_points(j, 100, seed=20 + j):
        J = pg.jacobian(c, j)
        assert J > 0
        assert pg.jacobian_fd(c, j) == pytest.approx(J, rel=1e-5)


# ---------------------------------------------------------------- domain

def test_domain_membership_examples():
    assert pg.in_domain_E(ConvCoords(10, 10, 0.5)) == (True, None)
    u = 1 / math.cosh(1.0) ** 2
    assert pg.in_domain_E(ConvCoords(2.0, 9.0, u * 0.999)) == (False, "cuff1")
    assert pg.in_domain_E(ConvCoords(1, 1, 0.999)) == (False, "cuff3")


def test_domain_params_examples():
    d = pg.domain_params(pg.ELL0 * (1 + 1e-12), 0.3)
    assert d.u_minus == pytest.approx(0.5, abs=1e-10) and d.u_plus == pytest.approx(0.5, abs=1e-10)
    assert pg.u_minus(8.0) == pytest.approx(0.070650824853164466, rel=1e-14)
    assert pg.L_minus_inf(0.5) == pytest.approx(1.7627471740390860505, rel=1e-14)
    with pytest.raises(pg.DomainError):
        pg.domain_params(3.0, 0.5)


@given(st.floats(min_value=3.6, max_value=40.0))
def test_u_window(ell):
    um, up = pg.u_minus(ell), pg.u_plus(ell)
    assert um < up
    assert abs(math.log(um)) <= ell / 2


@given(st.floats(8.0, 30.0), st.floats(0.0, 1.0))
@settings(max_examples=80)
def test_L_minus_gap(ell, s):
    um, up = pg.u_minus(ell), pg.u_plus(ell)
    u = um + (up - um) * (0.02 + 0.96 * s)
    gap = pg.L_minus(ell, u) - pg.L_minus_inf(u)
    assert gap >= -1e-12
    assert pg.L_minus_gap_ratio(ell, u) <= 8.0


def test_E1_slice_matches_membership():
    ell = 10.0
    um, up, Lm = pg.E1_slice(ell)
    for u in np.linspace(um, up, 12)[1:-1]:
        lo = Lm(u)
        assert pg.in_domain_E(ConvCoords(lo + 1e-6, ell - lo - 1e-6, u))[0]
        assert not pg.in_domain_E(ConvCoords(lo - 1e-6, ell - lo + 1e-6, u))[0]


# ---------------------------------------------------------------- expansions

def test_expansion_remainder_reference():
    r = pg.expansion_remainders(2.0, 0.5)
    assert r["r"] == pytest.approx(-0.14541345786885905697, rel=1e-14)
    assert abs(pg.expansion_remainders(25.0, 1e-9)["r"]) < 1e-10


def test_expansion_bound_with_one_constant():
    rng = np.random.default_rng(3)
    ratios = []
    for _ in range(500):
        u = float(rng.uniform(0.01, 0.99))
        L = float(rng.uniform(pg.L_minus_inf(u) + 0.5, 20.0))
        r = pg.expansion_remainders(L, u)
        ratios.append((abs(r["r0"]) + abs(r["r"])) * u * (1 - u) * math.exp(L) / L)
    assert max(ratios) < 5.0


def test_l3_expansion_with_one_constant():
    ratios = []
    for c in random_domain_points(1, 1000, seed=9):
        b = pg.coords_to_boundary(c, 1)
        if b.l3 < 1.0:
            continue
        err = abs(b.l3 - pg.l3_expansion(c.L1, c.L2, c.u))
        ratios.append(err / ((c.L1 + c.L2) * math.exp(-b.l3 / 2)))
    assert len(ratios) > 500
    assert max(ratios) < 10.0


# ---------------------------------------------------------------- fill inequalities

def test_double_fill_examples():
    assert pg.double_fill_check(6.0, pg.fig8_length(BoundaryLengths(2, 2, 2)), "filling")
    assert pg.double_fill_check(0.0, pg.ELL0, "filling")
    big = BoundaryLengths(10, 10, 10)
    assert not pg.double_fill_check(big.total, pg.fig8_length(big), "double_filling")

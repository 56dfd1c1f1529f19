import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parabolica import Slice
from parabolica.coords import (BasinAddress, BoettcherMap, FatouChart, PolyMap, SectorMap,
                               extend_fatou_address, extrapolate_landing, fatou_attracting,
                               green_potential, invert_address_in_model, parameter_phi,
                               parameter_seeds, trace_dynamical_ray, trace_parameter_ray)
from parabolica.locus import model_chart


def test_polymap_validates_and_iterates():
    fm = PolyMap.cubic(1, 0.5)
    assert fm.degree == 3
    assert fm.iterate(0.1, 2) == pytest.approx(fm(fm(0.1)))
    assert all(abs(fm.deriv(c)) < 1e-12 for c in fm.critical_points())


@settings(max_examples=15, deadline=None)
@given(st.complex_numbers(max_magnitude=2.5), st.floats(0, 1, exclude_max=True))
def test_boettcher_functional_equation(a, t):
    bm = BoettcherMap(PolyMap.cubic(Slice(1, 3).lam, a))
    assert bm.residual(30 * cmath.exp(2j * math.pi * t)) < 1e-9


def test_boettcher_is_tangent_to_identity():
    a = 0.4 - 0.3j
    bm = BoettcherMap(PolyMap.cubic(-1, a))
    z = 1e4 * cmath.exp(0.7j)
    assert abs(bm(z) - (z + a / 3)) < 1e-2


def test_green_potential():
    sl = Slice(1, 1)
    assert green_potential(sl, 0.0, 0.0) == 0.0
    assert green_potential(sl, 1e4, 0.0) == pytest.approx(math.log(1e4), rel=1e-8)
    g = green_potential(sl, np.array([0.0, 5.0]), 0.0)
    assert g.shape == (2,) and g[0] == 0 and g[1] > 0


def test_real_ray_lands_at_parabolic_point():
    # z + z^3 keeps the positive axis and pushes it away from 0
    tr = trace_dynamical_ray(Slice(1, 1), 0.0, 0, 1e-8)
    assert tr.status == "Reached"
    assert abs(tr.points.imag).max() < 1e-9
    assert 0 < tr.endpoint.real < 0.3
    assert np.all(np.diff(tr.points.real) < 0)


def test_parameter_seeds_have_the_right_potential():
    sl = Slice(1, 2)
    for a in parameter_seeds(sl.lam, Fraction(1, 8), 6.0):
        assert abs(cmath.log(parameter_phi(sl, a)).real - 6.0) < 0.1


def test_parameter_ray_extrapolates_to_double_parabolic():
    tr = trace_parameter_ray(Slice(1, 2), Fraction(1, 8), 1e-200, sector=0)
    assert abs(tr.endpoint - 1j) < 0.1
    assert abs(extrapolate_landing(tr) - 1j) < 5e-3
    with pytest.raises(ValueError):
        extrapolate_landing(trace_parameter_ray(Slice(1, 2), Fraction(1, 8), 1e-3))


@pytest.mark.parametrize("pq,a", [((1, 1), 0.3), ((1, 2), 0.5 + 0.2j), ((1, 3), -0.4j)])
def test_abel_equation(pq, a):
    sl = Slice(*pq)
    chart = fatou_attracting(sl, a)
    for k in range(sl.q):
        for w in (0.5 + 0.3j, -1 - 0.2j, 2.0):
            z = chart.psi(w, k)
            assert chart.abel_residual(z) < 1e-6
            assert abs(chart(z) - w) < 1e-6


def test_chart_unavailable_at_double_parabolic():
    with pytest.raises(ValueError):
        FatouChart(PolyMap.cubic(-1, 1j), 2)


def test_fatou_value_shifts_by_one_over_q():
    sl = Slice(1, 3)
    chart = model_chart(sl.lam, sl.q)
    z = chart.psi(1.0 + 0.1j, 1)
    assert chart(chart.fmap(z)) == pytest.approx(chart(z) + 1 / 3, abs=1e-8)
    assert chart.label(chart.fmap(z)) == (chart.label(z) + sl.pp) % sl.q


def test_address_shift_rule():
    addr = BasinAddress((1, 0), (0, 1), 2, 0.25 + 0.5j)
    nxt = addr.shift(1, 3)
    assert nxt.sectors == (0,) and nxt.bits == (1,) and nxt.value == pytest.approx(0.25 + 0.5j + 1 / 3)
    assert addr.omega == Fraction(1, 4)
    assert BasinAddress((), (), 2, 0j).shift(1, 3).entry == 0


@pytest.mark.parametrize("pq", [(1, 1), (1, 2), (1, 3)])
def test_address_round_trip(pq):
    sl = Slice(*pq)
    chart = model_chart(sl.lam, sl.q)
    sectors = SectorMap.model(chart, sl.pp, sl.q)
    rng = np.random.default_rng(3)
    done = 0
    while done < 40:
        z = complex(*rng.uniform(-1.6, 1.6, 2)) - sl.lam / 2
        try:
            addr = extend_fatou_address(chart, sectors, z)
        except ValueError:
            continue
        assert abs(invert_address_in_model(chart, addr) - z) < 1e-8
        # the address of f(z) is the shifted address
        img = extend_fatou_address(chart, sectors, complex(chart.fmap(z)))
        if addr.depth:
            assert img.same(addr.shift(sl.pp, sl.q), tol=1e-7)
        done += 1


def test_non_basin_point_is_rejected():
    sl = Slice(1, 2)
    chart = model_chart(sl.lam, sl.q)
    with pytest.raises(ValueError):
        extend_fatou_address(chart, SectorMap.model(chart, 1, 2), 5.0)

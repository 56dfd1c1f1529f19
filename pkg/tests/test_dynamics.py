import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parabolica.dynamics import (DoubleParabolicError, Family, FamilyParam, Slice,
                                 classify_double_parabolic_type, convert_param, critical_points,
                                 df_a, double_parabolic_params, eval_family, parabolic_coefficient,
                                 return_series, sigma, wake_angles)

F = Fraction
nonzero = st.complex_numbers(min_magnitude=0.3, max_magnitude=3, allow_nan=False, allow_infinity=False)


def test_slice_parse_and_multiplier():
    sl = Slice.parse("2/5")
    assert (sl.p, sl.q) == (2, 5)
    assert abs(sl.lam - cmath.exp(4j * cmath.pi / 5)) < 1e-15
    assert Slice.parse("0/1").lam == 1
    with pytest.raises(ValueError):
        Slice(2, 4)


def test_nonzero_parameter_required():
    with pytest.raises(ValueError):
        FamilyParam(Family.G_C, 0)


@settings(max_examples=60, deadline=None)
@given(nonzero, st.complex_numbers(max_magnitude=1.5), st.sampled_from([(1, 1), (1, 2), (2, 5)]))
def test_conjugacies(s, z, pq):
    sl = Slice(*pq)
    k = sl.sqrt3_over_lam
    f = eval_family(sl, FamilyParam(Family.F_A, sigma(sl, s)), z)
    assert k * f == pytest.approx(eval_family(sl, FamilyParam(Family.GHAT_S, s), k * z), abs=1e-10)
    c = s * s
    g = eval_family(sl, FamilyParam(Family.G_C, c), c * z) / c
    assert g == pytest.approx(eval_family(sl, FamilyParam(Family.G_C, 1 / c), z), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(nonzero, st.sampled_from([1, -1]))
def test_convert_round_trip(s, branch):
    sl = Slice(1, 3)
    c = convert_param(FamilyParam(Family.GHAT_S, s), Family.G_C, sl)
    back = convert_param(c, Family.GHAT_S, sl, branch=branch)
    assert back.value * back.value == pytest.approx(c.value, rel=1e-12)
    a = convert_param(back, Family.F_A, sl)
    again = convert_param(a, Family.GHAT_S, sl, branch=branch)
    assert sigma(sl, again.value) == pytest.approx(a.value, abs=1e-9)


def test_convert_needs_branch():
    with pytest.raises(ValueError):
        convert_param(FamilyParam(Family.G_C, 2), Family.F_A, Slice(1, 1))


@settings(max_examples=40, deadline=None)
@given(st.complex_numbers(max_magnitude=4))
def test_critical_points_are_critical(a):
    sl = Slice(1, 2)
    cd = critical_points(sl, a)
    for c in (cd.c_plus, cd.c_minus):
        assert abs(df_a(sl.lam, a, c)) < 1e-9 * (1 + abs(a) ** 2)


def test_critical_branch_at_large_parameter():
    # along the positive axis c_+ is the point that tends to 0
    cd = critical_points(Slice(1, 1), 50.0)
    assert abs(cd.c_plus) < 0.05 < abs(cd.c_minus)


def test_return_series_one_half():
    # f o f(z) = z - 2 (1 + a^2) z^3 + ... for lam = -1
    for a in (0.3, 1j, 0.5 - 0.2j):
        g = return_series(Slice(1, 2), a, 4)
        assert g[1] == pytest.approx(1)
        assert abs(g[2]) < 1e-14
        assert g[3] == pytest.approx(-2 * (1 + a * a))


def test_parabolic_coefficient_small_slices():
    A = parabolic_coefficient(Slice(1, 1))
    assert A.degree == 1 and A(0.7) == pytest.approx(0.7)
    C = parabolic_coefficient(Slice(1, 1), Family.G_C)
    assert C.degree == 1 and C(2.0) == pytest.approx(-0.75) and abs(C(-1.0)) < 1e-14


@pytest.mark.parametrize("pq", [(1, 2), (1, 3), (2, 3), (1, 4), (2, 5), (1, 6)])
def test_coefficient_degree_is_q(pq):
    sl = Slice(*pq)
    assert parabolic_coefficient(sl, Family.G_C).degree == sl.q
    assert parabolic_coefficient(sl).degree == sl.q


def test_one_half_double_parabolics():
    dp = double_parabolic_params(Slice(1, 2))
    by_type = {d.type_m: d for d in dp.params}
    assert by_type[0].a == pytest.approx(1j)
    assert by_type[1].a == pytest.approx(-1j)
    assert by_type[0].wake_angles == (F(1, 8), F(3, 8), F(1, 4), F(1, 4))
    assert by_type[1].wake_angles == (F(3, 4), F(3, 4), F(5, 8), F(7, 8))


def test_one_third_wake_at_origin():
    dp = double_parabolic_params(Slice(1, 3))
    (mid,) = [d for d in dp.params if abs(d.a) < 1e-8]
    assert mid.type_m == 1
    assert mid.wake_angles == (F(3, 13), F(9, 13), F(5, 26), F(19, 26))


@pytest.mark.parametrize("pq", [(1, 3), (2, 3), (1, 4), (3, 4)])
def test_types_are_a_permutation(pq):
    sl = Slice(*pq)
    dp = double_parabolic_params(sl)
    assert sorted(d.type_m for d in dp.params) == list(range(sl.q))
    for d in dp.params:
        assert d.wake_angles == wake_angles(sl, d.type_m)


def test_negation_swaps_types():
    # f_{-a}(z) = -f_a(-z), so the type m parameter goes to type q-1-m
    sl = Slice(1, 4)
    dp = double_parabolic_params(sl)
    for d in dp.params:
        assert classify_double_parabolic_type(sl, -d.a) == sl.q - 1 - d.type_m


def test_classify_rejects_ordinary_parameter():
    with pytest.raises(DoubleParabolicError):
        classify_double_parabolic_type(Slice(1, 2), 0.5 + 0.5j)


def test_cross_check_small():
    assert double_parabolic_params(Slice(2, 5), classify=False).cross_check < 1e-7
    assert len(np.unique(np.round(double_parabolic_params(Slice(2, 5), classify=False).values, 6))) == 5

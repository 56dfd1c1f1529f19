from fractions import Fraction
from math import comb, gcd

import pytest
from hypothesis import given, strategies as st

from parabolica.angles import (Preperiodic, RotationCycle, angle, angle_preimages, cycle_at_position,
                               doubling_cycle, enumerate_cycles, orbit_under_mul, reflect_cycle, theta_m)


@st.composite
def rotations(draw, qmax=7):
    q = draw(st.integers(2, qmax))
    p = draw(st.integers(1, q - 1).filter(lambda p: gcd(p, q) == 1))
    return p, q


def test_angle_reduces_mod_one():
    assert angle(Fraction(7, 4)) == Fraction(3, 4)
    assert angle(-Fraction(1, 3)) == Fraction(2, 3)
    assert angle(1) == 0


def test_doubling_cycle_one_third():
    assert doubling_cycle(1, 2).as_set() == {Fraction(1, 3), Fraction(2, 3)}
    assert doubling_cycle(1, 3).as_set() == {Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)}


@given(rotations())
def test_tripling_cycle_count(pq):
    p, q = pq
    assert len(enumerate_cycles(3, p, q)) == comb(q + 1, q)


@given(rotations())
def test_cycles_are_periodic_with_rotation(pq):
    p, q = pq
    for c in enumerate_cycles(3, p, q):
        assert c.rotation == Fraction(p, q)
        assert orbit_under_mul(c.angles[0], 3) == c
        assert sum(c.gaps) == 1


@given(rotations())
def test_reflection_reverses_rotation(pq):
    p, q = pq
    for c in enumerate_cycles(3, p, q):
        r = reflect_cycle(c)
        assert r.rotation == 1 - Fraction(p, q)
        assert reflect_cycle(r) == c


@given(rotations())
def test_theta_cycles_exhaust_the_enumeration(pq):
    p, q = pq
    thetas = {theta_m(p, q, m) for m in range(q + 1)}
    assert len(thetas) == q + 1
    assert thetas == set(enumerate_cycles(3, p, q))


@given(rotations())
def test_half_turn_exchanges_theta_m(pq):
    # t -> t + 1/2 commutes with tripling and sends the m-th cycle to the (q-m)-th
    p, q = pq
    for m in range(q + 1):
        assert theta_m(p, q, m).shifted(Fraction(1, 2)) == theta_m(p, q, q - m)


def test_theta_examples_one_half():
    assert theta_m(1, 2, 0).as_set() == {Fraction(1, 8), Fraction(3, 8)}
    assert theta_m(1, 2, 1).as_set() == {Fraction(1, 4), Fraction(3, 4)}
    assert theta_m(1, 2, 2).as_set() == {Fraction(5, 8), Fraction(7, 8)}


def test_first_gap_closed_form():
    for q in range(2, 7):
        scale = Fraction(3**q, 3**q - 1)
        assert theta_m(1, q, 0).gaps[0] == scale * Fraction(2, 3)
        for m in range(1, q):
            assert theta_m(1, q, m).gaps[0] == scale * (Fraction(1, 3 ** (m + 1)) + Fraction(1, 3))


def test_cycle_at_position_matches_theta_for_p_one():
    for q in range(2, 6):
        for k in range(q + 1):
            assert cycle_at_position(1, q, k) == theta_m(1, q, k)


def test_preperiodic_angle():
    out = orbit_under_mul(Fraction(1, 6), 3)
    assert isinstance(out, Preperiodic)
    assert out.tail == 1
    assert out.cycle.angles == (Fraction(1, 2),)


def test_preimages():
    pre = angle_preimages(Fraction(1, 2), 3)
    assert pre == [Fraction(1, 6), Fraction(1, 2), Fraction(5, 6)]
    assert all(angle(3 * t) == Fraction(1, 2) for t in pre)
    assert len(angle_preimages(0, 3, depth=2)) == 9


def test_bad_inputs():
    with pytest.raises(ValueError):
        orbit_under_mul(Fraction(1, 3), 1)
    with pytest.raises(ValueError):
        angle_preimages(0, 3, depth=0)


def test_json_lists_orbit_order():
    c = theta_m(1, 3, 0)
    js = c.to_json(m=0)
    assert js["q"] == 3 and js["m"] == 0
    assert len(js["angles"]) == 3
    assert isinstance(c, RotationCycle)

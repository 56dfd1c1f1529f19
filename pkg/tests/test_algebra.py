import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parabolica.algebra import (DensePolynomial, RootFindingError, SeriesError, TruncatedSeries,
                                poly_roots, series_compose, series_inverse, series_self_iterate)

small = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def test_compose_matches_direct_expansion():
    # (z + z^2) o (2z) = 2z + 4z^2
    f = TruncatedSeries([0, 1, 1], 4)
    g = TruncatedSeries([0, 2], 4)
    assert series_compose(f, g).allclose(TruncatedSeries([0, 2, 4], 4))


def test_compose_rejects_constant_term():
    with pytest.raises(SeriesError):
        series_compose(TruncatedSeries([0, 1], 3), TruncatedSeries([1, 1], 3))


def test_orders_must_agree():
    with pytest.raises(SeriesError):
        TruncatedSeries([0, 1], 3) + TruncatedSeries([0, 1], 4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1), min_size=3, max_size=6),
       small.filter(lambda w: abs(w) > 0.7))
def test_inverse_is_two_sided(tail, lead):
    f = TruncatedSeries([0, lead, *tail], 7)
    g = series_inverse(f)
    ident = TruncatedSeries.identity(7)
    assert series_compose(f, g).allclose(ident, rtol=1e-9)
    assert series_compose(g, f).allclose(ident, rtol=1e-9)


def test_self_iterate_of_parabolic_germ():
    # z + z^2 iterated n times has z^2 coefficient n
    f = TruncatedSeries([0, 1, 1], 5)
    for n in (1, 2, 5):
        assert series_self_iterate(f, n)[2] == pytest.approx(n)


@settings(max_examples=30, deadline=None)
@given(st.lists(small, min_size=1, max_size=3), st.floats(-1, 1), st.floats(-1, 1))
def test_series_evaluation_agrees_with_composition(tail, x, y):
    f = TruncatedSeries([0, 1, *tail], 4)
    g = TruncatedSeries([0, 0.5, 0.25], 4)
    z = 0.01 * complex(x, y)
    # truncation error is O(z^5)
    assert abs(series_compose(f, g)(z) - f(g(z))) < 1e-9


def test_dense_polynomial_trims_and_differentiates():
    p = DensePolynomial([1, 2, 3, 1e-20])
    assert p.degree == 2
    assert np.allclose(p.derivative().coeffs, [2, 6])
    assert (p * p).degree == 4


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=1, max_size=8, unique=True))
def test_roots_recover_from_roots(roots):
    spread = min((abs(a - b) for i, a in enumerate(roots) for b in roots[i + 1:]), default=1)
    if spread < 1e-2:
        return  # clustered roots are only determined to sqrt precision
    p = DensePolynomial.from_roots(roots)
    found = poly_roots(p)
    assert len(found) == len(roots)
    for r in roots:
        assert min(abs(r - z) for z in found) < 1e-7


def test_double_root_is_reported_twice():
    found = poly_roots(DensePolynomial.from_roots([1j, 1j, -2]), strict=False)
    # a residual of 1e-10 pins a double root only to about 1e-5
    assert sorted(abs(z - 1j) < 1e-4 for z in found) == [False, True, True]


def test_constant_polynomial_has_no_roots():
    with pytest.raises(ValueError):
        poly_roots(DensePolynomial([3]))


def test_strict_failure_carries_best_iterate():
    assert issubclass(RootFindingError, RuntimeError)

from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from zhufusion.formalcalc import (BivariateSeries, LaurentPoly, MonomialJKL, TruncationError,
                                  iota_expand, res, to_xy)
from zhufusion.selftest import long_division_xy, polynomial_xy


def test_res_examples():
    x = LaurentPoly.monomial(1)
    assert res(LaurentPoly.monomial(-1)) == 1
    assert res(LaurentPoly.monomial(2)) == 0
    # (1+x)^2 x^-2 = x^-2 + 2x^-1 + 1
    f = (LaurentPoly({0: 1, 1: 1}) ** 2) * LaurentPoly.monomial(-2)
    assert f.terms == {-2: 1, -1: 2, 0: 1}
    assert res(f) == 2
    assert res(x) == 0


laurent = st.dictionaries(st.integers(-5, 5), st.fractions(max_denominator=5), max_size=5).map(LaurentPoly)


@given(laurent, laurent, st.fractions(max_denominator=5))
def test_res_is_linear(f, g, s):
    assert res(f + g * s) == res(f) + s * res(g)


def test_variable_mismatch_refused():
    with pytest.raises(ValueError):
        LaurentPoly.monomial(1, var="x") + LaurentPoly.monomial(1, var="y")


WINDOW = ((-20, 0), (0, 19))


def test_inverse_difference_x_then_y():
    got = iota_expand(MonomialJKL(0, 0, -1), "x,y", WINDOW)
    assert dict(got.terms) == long_division_xy(-1, WINDOW)
    assert all(c == 1 for c in got.terms.values())
    assert got.coefficient(-1, 0) == 1 and got.coefficient(-20, 19) == 1


def test_inverse_difference_y_then_x():
    got = iota_expand(MonomialJKL(0, 0, -1), "y,x", ((0, 19), (-20, 0)))
    assert dict(got.terms) == {(i, -1 - i): F(-1) for i in range(20)}


def test_square_any_direction():
    expected = {(2, 0): 1, (1, 1): -2, (0, 2): 1}
    w = ((-3, 3), (-3, 3))
    assert dict(iota_expand(MonomialJKL(0, 0, 2), "x,y", w).terms) == expected
    assert dict(iota_expand(MonomialJKL(0, 0, 2), "y,x", w).terms) == expected
    assert to_xy(iota_expand(MonomialJKL(0, 0, 2), "x,y-x", ((-3, 3), (0, 3)))) == expected


@pytest.mark.parametrize("j,k,l", [(j, k, l) for j in range(-3, 4) for k in range(0, 4) for l in range(4)])
def test_polynomial_case_direction_independent(j, k, l):
    w = ((-10, 10), (-10, 10))
    target = polynomial_xy(j, k, l)
    assert dict(iota_expand(MonomialJKL(j, k, l), "x,y", w).terms) == target
    assert dict(iota_expand(MonomialJKL(j, k, l), "y,x", w).terms) == target
    assert to_xy(iota_expand(MonomialJKL(j, k, l), "x,y-x", ((-10, 10), (0, 10)))) == target


def test_injective_on_negative_l():
    w = ((-15, 15), (-15, 15))
    seen = {}
    for j in range(-2, 3):
        for k in range(-2, 3):
            for l in range(-3, 0):
                for d in ("x,y", "y,x"):
                    key = (d, tuple(sorted(iota_expand(MonomialJKL(j, k, l), d, w).terms.items())))
                    assert key not in seen, (j, k, l, seen.get(key))
                    seen[key] = (j, k, l)


@pytest.mark.parametrize("direction", ["x,y", "y,x", "x,y-x"])
def test_multiplicative(direction):
    # expand the factors on a wider window, multiply, then cut to the target window
    wide = ((-40, 40), (-40, 40))
    small = ((-8, 8), (-8, 8))
    cases = [((1, 0, -1), (0, 2, -2)), ((-1, 1, -2), (2, -1, 1)), ((0, 0, 3), (1, 1, -1))]
    if direction == "x,y-x":
        cases = [((1, 0, -1), (0, 2, -2)), ((0, 2, 1), (-1, 1, -3))]
    for a, b in cases:
        A, B = MonomialJKL(*a), MonomialJKL(*b)
        prod = (iota_expand(A, direction, wide) * iota_expand(B, direction, wide)).restrict(small)
        assert prod == iota_expand(A * B, direction, small)


def test_window_errors():
    with pytest.raises(TruncationError):
        iota_expand(MonomialJKL(0, 0, -1), "x,y", ((0, -1), (0, 3)))
    a = iota_expand(MonomialJKL(0, 0, -1), "x,y", ((-5, 0), (0, 5)))
    b = iota_expand(MonomialJKL(0, 0, -1), "x,y", ((-6, 0), (0, 5)))
    with pytest.raises(TruncationError):
        a + b
    with pytest.raises(TruncationError):
        a.coefficient(3, 0)
    with pytest.raises(ValueError):
        iota_expand(MonomialJKL(0, 0, 1), "sideways", ((0, 1), (0, 1)))
    with pytest.raises(TruncationError):
        BivariateSeries({(9, 0): F(1)}, ((0, 1), (0, 1)))


def test_series_json_round_trip():
    s = iota_expand(MonomialJKL(1, -1, -2), "x,y-x", ((-10, 5), (-3, 6)))
    assert BivariateSeries.from_json(s.to_json()) == s

"""Laurent polynomials, residues and the two-variable expansion maps.

A rational function x^j y^k (x - y)^l has three standard expansions: in
nonnegative powers of y (``"x,y"``), in nonnegative powers of x
(``"y,x"``), and in nonnegative powers of y - x (``"x,y-x"``).  Infinite
expansions are carried as :class:`BivariateSeries` restricted to an explicit
rectangular exponent window; series with different windows are never
combined implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping, Tuple

from .exactla import binomial, rational_str, to_rational

DIRECTIONS = ("x,y", "y,x", "x,y-x")
# second-variable name carried by the output of each direction
_SECOND = {"x,y": "y", "y,x": "y", "x,y-x": "y-x"}


class TruncationError(ValueError):
    """Raised when a window cannot hold the requested expansion."""


def _clean(terms) -> Dict:
    return {e: Fraction(c) for e, c in terms.items() if c}


@dataclass(frozen=True)
class LaurentPoly:
    terms: Mapping[int, Fraction] = field(default_factory=dict)
    var: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean(self.terms))

    @classmethod
    def monomial(cls, exp: int, coeff=1, var: str = "x") -> "LaurentPoly":
        return cls({exp: Fraction(coeff)}, var)

    def _check(self, other: "LaurentPoly"):
        if self.var != other.var:
            raise ValueError("variable mismatch: %s vs %s" % (self.var, other.var))

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out, self.var)

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.terms.items()}, self.var)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            self._check(other)
            out: Dict[int, Fraction] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
            return LaurentPoly(out, self.var)
        s = Fraction(other)
        return LaurentPoly({e: s * c for e, c in self.terms.items()}, self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            raise ValueError("only nonnegative powers of a Laurent polynomial")
        out = LaurentPoly({0: Fraction(1)}, self.var)
        for _ in range(n):
            out = out * self
        return out


def res(f: LaurentPoly) -> Fraction:
    """Coefficient of the (-1)-st power."""
    return f.terms.get(-1, Fraction(0))


Window = Tuple[Tuple[int, int], Tuple[int, int]]


@dataclass(frozen=True)
class BivariateSeries:
    """Finite piece of a two-variable series inside ``window``.

    ``terms`` maps (first exponent, second exponent) to coefficients; the
    first variable is x, the second is named by ``second`` ("y" or "y-x").
    """

    terms: Mapping[Tuple[int, int], Fraction]
    window: Window
    second: str = "y"

    def __post_init__(self):
        (xlo, xhi), (ylo, yhi) = self.window
        if xlo > xhi or ylo > yhi:
            raise TruncationError("empty window %r" % (self.window,))
        clean = _clean(self.terms)
        for (a, b) in clean:
            if not (xlo <= a <= xhi and ylo <= b <= yhi):
                raise TruncationError("term x^%d %s^%d outside window %r" % (a, self.second, b, self.window))
        object.__setattr__(self, "terms", clean)

    def _check(self, other: "BivariateSeries"):
        if self.window != other.window or self.second != other.second:
            raise TruncationError("incompatible series: %r/%s vs %r/%s"
                                  % (self.window, self.second, other.window, other.second))

    def __add__(self, other: "BivariateSeries") -> "BivariateSeries":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return BivariateSeries(out, self.window, self.second)

    def __mul__(self, other: "BivariateSeries") -> "BivariateSeries":
        """Product restricted to the shared window.

        Exactness of the restricted product is the caller's business: the
        factors must have been expanded in a window wide enough that every
        contributing pair of terms was kept.
        """
        self._check(other)
        out: Dict[Tuple[int, int], Fraction] = {}
        (xlo, xhi), (ylo, yhi) = self.window
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                a, b = a1 + a2, b1 + b2
                if xlo <= a <= xhi and ylo <= b <= yhi:
                    out[(a, b)] = out.get((a, b), 0) + c1 * c2
        return BivariateSeries(out, self.window, self.second)

    def restrict(self, window: Window) -> "BivariateSeries":
        (xlo, xhi), (ylo, yhi) = window
        kept = {(a, b): c for (a, b), c in self.terms.items()
                if xlo <= a <= xhi and ylo <= b <= yhi}
        return BivariateSeries(kept, window, self.second)

    def coefficient(self, a: int, b: int) -> Fraction:
        (xlo, xhi), (ylo, yhi) = self.window
        if not (xlo <= a <= xhi and ylo <= b <= yhi):
            raise TruncationError("x^%d %s^%d is outside the window" % (a, self.second, b))
        return self.terms.get((a, b), Fraction(0))

    def to_json(self):
        return {
            "second": self.second,
            "window": [list(self.window[0]), list(self.window[1])],
            "terms": [[a, b, rational_str(c)] for (a, b), c in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, data) -> "BivariateSeries":
        window = (tuple(data["window"][0]), tuple(data["window"][1]))
        terms = {(int(a), int(b)): to_rational(c) for a, b, c in data["terms"]}
        return cls(terms, window, data.get("second", "y"))


@dataclass(frozen=True)
class MonomialJKL:
    """The rational function x^j y^k (x - y)^l."""

    j: int
    k: int
    l: int

    def __mul__(self, other: "MonomialJKL") -> "MonomialJKL":
        return MonomialJKL(self.j + other.j, self.k + other.k, self.l + other.l)


def _expansion_terms(m: MonomialJKL, direction: str, i: int):
    """The i-th term (exponents, coefficient) of the chosen expansion."""
    j, k, l = m.j, m.k, m.l
    if direction == "x,y":
        return (j + l - i, k + i), binomial(l, i) * (-1) ** i
    if direction == "y,x":
        return (j + i, k + l - i), binomial(l, i) * (-1) ** ((l - i) % 2)
    if direction == "x,y-x":
        return (j + k - i, l + i), binomial(k, i) * (-1) ** (l % 2)
    raise ValueError("unknown direction %r; expected one of %s" % (direction, DIRECTIONS))


def iota_expand(m: MonomialJKL, direction: str, window: Window) -> BivariateSeries:
    """Expansion of x^j y^k (x-y)^l in ``direction``, cut to ``window``."""
    if direction not in DIRECTIONS:
        raise ValueError("unknown direction %r; expected one of %s" % (direction, DIRECTIONS))
    (xlo, xhi), (ylo, yhi) = window
    if xlo > xhi or ylo > yhi:
        raise TruncationError("empty window %r" % (window,))
    # The expanding exponent moves monotonically with i; stop once it leaves
    # the window on the far side.
    top = m.k if direction == "x,y-x" else m.l
    terms: Dict[Tuple[int, int], Fraction] = {}
    i = 0
    while True:
        if top >= 0 and i > top:
            break
        (a, b), coeff = _expansion_terms(m, direction, i)
        if direction == "x,y" and (b > yhi or a < xlo):
            break
        if direction == "y,x" and (a > xhi or b < ylo):
            break
        if direction == "x,y-x" and (b > yhi or a < xlo):
            break
        if coeff and xlo <= a <= xhi and ylo <= b <= yhi:
            terms[(a, b)] = coeff
        i += 1
    return BivariateSeries(terms, window, _SECOND[direction])


def to_xy(series: BivariateSeries) -> Dict[Tuple[int, int], Fraction]:
    """Rewrite a finite series in x and y - x as a Laurent polynomial in x, y.

    Only defined when every (y - x)-exponent is nonnegative.
    """
    if series.second == "y":
        return dict(series.terms)
    out: Dict[Tuple[int, int], Fraction] = {}
    for (a, b), c in series.terms.items():
        if b < 0:
            raise TruncationError("negative power of y-x has no finite x,y form")
        # (y - x)^b = sum_s binom(b, s) y^s (-x)^(b-s)
        for s in range(b + 1):
            key = (a + b - s, s)
            out[key] = out.get(key, 0) + c * binomial(b, s) * (-1) ** ((b - s) % 2)
    return {e: c for e, c in out.items() if c}

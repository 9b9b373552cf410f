"""Exact rational arithmetic and sparse linear algebra over Q.

Everything here works on :class:`fractions.Fraction`.  Sparse rows are plain
``dict`` objects mapping a column index to a nonzero ``Fraction``; dense
vectors and matrices are tuples/lists of ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

Rational = Fraction
SparseRow = Dict[int, Fraction]


def to_rational(value) -> Fraction:
    """Parse ``"p/q"`` strings, ints and Fractions exactly.  Floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, float):
        raise TypeError("refusing binary float %r; pass a 'p/q' string" % (value,))
    if isinstance(value, str):
        value = value.strip()
        if not value:
            raise ValueError("empty rational string")
    return Fraction(value)


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def binomial(l: int, i: int) -> Fraction:
    """Generalized binomial l(l-1)...(l-i+1)/i! for integer l and natural i."""
    if i < 0:
        raise ValueError("binomial lower index must be >= 0, got %d" % i)
    num = 1
    for s in range(i):
        num *= l - s
    return Fraction(num, factorial(i))


@dataclass(frozen=True)
class SparseMatrix:
    rows: int
    cols: int
    entries: Mapping[Tuple[int, int], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (r, c), val in self.entries.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise IndexError("entry (%d, %d) outside %dx%d" % (r, c, self.rows, self.cols))
            val = Fraction(val)
            if val:
                clean[(r, c)] = val
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_dense(cls, data: Sequence[Sequence]) -> "SparseMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        entries = {}
        for r, row in enumerate(data):
            if len(row) != ncols:
                raise ValueError("ragged dense matrix")
            for c, val in enumerate(row):
                if val:
                    entries[(r, c)] = Fraction(val)
        return cls(nrows, ncols, entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[int, Fraction]], cols: int) -> "SparseMatrix":
        entries = {}
        for r, row in enumerate(rows):
            for c, val in row.items():
                entries[(r, c)] = val
        return cls(len(rows), cols, entries)

    def row_dicts(self) -> List[SparseRow]:
        out: List[SparseRow] = [dict() for _ in range(self.rows)]
        for (r, c), val in self.entries.items():
            out[r][c] = val
        return out

    def to_dense(self) -> List[List[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (r, c), val in self.entries.items():
            out[r][c] = val
        return out

    def matvec(self, v: Sequence) -> Tuple[Fraction, ...]:
        if len(v) != self.cols:
            raise ValueError("vector length %d != %d columns" % (len(v), self.cols))
        out = [Fraction(0)] * self.rows
        for (r, c), val in self.entries.items():
            if v[c]:
                out[r] += val * v[c]
        return tuple(out)


def _axpy(target: SparseRow, scale: Fraction, source: Mapping[int, Fraction]) -> None:
    # target += scale * source, dropping cancelled entries
    for c, val in source.items():
        new = target.get(c, 0) + scale * val
        if new:
            target[c] = new
        else:
            target.pop(c, None)


class Echelon:
    """Incrementally maintained reduced row echelon form.

    Pivot rows are normalized (pivot entry 1) and never contain another
    pivot column, so reducing a vector takes a single pass over its
    pivot columns.
    """

    def __init__(self, cols: Optional[int] = None):
        self.cols = cols
        self.pivots: Dict[int, SparseRow] = {}
        self._occurs: Dict[int, set] = {}  # column -> pivots whose row holds it

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: Mapping[int, Fraction]) -> SparseRow:
        out = {c: Fraction(v) for c, v in row.items() if v}
        hits = [c for c in out if c in self.pivots]
        for c in hits:
            coef = out.get(c)
            if coef:
                _axpy(out, -coef, self.pivots[c])
        return out

    def add(self, row: Mapping[int, Fraction]) -> bool:
        """Insert a row; returns True when it raised the rank."""
        red = self.reduce(row)
        if not red:
            return False
        self._insert(red)
        return True

    def _insert(self, red: SparseRow) -> None:
        piv = min(red)
        inv = 1 / red[piv]
        red = {c: v * inv for c, v in red.items()}
        for other in list(self._occurs.get(piv, ())):
            orow = self.pivots[other]
            coef = orow[piv]
            for c in orow:
                if c != other:
                    self._occurs[c].discard(other)
            _axpy(orow, -coef, red)
            for c in orow:
                if c != other:
                    self._occurs.setdefault(c, set()).add(other)
        self._occurs.pop(piv, None)
        self.pivots[piv] = red
        for c in red:
            if c != piv:
                self._occurs.setdefault(c, set()).add(piv)

    def kernel_basis(self, cols: Optional[int] = None) -> List[Tuple[Fraction, ...]]:
        cols = self.cols if cols is None else cols
        if cols is None:
            raise ValueError("column count unknown")
        basis = []
        for f in range(cols):
            if f in self.pivots:
                continue
            vec = [Fraction(0)] * cols
            vec[f] = Fraction(1)
            for p in self._occurs.get(f, ()):
                vec[p] = -self.pivots[p][f]
            basis.append(tuple(vec))
        return basis


class NullspaceTracker:
    """Right null space of a growing set of rows.

    Rows go into an :class:`Echelon` until the nullity drops to
    ``switch_at``; from then on an explicit kernel basis is kept and each new
    row is tested by dot products against it, which is far cheaper when only
    a handful of kernel vectors remain.
    """

    def __init__(self, cols: int, switch_at: int = 32):
        self.cols = cols
        self.switch_at = switch_at
        self._ech: Optional[Echelon] = Echelon(cols)
        self._kernel: Optional[List[SparseRow]] = None
        if cols <= switch_at:
            self._to_kernel()

    @property
    def nullity(self) -> int:
        if self._kernel is not None:
            return len(self._kernel)
        return self.cols - self._ech.rank

    @property
    def rank(self) -> int:
        return self.cols - self.nullity

    def _to_kernel(self) -> None:
        basis = self._ech.kernel_basis(self.cols)
        self._kernel = [{c: v for c, v in enumerate(vec) if v} for vec in basis]
        self._ech = None

    def add(self, row: Mapping[int, Fraction]) -> bool:
        """Insert a row; returns True when it cut the null space."""
        if self._kernel is None:
            grew = self._ech.add(row)
            if grew and self.nullity <= self.switch_at:
                self._to_kernel()
            return grew
        dots = []
        for vec in self._kernel:
            dots.append(sum((val * vec[c] for c, val in row.items() if c in vec), Fraction(0)))
        live = [q for q, d in enumerate(dots) if d]
        if not live:
            return False
        p = min(live, key=lambda q: len(self._kernel[q]))
        kp, dp = self._kernel[p], dots[p]
        new = []
        for q, vec in enumerate(self._kernel):
            if q == p:
                continue
            if dots[q]:
                vec = dict(vec)
                _axpy(vec, -dots[q] / dp, kp)
            new.append(vec)
        self._kernel = new
        return True

    def kernel_basis(self) -> List[Tuple[Fraction, ...]]:
        if self._kernel is None:
            return self._ech.kernel_basis(self.cols)
        out = []
        for vec in self._kernel:
            dense = [Fraction(0)] * self.cols
            for c, v in vec.items():
                dense[c] = v
            out.append(tuple(dense))
        return out


def rank(M: SparseMatrix) -> int:
    ech = Echelon(M.cols)
    for row in M.row_dicts():
        ech.add(row)
    return ech.rank


def kernel_basis(M: SparseMatrix) -> List[Tuple[Fraction, ...]]:
    """Basis of the right null space {v : M v = 0}."""
    ech = Echelon(M.cols)
    for row in M.row_dicts():
        ech.add(row)
    return ech.kernel_basis(M.cols)


def span_membership(v: Sequence, gens: Sequence[Sequence]) -> Optional[Tuple[Fraction, ...]]:
    """Coefficients expressing ``v`` in the span of ``gens``, or None."""
    n = len(v)
    for g in gens:
        if len(g) != n:
            raise ValueError("generator length %d != %d" % (len(g), n))
    # Columns 0..n-1 carry the vector; n + k tracks generator k (negated).
    k = len(gens)
    ech = Echelon(n + k)
    for idx, g in enumerate(gens):
        row = {c: Fraction(x) for c, x in enumerate(g) if x}
        row[n + idx] = Fraction(-1)
        ech.add(row)
    red = ech.reduce({c: Fraction(x) for c, x in enumerate(v) if x})
    if any(c < n for c in red):
        return None
    coeffs = [Fraction(0)] * k
    for c, val in red.items():
        coeffs[c - n] = val
    return tuple(coeffs)


def bareiss_rank(dense: Sequence[Sequence]) -> int:
    """Rank by fraction-free (Bareiss) elimination over the integers.

    Rows are first cleared of denominators.  Kept deliberately separate from
    :class:`Echelon` so it can serve as an independent check.
    """
    from math import lcm

    mat = []
    for row in dense:
        row = [Fraction(x) for x in row]
        den = 1
        for x in row:
            den = lcm(den, x.denominator)
        mat.append([int(x * den) for x in row])
    if not mat:
        return 0
    nrows, ncols = len(mat), len(mat[0])
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        cand = [i for i in range(r, nrows) if mat[i][c] != 0]
        if not cand:
            continue
        p = min(cand, key=lambda i: abs(mat[i][c]))
        mat[r], mat[p] = mat[p], mat[r]
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                mat[i][j] = (mat[r][c] * mat[i][j] - mat[i][c] * mat[r][j]) // prev
            mat[i][c] = 0
        prev = mat[r][c]
        r += 1
    return r


class QuotientSolver:
    """Coordinates of vectors in span(reps) modulo span(relations).

    Raises ValueError at construction when the representatives are linearly
    dependent modulo the relations, so coordinates are always unique.
    """

    def __init__(self, relations: Iterable[Mapping[int, Fraction]],
                 reps: Sequence[Mapping[int, Fraction]], width: int):
        self.width = width
        self.nreps = len(reps)
        self._rel = Echelon(width)
        for row in relations:
            self._rel.add(row)
        # augmented rows: [rep reduced | -e_k]
        self._aug = Echelon(width + self.nreps)
        for k, rep in enumerate(reps):
            red = self._rel.reduce(rep)
            if not red:
                raise ValueError("representative %d lies in the relation span" % k)
            row = dict(red)
            row[width + k] = Fraction(-1)
            self._aug.add(row)
            if self._rank_head() != k + 1:
                raise ValueError("representatives are dependent modulo relations (at %d)" % k)

    def _rank_head(self) -> int:
        return sum(1 for p in self._aug.pivots if p < self.width)

    def coordinates(self, vec: Mapping[int, Fraction]) -> Optional[Tuple[Fraction, ...]]:
        red = self._aug.reduce(self._rel.reduce(vec))
        if any(c < self.width for c in red):
            return None
        coeffs = [Fraction(0)] * self.nreps
        for c, val in red.items():
            coeffs[c - self.width] = val
        return tuple(coeffs)

    def in_relations(self, vec: Mapping[int, Fraction]) -> bool:
        return not self._rel.reduce(vec)


# --- dense helpers -----------------------------------------------------------

Matrix = List[List[Fraction]]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> Matrix:
    return [[Fraction(0)] * c for _ in range(r)]


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    if not A:
        return []
    inner = len(B)
    if len(A[0]) != inner:
        raise ValueError("shape mismatch %dx%d * %dx?" % (len(A), len(A[0]), inner))
    cols = len(B[0]) if inner else 0
    out = zeros(len(A), cols)
    for i, arow in enumerate(A):
        orow = out[i]
        for k, a in enumerate(arow):
            if a:
                brow = B[k]
                for j in range(cols):
                    if brow[j]:
                        orow[j] += a * brow[j]
    return out


def mat_add(A, B) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(s, A) -> Matrix:
    s = Fraction(s)
    return [[s * a for a in row] for row in A]


def mat_vec(A, v) -> Tuple[Fraction, ...]:
    return tuple(sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A)


def mat_pow(A, k: int) -> Matrix:
    out = identity(len(A))
    for _ in range(k):
        out = mat_mul(out, A)
    return out


def is_zero_matrix(A) -> bool:
    return all(not x for row in A for x in row)


def poly_at_matrix(coeffs: Mapping[int, Fraction], T: Sequence[Sequence]) -> Matrix:
    """Evaluate sum_m c_m T^m by Horner's rule."""
    n = len(T)
    top = max(coeffs, default=0)
    out = zeros(n, n)
    for m in range(top, -1, -1):
        out = mat_mul(out, T)
        c = coeffs.get(m, 0)
        if c:
            for i in range(n):
                out[i][i] += c
    return out

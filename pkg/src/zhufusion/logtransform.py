"""Logarithmic <-> Z-graded intertwining data on finite graded operator data.

Each module is described only by its L(0) matrices per degree d, whose
single eigenvalue must be lambda + d.  Writing L(0) = S + N with S scalar on
each degree piece, x^{L(0)} = x^S exp(N log x), and the log components of

    I(u, x) = x^{L(0)} Phi(x^{-L(0)} u, x) x^{-L(0)} v

are, mode by mode,

    J^(r)(u; i) = sum_{a+b+c=r} N3^a Phi((-N1)^b u; i) (-N2)^c / (a! b! c!)

multiplying x^{s - i - 1} (log x)^r with s = lambda3 - lambda1 - lambda2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .exactla import (identity, is_zero_matrix, mat_add, mat_mul, mat_pow, mat_scale,
                      mat_vec, rational_str, to_rational, zeros)

Matrix = List[List[Fraction]]
BlockKey = Tuple[int, int, int]  # (deg u, deg v, mode index k)


def _frac_matrix(rows) -> Matrix:
    return [[to_rational(x) if isinstance(x, str) else Fraction(x) for x in r] for r in rows]


def nilpotency_index(N: Sequence[Sequence]) -> int:
    """Smallest k >= 0 with N^k = 0 (0 only for the empty matrix); raises if N is not nilpotent."""
    n = len(N)
    if n == 0:
        return 0
    P = identity(n)
    for k in range(1, n + 1):
        P = mat_mul(P, N)
        if is_zero_matrix(P):
            return k
    raise ValueError("matrix is not nilpotent")


@dataclass(frozen=True)
class GradedOperatorData:
    """L(0) per degree together with its split S + N; S = (lam + d) on degree d."""

    lam: Fraction
    L0: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    S: Tuple = field(init=False)
    N: Tuple = field(init=False)
    nu: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        lam = to_rational(self.lam) if isinstance(self.lam, str) else Fraction(self.lam)
        L0 = tuple(tuple(tuple(r) for r in _frac_matrix(M)) for M in self.L0)
        S, N, nu = [], [], []
        for d, M in enumerate(L0):
            n = len(M)
            if any(len(r) != n for r in M):
                raise ValueError("L(0) at degree %d is not square" % d)
            s = identity(n)
            s = mat_scale(lam + d, s)
            nd = mat_add([list(r) for r in M], mat_scale(-1, s))
            try:
                k = nilpotency_index(nd)
            except ValueError:
                raise ValueError("L(0) at degree %d has an eigenvalue other than %s"
                                 % (d, rational_str(lam + d))) from None
            S.append(tuple(tuple(r) for r in s))
            N.append(tuple(tuple(r) for r in nd))
            nu.append(k)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "L0", L0)
        object.__setattr__(self, "S", tuple(S))
        object.__setattr__(self, "N", tuple(N))
        object.__setattr__(self, "nu", tuple(nu))

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(len(M) for M in self.L0)

    @property
    def depth(self) -> int:
        return len(self.L0) - 1

    @property
    def max_nilpotency(self) -> int:
        return max(self.nu, default=0)

    def n_matrix(self, d: int) -> Matrix:
        return [list(r) for r in self.N[d]]

    def to_json(self):
        return {"lambda": rational_str(self.lam),
                "L0": [[[rational_str(x) for x in r] for r in M] for M in self.L0]}

    @classmethod
    def from_json(cls, data) -> "GradedOperatorData":
        return cls(to_rational(str(data["lambda"])), tuple(tuple(tuple(r) for r in M) for M in data["L0"]))


def jordan_split(L0: Sequence[Sequence[Sequence]], lam) -> GradedOperatorData:
    return GradedOperatorData(lam, tuple(tuple(tuple(r) for r in M) for M in L0))


# --- log series -------------------------------------------------------------------------

@dataclass(frozen=True)
class LogSeries:
    """sum x^{offset + p} (log x)^k vec over finitely many (p, k)."""

    offset: Fraction
    terms: Mapping[Tuple[int, int], Tuple[Fraction, ...]]

    def __post_init__(self):
        clean = {}
        for (p, k), vec in self.terms.items():
            if k < 0:
                raise ValueError("negative log-degree")
            vec = tuple(Fraction(x) for x in vec)
            if any(vec):
                clean[(p, k)] = vec
        object.__setattr__(self, "offset", Fraction(self.offset))
        object.__setattr__(self, "terms", clean)

    @property
    def log_degree(self) -> int:
        return max((k for _, k in self.terms), default=-1)

    def x_ddx(self) -> "LogSeries":
        """x d/dx: x^a (log x)^k -> a x^a (log x)^k + k x^a (log x)^{k-1}."""
        out: Dict[Tuple[int, int], List[Fraction]] = {}

        def acc(key, scale, vec):
            cur = out.setdefault(key, [Fraction(0)] * len(vec))
            for i, x in enumerate(vec):
                cur[i] += scale * x

        for (p, k), vec in self.terms.items():
            acc((p, k), self.offset + p, vec)
            if k:
                acc((p, k - 1), Fraction(k), vec)
        return LogSeries(self.offset, {key: tuple(v) for key, v in out.items()})


def x_pow_l0(g: GradedOperatorData, sign: int, v: Sequence, d: int) -> LogSeries:
    """x^{+-L(0)} v = x^{+-(lam + d)} sum_i (+-N)^i (log x)^i / i! v for v in degree d."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    vec = tuple(Fraction(x) for x in v)
    if len(vec) != g.dims[d]:
        raise ValueError("vector length %d != dim %d at degree %d" % (len(vec), g.dims[d], d))
    N = mat_scale(sign, g.n_matrix(d))
    terms = {}
    cur = vec
    for i in range(max(g.nu[d], 1)):
        terms[(sign * d, i)] = tuple(x / factorial(i) for x in cur)
        cur = mat_vec(N, cur)
    return LogSeries(sign * g.lam, terms)


def l0_apply(g: GradedOperatorData, v: Sequence, d: int) -> Tuple[Fraction, ...]:
    return mat_vec(g.L0[d], v)


# --- mode families on abstract data --------------------------------------------------

@dataclass(frozen=True)
class BlockFamily:
    """Phi(u; k) for each basis vector u of W1(i), as matrices W2(j) -> W3(i+j-k-1).

    ``blocks[(i, j, k)]`` is a tuple indexed by the W1(i) basis; each entry is
    a dim3 x dim2 matrix.  Missing blocks are zero.
    """

    dims1: Tuple[int, ...]
    dims2: Tuple[int, ...]
    dims3: Tuple[int, ...]
    blocks: Mapping[BlockKey, Tuple] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j, k), mats in self.blocks.items():
            t = i + j - k - 1
            if not (0 <= i < len(self.dims1) and 0 <= j < len(self.dims2) and 0 <= t < len(self.dims3)):
                raise ValueError("block %r outside the window" % ((i, j, k),))
            mats = tuple(tuple(tuple(r) for r in _frac_matrix(M)) for M in mats)
            if len(mats) != self.dims1[i] or any(
                    len(M) != self.dims3[t] or any(len(r) != self.dims2[j] for r in M) for M in mats):
                raise ValueError("block %r has the wrong shape" % ((i, j, k),))
            if any(x for M in mats for r in M for x in r):
                clean[(i, j, k)] = mats
        object.__setattr__(self, "dims1", tuple(self.dims1))
        object.__setattr__(self, "dims2", tuple(self.dims2))
        object.__setattr__(self, "dims3", tuple(self.dims3))
        object.__setattr__(self, "blocks", clean)

    def keys(self):
        """Every in-window block key."""
        for i in range(len(self.dims1)):
            for j in range(len(self.dims2)):
                for t in range(len(self.dims3)):
                    yield (i, j, i + j - t - 1)

    def get(self, i: int, j: int, k: int, p: int) -> Matrix:
        t = i + j - k - 1
        mats = self.blocks.get((i, j, k))
        if mats is None:
            return zeros(self.dims3[t], self.dims2[j])
        return [list(r) for r in mats[p]]

    def zero_like(self) -> "BlockFamily":
        return BlockFamily(self.dims1, self.dims2, self.dims3, {})

    def to_json(self):
        return {"dims": [list(self.dims1), list(self.dims2), list(self.dims3)],
                "blocks": [[i, j, k, [[[rational_str(x) for x in r] for r in M] for M in mats]]
                           for (i, j, k), mats in sorted(self.blocks.items())]}

    @classmethod
    def from_json(cls, data) -> "BlockFamily":
        d1, d2, d3 = (tuple(x) for x in data["dims"])
        blocks = {(int(i), int(j), int(k)): tuple(_frac_matrix(M) for M in mats)
                  for i, j, k, mats in data.get("blocks", [])}
        return cls(d1, d2, d3, blocks)


def blocks_from_mode_family(phi) -> BlockFamily:
    """Convert an intertwine.TruncatedModeFamily to block form in the PBW bases."""
    from . import virasoro as vir

    kind, D = phi.kind, phi.depth
    dims = tuple(len(vir.basis_at_degree(kind.W1, d)) for d in range(D + 1))
    blocks = {}
    for i in range(D + 1):
        for j in range(D + 1):
            for t in range(D + 1):
                k = i + j - t - 1
                mats = tuple(phi.block(u, j, k) for u in vir.basis_at_degree(kind.W1, i))
                blocks[(i, j, k)] = mats
    return BlockFamily(dims, dims, dims, blocks)


@dataclass(frozen=True)
class LogModeFamily:
    """Components J^(0..r) and the exponent shift s = lam3 - lam1 - lam2."""

    shift: Fraction
    components: Tuple[BlockFamily, ...]

    @property
    def log_degree(self) -> int:
        """Largest r with J^(r) != 0, or -1 for the zero family."""
        return max((r for r, comp in enumerate(self.components) if comp.blocks), default=-1)


def _check_dims(phi: BlockFamily, g1, g2, g3):
    for name, have, g in (("W1", phi.dims1, g1), ("W2", phi.dims2, g2), ("W3", phi.dims3, g3)):
        if tuple(have) != g.dims:
            raise ValueError("%s dimensions %r do not match the L(0) data %r" % (name, have, g.dims))


def log_degree_bound(g1: GradedOperatorData, g2: GradedOperatorData, g3: GradedOperatorData) -> int:
    """sum of (nu_i - 1): J^(r) vanishes for every r above this."""
    return sum(max(g.max_nilpotency - 1, 0) for g in (g1, g2, g3))


def from_z_graded(phi: BlockFamily, g1: GradedOperatorData, g2: GradedOperatorData,
                  g3: GradedOperatorData) -> LogModeFamily:
    _check_dims(phi, g1, g2, g3)
    top = log_degree_bound(g1, g2, g3)
    comps: List[Dict] = [dict() for _ in range(top + 1)]
    for (i, j, k), mats in phi.blocks.items():
        t = i + j - k - 1
        N1, N2, N3 = g1.n_matrix(i), g2.n_matrix(j), g3.n_matrix(t)
        # Phi((-N1)^b u) for each basis u: combine the u-indexed matrices by columns of (-N1)^b
        for r in range(top + 1):
            acc = [zeros(g3.dims[t], g2.dims[j]) for _ in mats]
            for a in range(r + 1):
                for b in range(r - a + 1):
                    cc = r - a - b
                    P1 = mat_pow(mat_scale(-1, N1), b)
                    A3 = mat_pow(N3, a)
                    C2 = mat_pow(mat_scale(-1, N2), cc)
                    w = Fraction(1, factorial(a) * factorial(b) * factorial(cc))
                    for p in range(len(mats)):
                        # (-N1)^b e_p = sum_q P1[q][p] e_q
                        inner = zeros(g3.dims[t], g2.dims[j])
                        for q in range(len(mats)):
                            if P1[q][p]:
                                inner = mat_add(inner, mat_scale(P1[q][p], [list(x) for x in mats[q]]))
                        term = mat_mul(mat_mul(A3, inner), C2)
                        acc[p] = mat_add(acc[p], mat_scale(w, term))
            comps[r][(i, j, k)] = tuple(acc)
    families = tuple(BlockFamily(phi.dims1, phi.dims2, phi.dims3, c) for c in comps)
    return LogModeFamily(g3.lam - g1.lam - g2.lam, families)


def to_z_graded(J: LogModeFamily) -> BlockFamily:
    """The log-degree-zero component; the shift s is dropped with the log factors."""
    if not J.components:
        raise ValueError("empty log family")
    return J.components[0]


def l1_recursion_failures(J: LogModeFamily, L_minus1: Sequence[Sequence[Sequence]]) -> List[Tuple]:
    """(r, i, j, n, p) where J^(r)(L(-1)u; n+1) != (s-n-1) J^(r)(u; n) + (r+1) J^(r+1)(u; n).

    ``L_minus1[i]`` is the matrix of L(-1) on W1 from degree i to i + 1
    (rows index degree i + 1).  Only (u, n) with deg u + 1 in the window are checked.
    """
    if not J.components:
        return []
    base = J.components[0]
    D1 = len(base.dims1) - 1
    bad = []
    for r, comp in enumerate(J.components):
        nxt = J.components[r + 1] if r + 1 < len(J.components) else None
        for i in range(D1):
            M = _frac_matrix(L_minus1[i])
            for j in range(len(base.dims2)):
                for t in range(len(base.dims3)):
                    n = i + j - t - 1
                    for p in range(base.dims1[i]):
                        left = zeros(base.dims3[t], base.dims2[j])
                        for q in range(base.dims1[i + 1]):
                            if M[q][p]:
                                left = mat_add(left, mat_scale(M[q][p], comp.get(i + 1, j, n + 1, q)))
                        right = mat_scale(J.shift - n - 1, comp.get(i, j, n, p))
                        if nxt is not None:
                            right = mat_add(right, mat_scale(r + 1, nxt.get(i, j, n, p)))
                        if left != right:
                            bad.append((r, i, j, n, p))
    return bad


def l1_recursion(J: LogModeFamily, L_minus1) -> bool:
    return not l1_recursion_failures(J, L_minus1)


# --- tensoring with a Jordan block -------------------------------------------------

def jordan_block(size: int) -> Matrix:
    """Nilpotent Jordan block with ones on the superdiagonal."""
    return [[Fraction(int(c == r + 1)) for c in range(size)] for r in range(size)]


def kron(A, B) -> Matrix:
    ra, ca = len(A), len(A[0]) if A else 0
    rb, cb = len(B), len(B[0]) if B else 0
    out = zeros(ra * rb, ca * cb)
    for i in range(ra):
        for j in range(ca):
            if A[i][j]:
                for k in range(rb):
                    for l in range(cb):
                        out[i * rb + k][j * cb + l] = A[i][j] * B[k][l]
    return out


def tensor_with_jordan(g: GradedOperatorData, size: int) -> GradedOperatorData:
    """L(0) (x) 1 + 1 (x) J_size, the data of W (x) C^size with a nilpotent twist."""
    Nj = jordan_block(size)
    L0 = []
    for M in g.L0:
        n = len(M)
        L0.append(mat_add(kron([list(r) for r in M], identity(size)), kron(identity(n), Nj)))
    return GradedOperatorData(g.lam, tuple(tuple(tuple(r) for r in M) for M in L0))


def tensor_family(phi: BlockFamily, B: Sequence[Sequence[Sequence]], s1: int, s2: int, s3: int) -> BlockFamily:
    """Phi'(u (x) e_a) (v (x) e_b) = Phi(u) v (x) B[a] e_b, with B[a] an s3 x s2 matrix."""
    blocks = {}
    for (i, j, k), mats in phi.blocks.items():
        new = []
        for p in range(len(mats)):
            for a in range(s1):
                new.append(kron([list(r) for r in mats[p]], _frac_matrix(B[a])))
        blocks[(i, j, k)] = tuple(new)
    return BlockFamily(tuple(d * s1 for d in phi.dims1), tuple(d * s2 for d in phi.dims2),
                       tuple(d * s3 for d in phi.dims3), blocks)

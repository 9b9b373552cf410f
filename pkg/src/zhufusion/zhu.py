"""Zhu products, O(M), and normal forms in A(M_c) = C[t] and A(M_{c,h}) = C[t1, t2].

Two independent routes compute every normal form:

* a rewriting route that strips L(-n), n >= 3, off the front of a PBW
  monomial using the relation L(k-1)u + 2L(k)u + L(k+1)u in O(M) (k <= -2);
* a linear-algebra route that solves for the class of u modulo the span of
  explicitly generated O(M) elements inside a finite degree window.

``reduce_vacuum`` and ``reduce_verma`` run both and raise
:class:`ReductionMismatch` if they disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import virasoro as vir
from .exactla import QuotientSolver, binomial, poly_at_matrix, rational_str, to_rational
from .virasoro import Kind, ModuleElement, ModuleId, Parts

DEFAULT_DEGREE_CAP = 8
DEFAULT_ORACLE_CAP = 4  # Verma inputs above this degree use the rewriting route only


class ReductionError(RuntimeError):
    """The linear-algebra route could not express an element."""


class ReductionMismatch(RuntimeError):
    """The two reduction routes disagree."""


@dataclass(frozen=True)
class NormalForm:
    """A polynomial in t (``VacuumPoly``) or in t1, t2 (``VermaPoly``)."""

    kind: str
    coeffs: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("VacuumPoly", "VermaPoly"):
            raise ValueError("unknown normal form kind %r" % self.kind)
        clean = {}
        for key, val in self.coeffs.items():
            val = Fraction(val)
            if val:
                clean[key] = val
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def t(cls, n: int = 1) -> "NormalForm":
        return cls("VacuumPoly", {n: Fraction(1)})

    def __add__(self, other: "NormalForm") -> "NormalForm":
        if self.kind != other.kind:
            raise ValueError("cannot add %s and %s" % (self.kind, other.kind))
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return NormalForm(self.kind, out)

    def __mul__(self, other):
        if not isinstance(other, NormalForm):
            s = Fraction(other)
            return NormalForm(self.kind, {k: s * v for k, v in self.coeffs.items()})
        if self.kind == other.kind == "VacuumPoly":
            out: Dict = {}
            for a, x in self.coeffs.items():
                for b, y in other.coeffs.items():
                    out[a + b] = out.get(a + b, 0) + x * y
            return NormalForm("VacuumPoly", out)
        if self.kind == other.kind == "VermaPoly":
            out = {}
            for (a1, b1), x in self.coeffs.items():
                for (a2, b2), y in other.coeffs.items():
                    key = (a1 + a2, b1 + b2)
                    out[key] = out.get(key, 0) + x * y
            return NormalForm("VermaPoly", out)
        raise ValueError("use left_act/right_act to combine %s with %s" % (self.kind, other.kind))

    __rmul__ = __mul__

    def left_act(self, f: "NormalForm") -> "NormalForm":
        """p(t) . f(t1, t2) = p(t1) f(t1, t2)."""
        return _vacuum_as_verma(self, 0) * f

    def right_act(self, f: "NormalForm") -> "NormalForm":
        """f(t1, t2) . p(t) = f(t1, t2) p(t2)."""
        return f * _vacuum_as_verma(self, 1)

    def __eq__(self, other):
        if not isinstance(other, NormalForm):
            return NotImplemented
        return self.kind == other.kind and dict(self.coeffs) == dict(other.coeffs)

    def __hash__(self):
        return hash((self.kind, frozenset(self.coeffs.items())))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        pieces = []
        for key, val in sorted(self.coeffs.items(), reverse=True):
            if self.kind == "VacuumPoly":
                mono = "t^%d" % key if key else "1"
            else:
                m, n = key
                mono = "*".join([s for s in (("t1^%d" % m) if m else "", ("t2^%d" % n) if n else "") if s]) or "1"
            pieces.append("%s*%s" % (rational_str(val), mono))
        return " + ".join(pieces)

    def to_json(self):
        if self.kind == "VacuumPoly":
            return {"poly": [[m, rational_str(c)] for m, c in sorted(self.coeffs.items())]}
        return {"poly2": [[m, n, rational_str(c)] for (m, n), c in sorted(self.coeffs.items())]}

    @classmethod
    def from_json(cls, data) -> "NormalForm":
        if "poly" in data:
            return cls("VacuumPoly", {int(m): to_rational(c) for m, c in data["poly"]})
        return cls("VermaPoly", {(int(m), int(n)): to_rational(c) for m, n, c in data["poly2"]})


def _vacuum_as_verma(p: NormalForm, slot: int) -> NormalForm:
    if p.kind != "VacuumPoly":
        raise ValueError("expected a polynomial in t")
    return NormalForm("VermaPoly", {((m, 0) if slot == 0 else (0, m)): c for m, c in p.coeffs.items()})


@dataclass(frozen=True)
class AVModule:
    """A finite-dimensional module over A(M_c) = C[t], given by the action of t."""

    dimension: int
    t_action: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_rational(x) if isinstance(x, str) else Fraction(x) for x in row)
                     for row in self.t_action)
        if self.dimension < 1:
            raise ValueError("A(V)-module dimension must be >= 1")
        if len(rows) != self.dimension or any(len(r) != self.dimension for r in rows):
            raise ValueError("t-action must be a %dx%d matrix" % (self.dimension, self.dimension))
        object.__setattr__(self, "t_action", rows)

    @classmethod
    def scalar(cls, h) -> "AVModule":
        """The one-dimensional module C_h on which t acts by h."""
        return cls(1, ((to_rational(h) if isinstance(h, str) else Fraction(h),),))


# --- Zhu products ------------------------------------------------------------------

def _residue_sum(a: ModuleElement, u: ModuleElement, weights, shift: int) -> ModuleElement:
    """sum_i weights(i) a_{i+shift} u over the finitely many nonzero terms."""
    if not a.terms or not u.terms:
        return ModuleElement(u.module, {})
    wt = vir.weight(a)
    top = wt + max(u.degrees()) - shift - 1  # a_{i+shift} u = 0 beyond this i
    out = ModuleElement(u.module, {})
    for i in range(0, top + 1):
        w = weights(wt, i)
        if w:
            out = out + w * vir.state_mode(a, i + shift, u)
    return out


def residue_element(a: ModuleElement, u: ModuleElement, k: int) -> ModuleElement:
    """Res_x (1+x)^{wt a} x^k Y(a, x) u; lies in O(M) for k <= -2."""
    return _residue_sum(a, u, lambda wt, i: binomial(wt, i), k)


def circle(a: ModuleElement, u: ModuleElement) -> ModuleElement:
    return residue_element(a, u, -2)


def star(a: ModuleElement, u: ModuleElement, side: str = "left") -> ModuleElement:
    """a * u (side="left") or u * a (side="right")."""
    if side == "left":
        return _residue_sum(a, u, lambda wt, i: binomial(wt, i), -1)
    if side == "right":
        return _residue_sum(a, u, lambda wt, i: binomial(wt - 1, i), -1)
    raise ValueError("side must be 'left' or 'right', got %r" % (side,))


def o_span_generators(m: ModuleId, degree_cap: int, window: Optional[int] = None) -> List[ModuleElement]:
    """Spanning elements of O(M) from PBW basis states a and u up to ``degree_cap``.

    Produces Res (1+x)^{wt a} x^k Y(a,x) u for -degree_cap <= k <= -2 (k = -2
    is a o u).  Only generators whose nominal top degree wt a + deg u - k - 1
    fits inside ``window`` (default 2*degree_cap + 1) are evaluated, so every
    returned element lives in degrees <= window.  Zero elements are dropped.
    """
    window = 2 * degree_cap + 1 if window is None else window
    cache = vir.module_cache(m)
    key = ("ospan", degree_cap, window)
    hit = cache.extra.get(key)
    if hit is not None:
        return list(hit)
    V = vir.vacuum(m.c)
    a_basis = [p for p in vir.basis_up_to(V, degree_cap) if p]
    u_basis = vir.basis_up_to(m, degree_cap)
    out = []
    for k in range(-2, -max(degree_cap, 2) - 1, -1):
        for ap in a_basis:
            a = ModuleElement(V, {ap: Fraction(1)})
            for up in u_basis:
                if sum(ap) + sum(up) - k - 1 > window:
                    continue
                g = residue_element(a, ModuleElement(m, {up: Fraction(1)}), k)
                if g:
                    out.append(g)
    with cache.lock:
        cache.extra[key] = tuple(out)
    return out


# --- vectorization helpers -----------------------------------------------------------

def _coords(m: ModuleId, window: int):
    basis = vir.basis_up_to(m, window)
    return {p: i for i, p in enumerate(basis)}


def _vec(index: Mapping[Parts, int], u: ModuleElement) -> Dict[int, Fraction]:
    out = {}
    for p, c in u.terms.items():
        if p not in index:
            raise ReductionError("element has degree %d beyond the window" % sum(p))
        out[index[p]] = c
    return out


# --- A(M_c) ----------------------------------------------------------------------------

def _l2_power(m: ModuleId, k: int) -> ModuleElement:
    return ModuleElement(m, {(2,) * k: Fraction(1)})


def _rewrite_vacuum_monomial(m: ModuleId, parts: Parts) -> Dict[int, Fraction]:
    """Class of a vacuum PBW monomial as {k: c} meaning sum_k c L(-2)^k 1."""
    cache = vir.module_cache(m)
    key = ("vac_rewrite", parts)
    hit = cache.extra.get(key)
    if hit is not None:
        return hit
    out: Dict[int, Fraction] = {}
    if all(p == 2 for p in parts):
        out[len(parts)] = Fraction(1)
    else:
        first, rest = parts[0], parts[1:]
        # L(-n) r = -2 L(-n+1) r - L(-n+2) r  mod O(M_c), n >= 3 (largest part first)
        pieces: Dict[Parts, Fraction] = {}
        vir._axpy(pieces, Fraction(-2), vir._act(m, -first + 1, rest))
        if first == 3:
            # L(-1) r = -(wt r) r  mod O(M_c), from r o 1 = L(-1) r + (wt r) r
            vir._axpy(pieces, Fraction(sum(rest)), {rest: Fraction(1)})
        else:
            vir._axpy(pieces, Fraction(-1), vir._act(m, -first + 2, rest))
        for mono, coeff in pieces.items():
            for k, c2 in _rewrite_vacuum_monomial(m, mono).items():
                out[k] = out.get(k, 0) + coeff * c2
        out = {k: v for k, v in out.items() if v}
    with cache.lock:
        cache.extra[key] = out
    return out


def _l2_to_t(m: ModuleId, top: int) -> List[Dict[int, Fraction]]:
    """Row k: L(-2)^k 1 written as a polynomial in t, for k <= top."""
    cache = vir.module_cache(m)
    key = ("l2_to_t", top)
    hit = cache.extra.get(key)
    if hit is not None:
        return hit
    # P[n] = class of (L(-2)+L(-1))^n 1 in the L(-2)-power basis; unitriangular.
    P: List[Dict[int, Fraction]] = []
    cur = {(): Fraction(1)}
    for n in range(top + 1):
        row: Dict[int, Fraction] = {}
        for mono, c in cur.items():
            for k, c2 in _rewrite_vacuum_monomial(m, mono).items():
                row[k] = row.get(k, 0) + c * c2
        P.append({k: v for k, v in row.items() if v})
        cur = vir._combine(vir._apply_L_terms(m, -2, cur), vir._apply_L_terms(m, -1, cur), 1)
    # invert: L(-2)^k = t^k - sum_{j<k} P[k][j] L(-2)^j
    Q: List[Dict[int, Fraction]] = []
    for k in range(top + 1):
        if P[k].get(k) != 1 or any(j > k for j in P[k]):
            raise ReductionMismatch("change of basis to (L(-2)+L(-1))^n is not unitriangular at n=%d" % k)
        row = {k: Fraction(1)}
        for j, c in P[k].items():
            if j < k:
                for n, c2 in Q[j].items():
                    row[n] = row.get(n, 0) - c * c2
        Q.append({n: v for n, v in row.items() if v})
    with cache.lock:
        cache.extra[key] = Q
    return Q


def reduce_vacuum_rewrite(u: ModuleElement) -> NormalForm:
    m = u.module
    l2: Dict[int, Fraction] = {}
    for parts, coeff in u.terms.items():
        for k, c in _rewrite_vacuum_monomial(m, parts).items():
            l2[k] = l2.get(k, 0) + coeff * c
    top = max(l2, default=0)
    Q = _l2_to_t(m, top)
    out: Dict[int, Fraction] = {}
    for k, c in l2.items():
        for n, c2 in Q[k].items():
            out[n] = out.get(n, 0) + c * c2
    return NormalForm("VacuumPoly", out)


def _vacuum_oracle(m: ModuleId, window: int) -> QuotientSolver:
    cache = vir.module_cache(m)
    key = ("vac_oracle", window)
    hit = cache.extra.get(key)
    if hit is not None:
        return hit
    index = _coords(m, window)
    rels = [_vec(index, g) for g in o_span_generators(m, window, window)]
    reps = []
    cur = {(): Fraction(1)}
    for n in range(window // 2 + 1):
        reps.append(_vec(index, ModuleElement(m, cur)))
        cur = vir._combine(vir._apply_L_terms(m, -2, cur), vir._apply_L_terms(m, -1, cur), 1)
    solver = QuotientSolver(rels, reps, len(index))
    solver.index = index
    with cache.lock:
        cache.extra[key] = solver
    return solver


def reduce_vacuum_oracle(u: ModuleElement) -> NormalForm:
    """Class of u via the truncated quotient by O(M_c), reps (L(-2)+L(-1))^n 1."""
    m = u.module
    window = max(u.degrees(), default=0)
    solver = _vacuum_oracle(m, window)
    coords = solver.coordinates(_vec(solver.index, u))
    if coords is None:
        raise ReductionError("element not expressible modulo O(M_c) inside degree window %d" % window)
    return NormalForm("VacuumPoly", dict(enumerate(coords)))


def _require(m: ModuleId, kind: Kind):
    if m.kind is not kind:
        raise ValueError("expected an element of a %s module, got %s" % (kind.value, m.kind.value))


def reduce_vacuum(u: ModuleElement, check: bool = True, degree_cap: int = DEFAULT_DEGREE_CAP) -> NormalForm:
    """Image of u in A(M_c) = C[t], with (L(-2)+L(-1))^n 1 -> t^n."""
    _require(u.module, Kind.VACUUM)
    fast = reduce_vacuum_rewrite(u)
    if check and max(u.degrees(), default=0) <= degree_cap:
        slow = reduce_vacuum_oracle(u)
        if slow != fast:
            raise ReductionMismatch("A(M_c) routes disagree for %r: rewrite %r, quotient %r" % (u, fast, slow))
    return fast


# --- A(M_{c,h}) ------------------------------------------------------------------------

def _rewrite_verma_monomial(m: ModuleId, parts: Parts) -> Dict[Tuple[int, int], Fraction]:
    cache = vir.module_cache(m)
    key = ("verma_rewrite", parts)
    hit = cache.extra.get(key)
    if hit is not None:
        return hit
    out: Dict[Tuple[int, int], Fraction] = {}
    if not parts:
        out[(0, 0)] = Fraction(1)
    else:
        first, rest = parts[0], parts[1:]
        if first >= 3:
            pieces: Dict[Parts, Fraction] = {}
            vir._axpy(pieces, Fraction(-2), vir._act(m, -first + 1, rest))
            vir._axpy(pieces, Fraction(-1), vir._act(m, -first + 2, rest))
            for mono, coeff in pieces.items():
                for key2, c2 in _rewrite_verma_monomial(m, mono).items():
                    out[key2] = out.get(key2, 0) + coeff * c2
        else:
            # w*r - r*w = L(-1) r + L(0) r and r*w = L(-2) r + L(-1) r give
            #   [L(-1) r] = (t1 - t2 - h - deg r)[r],  [L(-2) r] = (2 t2 - t1 + h + deg r)[r]
            shift = m.h + sum(rest)
            if first == 1:
                factor = {(1, 0): Fraction(1), (0, 1): Fraction(-1), (0, 0): -shift}
            else:
                factor = {(1, 0): Fraction(-1), (0, 1): Fraction(2), (0, 0): shift}
            inner = _rewrite_verma_monomial(m, rest)
            for (a, b), x in factor.items():
                for (c, d), y in inner.items():
                    out[(a + c, b + d)] = out.get((a + c, b + d), 0) + x * y
        out = {k: v for k, v in out.items() if v}
    with cache.lock:
        cache.extra[key] = out
    return out


def reduce_verma_rewrite(u: ModuleElement) -> NormalForm:
    out: Dict[Tuple[int, int], Fraction] = {}
    for parts, coeff in u.terms.items():
        for key, c in _rewrite_verma_monomial(u.module, parts).items():
            out[key] = out.get(key, 0) + coeff * c
    return NormalForm("VermaPoly", out)


def verma_representative(m: ModuleId, i: int, j: int) -> ModuleElement:
    """(L(-2)+2L(-1)+L(0))^i (L(-2)+L(-1))^j v_h, the preimage of t1^i t2^j."""
    cur = {(): Fraction(1)}
    for _ in range(j):
        cur = vir._combine(vir._apply_L_terms(m, -2, cur), vir._apply_L_terms(m, -1, cur), 1)
    for _ in range(i):
        nxt = vir._apply_L_terms(m, -2, cur)
        vir._axpy(nxt, Fraction(2), vir._apply_L_terms(m, -1, cur))
        vir._axpy(nxt, Fraction(1), vir._apply_L_terms(m, 0, cur))
        cur = nxt
    return ModuleElement(m, cur)


def _verma_oracle(m: ModuleId, degree: int) -> QuotientSolver:
    cache = vir.module_cache(m)
    key = ("verma_oracle", degree)
    hit = cache.extra.get(key)
    if hit is not None:
        return hit
    window = 2 * degree
    index = _coords(m, window)
    rels = [_vec(index, g) for g in o_span_generators(m, window, window)]
    labels = [(i, s - i) for s in range(degree + 1) for i in range(s + 1)]
    reps = [_vec(index, verma_representative(m, i, j)) for i, j in labels]
    try:
        solver = QuotientSolver(rels, reps, len(index))
    except ValueError as exc:
        raise ReductionError("A(M_{c,h}) quotient system is singular at degree %d: %s" % (degree, exc))
    solver.index = index
    solver.labels = labels
    with cache.lock:
        cache.extra[key] = solver
    return solver


def reduce_verma_oracle(u: ModuleElement) -> NormalForm:
    """Class of u modulo the generated O(M) span, in the t1^i t2^j representatives.

    Uses representatives with i + j <= deg u inside the degree window 2 deg u;
    if u is not expressible there ReductionError is raised.
    """
    degree = max(u.degrees(), default=0)
    solver = _verma_oracle(u.module, degree)
    coords = solver.coordinates(_vec(solver.index, u))
    if coords is None:
        raise ReductionError("element not expressible modulo O(M) with t1^i t2^j, i+j <= %d" % degree)
    return NormalForm("VermaPoly", {lab: c for lab, c in zip(solver.labels, coords)})


def reduce_verma(u: ModuleElement, check: bool = True, oracle_cap: int = DEFAULT_ORACLE_CAP) -> NormalForm:
    """Image of u in A(M_{c,h}) = C[t1, t2].

    Inputs of degree <= ``oracle_cap`` are reduced by both routes, which must
    agree; above the cap the rewriting route alone is used.
    """
    _require(u.module, Kind.VERMA)
    fast = reduce_verma_rewrite(u)
    if check and max(u.degrees(), default=0) <= oracle_cap:
        slow = reduce_verma_oracle(u)
        if slow != fast:
            raise ReductionMismatch("A(M_{c,h}) routes disagree for %r: rewrite %r, quotient %r" % (u, fast, slow))
    return fast


def reduce(u: ModuleElement, **kwargs) -> NormalForm:
    if u.module.kind is Kind.VACUUM:
        return reduce_vacuum(u, **kwargs)
    if u.module.kind is Kind.VERMA:
        return reduce_verma(u, **kwargs)
    raise ValueError("no Zhu normal form for %s modules" % u.module.kind.value)


def o_matrix(a: ModuleElement, U: AVModule):
    """o(a) on U: the reduced polynomial of a evaluated at U's t-action."""
    p = reduce_vacuum(a)
    return poly_at_matrix(p.coeffs, U.t_action)

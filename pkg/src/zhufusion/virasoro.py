"""Virasoro action on Verma modules, the vacuum module and restricted duals.

A PBW monomial is a weakly decreasing tuple of positive integers
``(n1, ..., nk)`` standing for L(-n1)...L(-nk) applied to the lowest-weight
vector.  In the vacuum module M_c every part is at least 2, because
L(-1) kills the vacuum.  For a dual Verma module the same tuples label the
dual basis: ``(n1, ..., nk)`` is the functional that is 1 on that PBW
monomial and 0 on every other basis vector.

Modes of composite vacuum states are obtained recursively from the
iterate formula

    (w_l b)_k = sum_i (-1)^i binom(l, i) (w_{l-i} b_{k+i} - (-1)^l b_{l+k-i} w_i),

with w = L(-2)1 the conformal vector, w_k = L(k-1), and both sums cut off
by lower truncation of the module.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

from .exactla import binomial, rational_str, to_rational

Parts = Tuple[int, ...]
Terms = Dict[Parts, Fraction]


class Kind(str, Enum):
    VACUUM = "Vacuum"
    VERMA = "Verma"
    DUAL = "DualVerma"

    @classmethod
    def parse(cls, text: str) -> "Kind":
        key = str(text).strip().lower()
        aliases = {"vacuum": cls.VACUUM, "verma": cls.VERMA, "dualverma": cls.DUAL,
                   "dual": cls.DUAL, "dual-verma": cls.DUAL, "contragredient": cls.DUAL}
        if key not in aliases:
            raise ValueError("unknown module kind %r" % (text,))
        return aliases[key]


@dataclass(frozen=True)
class ModuleId:
    kind: Kind
    c: Fraction
    h: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind) if not isinstance(self.kind, Kind) else self.kind)
        object.__setattr__(self, "c", to_rational(self.c))
        object.__setattr__(self, "h", to_rational(self.h))
        if self.kind is Kind.VACUUM and self.h != 0:
            raise ValueError("the vacuum module has lowest weight 0, got h=%s" % self.h)

    @property
    def min_part(self) -> int:
        return 2 if self.kind is Kind.VACUUM else 1

    def to_json(self):
        data = {"kind": self.kind.value, "c": rational_str(self.c)}
        if self.kind is not Kind.VACUUM:
            data["h"] = rational_str(self.h)
        return data

    @classmethod
    def from_json(cls, data) -> "ModuleId":
        return cls(Kind.parse(data["kind"]), to_rational(data["c"]), to_rational(data.get("h", "0")))


def vacuum(c) -> ModuleId:
    return ModuleId(Kind.VACUUM, to_rational(c))


def verma(c, h) -> ModuleId:
    return ModuleId(Kind.VERMA, to_rational(c), to_rational(h))


def dual_verma(c, h) -> ModuleId:
    return ModuleId(Kind.DUAL, to_rational(c), to_rational(h))


def check_parts(m: ModuleId, parts: Sequence[int]) -> Parts:
    parts = tuple(int(p) for p in parts)
    if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
        raise ValueError("PBW parts must be weakly decreasing: %r" % (parts,))
    if parts and parts[-1] < m.min_part:
        raise ValueError("part %d not allowed in a %s module" % (parts[-1], m.kind.value))
    return parts


@dataclass(frozen=True, eq=False)
class ModuleElement:
    """Finite linear combination of PBW monomials (or dual basis vectors)."""

    module: ModuleId
    terms: Mapping[Parts, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for parts, coeff in self.terms.items():
            coeff = Fraction(coeff)
            if coeff:
                clean[check_parts(self.module, parts)] = coeff
        object.__setattr__(self, "terms", clean)

    def _same(self, other: "ModuleElement"):
        if self.module != other.module:
            raise ValueError("elements live in different modules: %r vs %r" % (self.module, other.module))

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        self._same(other)
        return ModuleElement(self.module, _combine(self.terms, other.terms, 1))

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        self._same(other)
        return ModuleElement(self.module, _combine(self.terms, other.terms, -1))

    def __neg__(self):
        return ModuleElement(self.module, {p: -c for p, c in self.terms.items()})

    def __mul__(self, scalar) -> "ModuleElement":
        s = to_rational(scalar) if not isinstance(scalar, Fraction) else scalar
        return ModuleElement(self.module, {p: s * c for p, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ModuleElement):
            return NotImplemented
        return self.module == other.module and dict(self.terms) == dict(other.terms)

    def __hash__(self):
        return hash((self.module, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        vec = "1" if self.module.kind is Kind.VACUUM else "v"
        pieces = []
        for parts, coeff in sorted(self.terms.items(), reverse=True):
            word = "".join("L(-%d)" % p for p in parts) + vec
            pieces.append("%s*%s" % (rational_str(coeff), word))
        return " + ".join(pieces)

    def degrees(self) -> List[int]:
        return sorted({sum(p) for p in self.terms})

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError("element is not homogeneous (degrees %r)" % degs)
        return degs[0]

    def homogeneous_parts(self) -> Dict[int, "ModuleElement"]:
        out: Dict[int, Terms] = {}
        for parts, coeff in self.terms.items():
            out.setdefault(sum(parts), {})[parts] = coeff
        return {d: ModuleElement(self.module, t) for d, t in out.items()}

    def to_json(self):
        return {
            "module": self.module.to_json(),
            "terms": [{"parts": list(p), "coeff": rational_str(c)}
                      for p, c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))],
        }

    @classmethod
    def from_json(cls, data) -> "ModuleElement":
        module = ModuleId.from_json(data["module"])
        terms: Terms = {}
        for item in data["terms"]:
            parts = tuple(item["parts"])
            terms[parts] = terms.get(parts, 0) + to_rational(item["coeff"])
        return cls(module, terms)


# The same carrier serves as a functional on the underlying Verma module.
DualElement = ModuleElement


def _combine(a: Mapping, b: Mapping, sign) -> Terms:
    out = dict(a)
    for k, v in b.items():
        new = out.get(k, 0) + sign * v
        if new:
            out[k] = new
        else:
            out.pop(k, None)
    return out


def _axpy(target: Terms, scale: Fraction, source: Mapping[Parts, Fraction]) -> None:
    if not scale:
        return
    for k, v in source.items():
        new = target.get(k, 0) + scale * v
        if new:
            target[k] = new
        else:
            target.pop(k, None)


def element(m: ModuleId, terms: Mapping[Sequence[int], object]) -> ModuleElement:
    return ModuleElement(m, {tuple(p): to_rational(c) if not isinstance(c, (int, Fraction)) else Fraction(c)
                             for p, c in terms.items()})


def lowest_vector(m: ModuleId) -> ModuleElement:
    """The vacuum 1, the lowest-weight vector v_h, or its dual functional."""
    return ModuleElement(m, {(): Fraction(1)})


def omega(c) -> ModuleElement:
    """The conformal vector L(-2)1 of M_c."""
    return ModuleElement(vacuum(c), {(2,): Fraction(1)})


# --- bases ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def _partitions(d: int, max_part: int, min_part: int) -> Tuple[Parts, ...]:
    if d == 0:
        return ((),)
    out = []
    for first in range(min(d, max_part), min_part - 1, -1):
        for rest in _partitions(d - first, first, min_part):
            out.append((first,) + rest)
    return tuple(out)


def basis_at_degree(m: ModuleId, d: int) -> List[Parts]:
    """Legal PBW monomials of degree d, in decreasing lexicographic order."""
    if d < 0:
        raise ValueError("degree must be >= 0")
    return list(_partitions(d, d, m.min_part))


def basis_index(m: ModuleId, d: int) -> Dict[Parts, int]:
    return {p: i for i, p in enumerate(basis_at_degree(m, d))}


def basis_up_to(m: ModuleId, dmax: int) -> List[Parts]:
    out: List[Parts] = []
    for d in range(dmax + 1):
        out.extend(basis_at_degree(m, d))
    return out


# --- per-module caches -----------------------------------------------------------

class _ModuleCache:
    def __init__(self):
        self.lock = threading.RLock()
        self.act: Dict[Tuple[int, Parts], Terms] = {}
        self.dual_act: Dict[Tuple[int, int], Dict[Parts, Terms]] = {}
        self.modes: Dict[Tuple[Parts, int, Parts], Terms] = {}
        self.extra: Dict[object, object] = {}


_CACHES: Dict[ModuleId, _ModuleCache] = {}
_CACHES_LOCK = threading.Lock()


def module_cache(m: ModuleId) -> _ModuleCache:
    cache = _CACHES.get(m)
    if cache is None:
        with _CACHES_LOCK:
            cache = _CACHES.setdefault(m, _ModuleCache())
    return cache


def _store(cache: _ModuleCache, table: dict, key, value):
    with cache.lock:
        table.setdefault(key, value)
    return value


# --- the L(n) action -------------------------------------------------------------

def _act(m: ModuleId, n: int, parts: Parts) -> Terms:
    """L(n) applied to a PBW monomial of a Verma or vacuum module."""
    cache = module_cache(m)
    key = (n, parts)
    hit = cache.act.get(key)
    if hit is not None:
        return hit
    out: Terms = {}
    if not parts:
        if n < 0:
            if -n >= m.min_part:
                out[(-n,)] = Fraction(1)
        elif n == 0:
            if m.h:
                out[()] = m.h
    elif n < 0 and -n >= parts[0]:
        out[(-n,) + parts] = Fraction(1)
    else:
        first, rest = parts[0], parts[1:]
        # L(n) L(-first) = L(-first) L(n) + (n + first) L(n - first) + central
        for mono, coeff in _act(m, n, rest).items():
            _axpy(out, coeff, _act(m, -first, mono))
        if n + first:
            _axpy(out, Fraction(n + first), _act(m, n - first, rest))
        if n == first:
            central = Fraction(n ** 3 - n, 12) * m.c
            if central:
                _axpy(out, central, {rest: Fraction(1)})
    return _store(cache, cache.act, key, out)


def _dual_matrix(m: ModuleId, n: int, d: int) -> Dict[Parts, Terms]:
    """Transpose action: L(n) on the dual basis at degree d, keyed by source."""
    cache = module_cache(m)
    key = (n, d)
    hit = cache.dual_act.get(key)
    if hit is not None:
        return hit
    under = ModuleId(Kind.VERMA, m.c, m.h)
    table: Dict[Parts, Terms] = {p: {} for p in basis_at_degree(m, d)}
    if d - n >= 0:
        for target in basis_at_degree(m, d - n):
            # <L(n) p*, target> = <p*, L(-n) target>
            for p, coeff in _act(under, -n, target).items():
                table[p][target] = coeff
    table = {p: t for p, t in table.items()}
    return _store(cache, cache.dual_act, key, table)


def _apply_L_terms(m: ModuleId, n: int, terms: Mapping[Parts, Fraction]) -> Terms:
    out: Terms = {}
    if m.kind is Kind.DUAL:
        for parts, coeff in terms.items():
            _axpy(out, coeff, _dual_matrix(m, n, sum(parts))[parts])
    else:
        for parts, coeff in terms.items():
            _axpy(out, coeff, _act(m, n, parts))
    return out


def apply_virasoro(n: int, u: ModuleElement) -> ModuleElement:
    """L(n) u in PBW normal form (transpose of L(-n) on dual modules)."""
    return ModuleElement(u.module, _apply_L_terms(u.module, n, u.terms))


# --- modes of vacuum states --------------------------------------------------------

def _mode(m: ModuleId, a: Parts, k: int, u: Parts) -> Terms:
    """a_k u for a PBW monomial a of the vacuum module and a basis monomial u."""
    wt_a = sum(a)
    deg_u = sum(u)
    if k >= wt_a + deg_u:
        return {}
    if not a:
        return {u: Fraction(1)} if k == -1 else {}
    if a == (2,):
        return _apply_L_terms(m, k - 1, {u: Fraction(1)})
    cache = module_cache(m)
    key = (a, k, u)
    hit = cache.modes.get(key)
    if hit is not None:
        return hit
    first, b = a[0], a[1:]
    l = 1 - first  # a = w_l b with l <= -1
    wt_b = wt_a - first
    out: Terms = {}
    sign_l = -1 if l % 2 else 1
    # sum_i (-1)^i binom(l, i) w_{l-i} b_{k+i} u
    i = 0
    while k + i < wt_b + deg_u:
        coeff = binomial(l, i) * (-1) ** i
        inner = _mode(m, b, k + i, u)
        if inner:
            _axpy(out, coeff, _apply_L_terms(m, l - i - 1, inner))
        i += 1
    # - (-1)^l sum_i (-1)^i binom(l, i) b_{l+k-i} w_i u ; w_i u = 0 for i > deg u + 1
    for i in range(deg_u + 2):
        coeff = -sign_l * binomial(l, i) * (-1) ** i
        inner = _apply_L_terms(m, i - 1, {u: Fraction(1)})
        for mono, c2 in inner.items():
            _axpy(out, coeff * c2, _mode(m, b, l + k - i, mono))
    return _store(cache, cache.modes, key, out)


def weight(a: ModuleElement) -> int:
    """Weight of a homogeneous vacuum-module element."""
    if a.module.kind is not Kind.VACUUM:
        raise ValueError("expected an element of the vacuum module, got %s" % a.module.kind.value)
    if not a.terms:
        raise ValueError("the zero vector has no weight")
    if not a.is_homogeneous():
        raise ValueError("state is not homogeneous (weights %r)" % a.degrees())
    return a.degree


def state_mode(a: ModuleElement, k: int, u: ModuleElement) -> ModuleElement:
    """The k-th mode a_k of Y(a, x) = sum_k a_k x^{-k-1} applied to u."""
    if a.module.kind is not Kind.VACUUM:
        raise ValueError("modes are defined for vacuum-module states only")
    if a.terms:
        weight(a)
    if a.module.c != u.module.c:
        raise ValueError("central charges differ: %s vs %s" % (a.module.c, u.module.c))
    out: Terms = {}
    for ap, ac in a.terms.items():
        for up, uc in u.terms.items():
            _axpy(out, ac * uc, _mode(u.module, ap, k, up))
    return ModuleElement(u.module, out)


def mode_terms(m: ModuleId, a: Mapping[Parts, Fraction], k: int, u: Mapping[Parts, Fraction]) -> Terms:
    """Raw-dict version of :func:`state_mode` used by the solvers."""
    out: Terms = {}
    for ap, ac in a.items():
        for up, uc in u.items():
            _axpy(out, ac * uc, _mode(m, ap, k, up))
    return out


def mode_matrix(a: ModuleElement, k: int, m: ModuleId, d: int):
    """Matrix of a_k from degree d to degree wt a + d - k - 1 (dense, rows = target basis)."""
    wt_a = weight(a)
    target = wt_a + d - k - 1
    src = basis_at_degree(m, d)
    if target < 0:
        return [], src, []
    cache = module_cache(m)
    key = ("mode_matrix", tuple(sorted(a.terms.items())), k, d)
    hit = cache.extra.get(key)
    if hit is not None:
        return hit
    tgt = basis_at_degree(m, target)
    tidx = {p: i for i, p in enumerate(tgt)}
    mat = [[Fraction(0)] * len(src) for _ in tgt]
    for j, p in enumerate(src):
        for q, coeff in mode_terms(m, a.terms, k, {p: Fraction(1)}).items():
            mat[tidx[q]][j] = coeff
    result = (mat, src, tgt)
    return _store(cache, cache.extra, key, result)


def pairing(f: ModuleElement, u: ModuleElement) -> Fraction:
    """Evaluate a dual-Verma functional on a Verma-module element."""
    if f.module.kind is not Kind.DUAL or u.module.kind is not Kind.VERMA:
        raise ValueError("pairing needs a DualVerma functional and a Verma element")
    if (f.module.c, f.module.h) != (u.module.c, u.module.h):
        raise ValueError("pairing between different (c, h): %r vs %r" % (f.module, u.module))
    return sum((coeff * u.terms[p] for p, coeff in f.terms.items() if p in u.terms), Fraction(0))


def iter_monomials(terms: Mapping[Parts, Fraction]) -> Iterator[Tuple[Parts, Fraction]]:
    return iter(sorted(terms.items()))

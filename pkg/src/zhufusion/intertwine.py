"""Z-graded intertwining operators among Virasoro modules, truncated to a window.

A Z-graded intertwining operator of type (W3; W1 W2) is a family of maps
Phi(u; k): W2(j) -> W3(deg u + j - k - 1) satisfying the Borcherds identity

    sum_i binom(m, i) Phi(a_{l+i} u; m+n-i) v
      = sum_i (-1)^i binom(l, i) ( a_{m+l-i} Phi(u; n+i) v
                                   - (-1)^l Phi(u; n+l-i) a_{m+i} v ).

Here W1 = M_{c,h1}, W2 = M_{c,h2} and W3 is the restricted dual of M_{c,h3}.
Every unknown is a single matrix entry <f_tau, Phi(u; k) v> with u, v, tau
PBW monomials of degree at most the window D; k is fixed by the grading.
Only interior instances of the identity are used (every referenced entry
lies in the window), so the solution dimension at a given D is an upper
bound for the true one and is compared across windows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from . import virasoro as vir
from .exactla import (NullspaceTracker, binomial, identity, mat_mul, mat_pow,
                      rational_str, to_rational)
from .formalcalc import TruncationError
from .virasoro import Kind, ModuleElement, ModuleId, Parts
from .zhu import AVModule

DEFAULT_WEIGHT_CAP = 4

Key = Tuple[Parts, Parts, Parts]  # (u, v, tau): the entry <f_tau, Phi(u; k) v>


@dataclass(frozen=True)
class IntertwinerType:
    c: Fraction
    h1: Fraction
    h2: Fraction
    h3: Fraction

    def __post_init__(self):
        for name in ("c", "h1", "h2", "h3"):
            val = getattr(self, name)
            object.__setattr__(self, name, to_rational(val) if isinstance(val, str) else Fraction(val))

    @property
    def W1(self) -> ModuleId:
        return vir.verma(self.c, self.h1)

    @property
    def W2(self) -> ModuleId:
        return vir.verma(self.c, self.h2)

    @property
    def W3(self) -> ModuleId:
        return vir.dual_verma(self.c, self.h3)

    @property
    def V(self) -> ModuleId:
        return vir.vacuum(self.c)

    def to_json(self):
        return {k: rational_str(getattr(self, k)) for k in ("c", "h1", "h2", "h3")}

    @classmethod
    def from_json(cls, data) -> "IntertwinerType":
        return cls(*(to_rational(str(data[k])) for k in ("c", "h1", "h2", "h3")))


# --- truncated generalized Verma modules ---------------------------------------------

@dataclass(frozen=True)
class TruncatedModule:
    module: ModuleId
    depth: int

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(len(vir.basis_at_degree(self.module, d)) for d in range(self.depth + 1))

    def basis(self, d: int) -> List[Parts]:
        if not 0 <= d <= self.depth:
            raise TruncationError("degree %d outside the window 0..%d" % (d, self.depth))
        return vir.basis_at_degree(self.module, d)


def generalized_verma(h, c, D: int, weight_cap: int = DEFAULT_WEIGHT_CAP) -> TruncatedModule:
    """M_{c,h} truncated to degrees <= D, standing in for S(C_h).

    The universal property is spot-checked: v_h must be killed by every mode
    a_i with i >= wt a, for vacuum PBW states a up to ``weight_cap``.
    """
    if D < 0:
        raise ValueError("window must be >= 0")
    m = vir.verma(c, h)
    v = vir.lowest_vector(m)
    V = vir.vacuum(m.c)
    for ap in vir.basis_up_to(V, weight_cap):
        a = ModuleElement(V, {ap: Fraction(1)})
        wt = sum(ap)
        for i in range(wt, wt + 3):
            if vir.state_mode(a, i, v):
                raise RuntimeError("universal-property check failed: %r_%d v_h != 0" % (a, i))
    # the degree-zero piece is C_h: o(omega) = L(0) acts by h
    if vir.apply_virasoro(0, v) != v * m.h:
        raise RuntimeError("L(0) v_h != h v_h")
    return TruncatedModule(m, D)


# --- mode families -------------------------------------------------------------------

def mode_index(u: Parts, v: Parts, tau: Parts) -> int:
    """The k with <f_tau, Phi(u; k) v> allowed by the grading."""
    return sum(u) + sum(v) - sum(tau) - 1


def unknown_keys(D: int) -> List[Key]:
    """Every (u, v, tau) with all three degrees in 0..D, in a fixed order."""
    parts = [vir._partitions(d, d, 1) for d in range(D + 1)]
    flat = [p for ps in parts for p in ps]
    return [(u, v, t) for u in flat for v in flat for t in flat]


@dataclass(frozen=True)
class TruncatedModeFamily:
    """Entries <f_tau, Phi(u; k) v> of a mode family inside the window D.

    ``entries`` maps (u, v, tau) to a nonzero rational; k is implied by the
    grading ``deg tau = deg u + deg v - k - 1``, so every block automatically
    has the right target degree.
    """

    kind: IntertwinerType
    depth: int
    entries: Mapping[Key, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (u, v, t), val in self.entries.items():
            u, v, t = tuple(u), tuple(v), tuple(t)
            for p in (u, v, t):
                vir.check_parts(self.kind.W1, p)
                if sum(p) > self.depth:
                    raise TruncationError("entry %r outside window %d" % ((u, v, t), self.depth))
            val = Fraction(val)
            if val:
                clean[(u, v, t)] = val
        object.__setattr__(self, "entries", clean)

    # linear structure
    def __add__(self, other: "TruncatedModeFamily") -> "TruncatedModeFamily":
        self._same(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return TruncatedModeFamily(self.kind, self.depth, out)

    def __mul__(self, scalar) -> "TruncatedModeFamily":
        s = Fraction(scalar)
        return TruncatedModeFamily(self.kind, self.depth, {k: s * v for k, v in self.entries.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TruncatedModeFamily):
            return NotImplemented
        return (self.kind, self.depth, dict(self.entries)) == (other.kind, other.depth, dict(other.entries))

    def __hash__(self):
        return hash((self.kind, self.depth, frozenset(self.entries.items())))

    def _same(self, other):
        if self.kind != other.kind or self.depth != other.depth:
            raise ValueError("mode families of different type or window")

    def block(self, u: Parts, j: int, k: int):
        """Matrix of Phi(u; k) from W2(j) to W3(deg u + j - k - 1), rows = target basis."""
        t = sum(u) + j - k - 1
        D = self.depth
        if not (0 <= sum(u) <= D and 0 <= j <= D and 0 <= t <= D):
            raise TruncationError("block (u=%r, j=%d, k=%d) outside window %d" % (u, j, k, D))
        src = vir.basis_at_degree(self.kind.W2, j)
        tgt = vir.basis_at_degree(self.kind.W3, t)
        return [[self.entries.get((tuple(u), v, tau), Fraction(0)) for v in src] for tau in tgt]

    def apply(self, u: ModuleElement, k: int, v: ModuleElement) -> ModuleElement:
        """Phi(u; k) v as an element of W3; refuses anything outside the window."""
        W3 = self.kind.W3
        out: Dict[Parts, Fraction] = {}
        for up, uc in u.terms.items():
            for vp, vc in v.terms.items():
                t = sum(up) + sum(vp) - k - 1
                if t < 0:
                    continue
                if sum(up) > self.depth or sum(vp) > self.depth or t > self.depth:
                    raise TruncationError("Phi(%r; %d) on %r leaves the window %d" % (up, k, vp, self.depth))
                for tau in vir.basis_at_degree(W3, t):
                    val = self.entries.get((up, vp, tau))
                    if val:
                        out[tau] = out.get(tau, 0) + uc * vc * val
        return ModuleElement(W3, out)

    def o_phi(self) -> ModuleElement:
        """o^Phi(v_{h1}) v_{h2}, the degree-zero value."""
        return self.apply(vir.lowest_vector(self.kind.W1), -1, vir.lowest_vector(self.kind.W2))

    def normalized(self) -> "TruncatedModeFamily":
        """Rescaled so the first nonzero o^Phi entry (or else first entry) is 1."""
        hom = extract_hom(self).matrix
        pivot = next((x for row in hom for x in row if x), None)
        if pivot is None:
            pivot = next((self.entries[k] for k in sorted(self.entries)), None)
        if pivot is None:
            return self
        return self * (1 / pivot)

    def to_json(self):
        return {
            "type": self.kind.to_json(),
            "depth": self.depth,
            "entries": [[list(u), list(v), list(t), rational_str(c)]
                        for (u, v, t), c in sorted(self.entries.items())],
        }

    @classmethod
    def from_json(cls, data) -> "TruncatedModeFamily":
        kind = IntertwinerType.from_json(data["type"])
        entries = {}
        for u, v, t, c in data.get("entries", []):
            entries[(tuple(u), tuple(v), tuple(t))] = to_rational(str(c))
        return cls(kind, int(data["depth"]), entries)


# --- constraint generation ----------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    """One instance (a, u, v, l, m, n) of the Borcherds identity; a is a PBW state."""

    a: Parts
    u: Parts
    v: Parts
    l: int
    m: int
    n: int

    def target_degree(self) -> int:
        return sum(self.a) + sum(self.u) + sum(self.v) - self.l - self.m - self.n - 2

    def to_json(self):
        return {"a": list(self.a), "u": list(self.u), "v": list(self.v),
                "l": self.l, "m": self.m, "n": self.n}

    @classmethod
    def from_json(cls, data) -> "Instance":
        return cls(tuple(data["a"]), tuple(data["u"]), tuple(data["v"]),
                   int(data["l"]), int(data["m"]), int(data["n"]))


def is_interior(inst: Instance, D: int) -> bool:
    """All referenced entries (first terms of each sum are the extreme ones) lie in the window."""
    wa, du, dv = sum(inst.a), sum(inst.u), sum(inst.v)
    if max(du, dv) > D:
        return False
    t = inst.target_degree()
    return (0 <= t <= D
            and wa + du - inst.l - 1 <= D   # a_{l+i} u
            and wa + dv - inst.m - 1 <= D   # a_{m+i} v
            and du + dv - inst.n - 1 <= D)  # Phi(u; n+i) v


def interior_instances(a: Parts, u: Parts, v: Parts, D: int) -> Iterator[Instance]:
    wa, du, dv = sum(a), sum(u), sum(v)
    l0 = wa + du - 1 - D
    m0 = wa + dv - 1 - D
    n0 = du + dv - 1 - D
    for t in range(D + 1):
        total = wa + du + dv - 2 - t
        for l in range(l0, total - m0 - n0 + 1):
            for m in range(m0, total - l - n0 + 1):
                yield Instance(a, u, v, l, m, total - l - m)


def _sign(e: int) -> int:
    return -1 if e % 2 else 1


def instance_rows(kind: IntertwinerType, inst: Instance, D: int,
                  col: Mapping[Key, int]) -> Dict[Parts, Dict[int, Fraction]]:
    """LHS - RHS of one instance, one sparse row per target basis vector f_tau."""
    a = {inst.a: Fraction(1)}
    u, v, l, m, n = inst.u, inst.v, inst.l, inst.m, inst.n
    W1, W2, W3 = kind.W1, kind.W2, kind.W3
    wa, du, dv = sum(inst.a), sum(u), sum(v)
    T = inst.target_degree()
    taus = vir.basis_at_degree(W3, T)
    rows: Dict[Parts, Dict[int, Fraction]] = {tau: {} for tau in taus}

    def bump(tau, key, val):
        row = rows[tau]
        c = col[key]
        new = row.get(c, 0) + val
        if new:
            row[c] = new
        else:
            row.pop(c, None)

    # sum_i binom(m, i) Phi(a_{l+i} u; m+n-i) v
    i = 0
    while l + i < wa + du and (m < 0 or i <= m):
        coeff = binomial(m, i)
        if coeff:
            for up, c in vir.mode_terms(W1, a, l + i, {u: Fraction(1)}).items():
                for tau in taus:
                    bump(tau, (up, v, tau), coeff * c)
        i += 1
    # - sum_i (-1)^i binom(l, i) a_{m+l-i} Phi(u; n+i) v
    i = 0
    while du + dv - n - i - 1 >= 0 and (l < 0 or i <= l):
        coeff = binomial(l, i) * _sign(i)
        if coeff:
            s = du + dv - n - i - 1
            for sigma in vir.basis_at_degree(W3, s):
                for tau, c in vir.mode_terms(W3, a, m + l - i, {sigma: Fraction(1)}).items():
                    bump(tau, (u, v, sigma), -coeff * c)
        i += 1
    # + (-1)^l sum_i (-1)^i binom(l, i) Phi(u; n+l-i) a_{m+i} v
    i = 0
    while m + i < wa + dv and (l < 0 or i <= l):
        coeff = binomial(l, i) * _sign(i) * _sign(l)
        if coeff:
            for vp, c in vir.mode_terms(W2, a, m + i, {v: Fraction(1)}).items():
                for tau in taus:
                    bump(tau, (u, vp, tau), coeff * c)
        i += 1
    return {tau: row for tau, row in rows.items() if row}


def pin_keys(D: int) -> List[Key]:
    """Entries of o^Phi(u) = Phi(u; deg u - 1) from W2(0) to W3(0), for every u in the window."""
    return [(u, (), ()) for d in range(D + 1) for u in vir._partitions(d, d, 1)]


@dataclass
class ConstraintSystem:
    """The deduplicated linear system for a window; unknowns are (u, v, tau) entries."""

    kind: IntertwinerType
    depth: int
    weight_cap: int
    keys: List[Key]
    rows: List[Dict[int, Fraction]]
    provenance: List[Tuple]
    pin_ophi_zero: bool = False
    _kernel: Optional[List[Tuple[Fraction, ...]]] = field(default=None, repr=False)

    @property
    def unknowns(self) -> int:
        return len(self.keys)

    def column(self) -> Dict[Key, int]:
        return {k: i for i, k in enumerate(self.keys)}


def _normalize(row: Mapping[int, Fraction]) -> Tuple:
    lead = row[min(row)]
    return tuple(sorted((c, v / lead) for c, v in row.items()))


def build_constraints(c, h1, h2, h3, D: int, weight_cap: int = DEFAULT_WEIGHT_CAP,
                      pin_ophi_zero: bool = False) -> ConstraintSystem:
    """All interior Borcherds instances with a in the vacuum PBW basis up to ``weight_cap``.

    Rows are emitted with a ordered by weight (omega first), deduplicated up
    to scaling; ``provenance[r]`` is (Instance, tau) or ("pin", key).
    """
    if weight_cap < 2:
        raise ValueError("weight cap must be >= 2 so that omega is included")
    if D < 0:
        raise ValueError("window must be >= 0")
    kind = IntertwinerType(c, h1, h2, h3)
    keys = unknown_keys(D)
    col = {k: i for i, k in enumerate(keys)}
    states = sorted(vir.basis_up_to(kind.V, weight_cap), key=lambda p: (sum(p) == 0, sum(p), p))
    basis = [p for d in range(D + 1) for p in vir._partitions(d, d, 1)]
    rows: List[Dict[int, Fraction]] = []
    prov: List[Tuple] = []
    seen = set()
    for ap in states:
        for u in basis:
            for v in basis:
                for inst in interior_instances(ap, u, v, D):
                    for tau, row in instance_rows(kind, inst, D, col).items():
                        sig = _normalize(row)
                        if sig in seen:
                            continue
                        seen.add(sig)
                        rows.append(row)
                        prov.append((inst, tau))
    if pin_ophi_zero:
        for key in pin_keys(D):
            rows.append({col[key]: Fraction(1)})
            prov.append(("pin", key))
    return ConstraintSystem(kind, D, weight_cap, keys, rows, prov, pin_ophi_zero)


# --- solving -------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeSolution:
    dimension: int
    basis: Tuple[TruncatedModeFamily, ...]
    rows: int
    unknowns: int


def _kernel(system: ConstraintSystem) -> List[Tuple[Fraction, ...]]:
    if system._kernel is None:
        tracker = NullspaceTracker(system.unknowns)
        for row in system.rows:
            tracker.add(row)
        system._kernel = tracker.kernel_basis()
    return system._kernel


def _restrict(kernel: Sequence[Sequence[Fraction]], rows: Iterable[Mapping[int, Fraction]],
              cols: int) -> List[Tuple[Fraction, ...]]:
    """Vectors of span(kernel) also killed by ``rows``."""
    if not kernel:
        return []
    # coordinates w.r.t. the kernel basis: solve sum_q x_q (row . k_q) = 0
    tracker = NullspaceTracker(len(kernel), switch_at=len(kernel))
    for row in rows:
        tracker.add({q: sum((val * kq[c] for c, val in row.items()), Fraction(0))
                     for q, kq in enumerate(kernel)})
    out = []
    for x in tracker.kernel_basis():
        vec = [Fraction(0)] * cols
        for q, xq in enumerate(x):
            if xq:
                for c, val in enumerate(kernel[q]):
                    if val:
                        vec[c] += xq * val
        out.append(tuple(vec))
    return out


def solve_mode_families(system: ConstraintSystem, pin_ophi_zero: Optional[bool] = None) -> ModeSolution:
    """Null space of the system, reshaped into normalized mode families.

    ``pin_ophi_zero`` (default: the system's own flag) additionally forces
    o^Phi(u) = 0 on W2(0) for every u; it reuses the unpinned kernel.
    """
    pin = system.pin_ophi_zero if pin_ophi_zero is None else pin_ophi_zero
    kernel = _kernel(system)
    if pin and not system.pin_ophi_zero:
        col = system.column()
        kernel = _restrict(kernel, [{col[k]: Fraction(1)} for k in pin_keys(system.depth)], system.unknowns)
    fams = []
    for vec in kernel:
        fam = TruncatedModeFamily(system.kind, system.depth,
                                  {system.keys[i]: x for i, x in enumerate(vec) if x})
        fams.append(fam.normalized())
    return ModeSolution(len(fams), tuple(fams), len(system.rows), system.unknowns)


def solve_dimension(c, h1, h2, h3, D: int, weight_cap: int = DEFAULT_WEIGHT_CAP) -> Tuple[int, int]:
    """(dimension, pinned dimension) at window D."""
    system = build_constraints(c, h1, h2, h3, D, weight_cap)
    return (solve_mode_families(system).dimension,
            solve_mode_families(system, pin_ophi_zero=True).dimension)


# --- Hom side ------------------------------------------------------------------------

@dataclass(frozen=True)
class HomData:
    """A linear map Omega_2 -> Omega_3 as a matrix (rows index Omega_3)."""

    matrix: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(x) for x in r) for r in self.matrix))

    def to_json(self):
        return [[rational_str(x) for x in r] for r in self.matrix]


def extract_hom(phi: TruncatedModeFamily) -> HomData:
    """o^Phi(v_{h1}) = Phi(v_{h1}; -1) restricted to W2(0) -> W3(0)."""
    return HomData(tuple(tuple(r) for r in phi.block((), 0, -1)))


def ophi_matches_zhu(phi: TruncatedModeFamily, reduce_verma) -> List[Parts]:
    """Monomials u with o^Phi(u) v_{h2} != p(h3, h2) o^Phi(v_{h1}) v_{h2}, p = [u] in C[t1, t2].

    The left A(M_c)-action (t1) acts on the degree-zero part of W3 by h3 and
    the right action (t2) on that of W2 by h2.
    """
    base = extract_hom(phi).matrix[0][0]
    kind = phi.kind
    bad = []
    for d in range(phi.depth + 1):
        for u in vir.basis_at_degree(kind.W1, d):
            poly = reduce_verma(ModuleElement(kind.W1, {u: Fraction(1)}))
            val = sum((cf * kind.h3 ** i * kind.h2 ** j for (i, j), cf in poly.coeffs.items()), Fraction(0))
            got = phi.entries.get((u, (), ()), Fraction(0))
            if got != val * base:
                bad.append(u)
    return bad


@dataclass(frozen=True)
class HomSolution:
    dimension: int
    basis: Tuple[HomData, ...]
    brute_force_dimension: int


def _avmodule(x) -> AVModule:
    return x if isinstance(x, AVModule) else AVModule.scalar(x)


def fusion_dim_hom(omega2, omega3, poly_degree: int = 4) -> HomSolution:
    """dim Hom_{A(V)}(A(W1) (x)_{A(V)} Omega_2, Omega_3) for W1 a Verma module.

    With A(W1) = C[t1, t2] this Hom space is Hom_C(Omega_2, Omega_3); the
    basis returned is the matrix units.  The count is cross-checked by a
    brute-force solve for maps phi_{m,n} = f(t1^m t2^n (x) -) on polynomial
    degree <= ``poly_degree`` subject to phi_{m,n+1} = phi_{m,n} T2 and
    phi_{m+1,n} = T3 phi_{m,n}; a mismatch raises.
    """
    O2, O3 = _avmodule(omega2), _avmodule(omega3)
    d2, d3 = O2.dimension, O3.dimension
    T2, T3 = [list(r) for r in O2.t_action], [list(r) for r in O3.t_action]
    labels = [(mm, nn) for s in range(poly_degree + 1) for mm in range(s + 1) for nn in [s - mm]]
    block = {lab: q for q, lab in enumerate(labels)}
    width = d3 * d2

    def var(lab, r, s):
        return block[lab] * width + r * d2 + s

    tracker = NullspaceTracker(len(labels) * width)
    for (mm, nn) in labels:
        if mm + nn + 1 > poly_degree:
            continue
        for r in range(d3):
            for s in range(d2):
                # phi_{m,n+1}[r][s] - sum_q phi_{m,n}[r][q] T2[q][s]
                row = {var((mm, nn + 1), r, s): Fraction(1)}
                for q in range(d2):
                    if T2[q][s]:
                        k = var((mm, nn), r, q)
                        row[k] = row.get(k, 0) - T2[q][s]
                tracker.add({k: v for k, v in row.items() if v})
                # phi_{m+1,n}[r][s] - sum_q T3[r][q] phi_{m,n}[q][s]
                row = {var((mm + 1, nn), r, s): Fraction(1)}
                for q in range(d3):
                    if T3[r][q]:
                        k = var((mm, nn), q, s)
                        row[k] = row.get(k, 0) - T3[r][q]
                tracker.add({k: v for k, v in row.items() if v})
    brute = tracker.nullity
    basis = []
    for r in range(d3):
        for s in range(d2):
            basis.append(HomData(tuple(tuple(Fraction(int(i == r and j == s)) for j in range(d2))
                                       for i in range(d3))))
    if brute != len(basis):
        raise RuntimeError("Hom dimension mismatch: construction %d, brute force %d" % (len(basis), brute))
    return HomSolution(len(basis), tuple(basis), brute)


def extend_hom(f0: HomData, omega2, omega3, m: int, n: int) -> HomData:
    """f(t1^m t2^n (x) -) = T3^m f0 T2^n."""
    O2, O3 = _avmodule(omega2), _avmodule(omega3)
    M = mat_mul(mat_mul(mat_pow(O3.t_action, m), [list(r) for r in f0.matrix]), mat_pow(O2.t_action, n))
    return HomData(tuple(tuple(r) for r in M))


# --- independent checks --------------------------------------------------------------

def check_borcherds_residual(phi: TruncatedModeFamily, inst: Instance) -> bool:
    """Evaluate both sides of the identity on vectors; no constraint matrix involved."""
    if not is_interior(inst, phi.depth):
        raise TruncationError("instance %r is not interior to window %d" % (inst, phi.depth))
    kind = phi.kind
    a = ModuleElement(kind.V, {inst.a: Fraction(1)})
    u = ModuleElement(kind.W1, {inst.u: Fraction(1)})
    v = ModuleElement(kind.W2, {inst.v: Fraction(1)})
    l, m, n = inst.l, inst.m, inst.n
    wa = sum(inst.a)
    lhs = ModuleElement(kind.W3, {})
    i = 0
    while l + i < wa + sum(inst.u):
        if binomial(m, i):
            au = vir.state_mode(a, l + i, u)
            if au:
                lhs = lhs + phi.apply(au, m + n - i, v) * binomial(m, i)
        i += 1
    rhs = ModuleElement(kind.W3, {})
    top = max(sum(inst.u) + sum(inst.v) - n - 1, wa + sum(inst.v) - m - 1)
    for i in range(top + 1):
        coeff = binomial(l, i) * _sign(i)
        if not coeff:
            continue
        if sum(inst.u) + sum(inst.v) - n - i - 1 >= 0:
            rhs = rhs + vir.state_mode(a, m + l - i, phi.apply(u, n + i, v)) * coeff
        av = vir.state_mode(a, m + i, v)
        if av:
            rhs = rhs - phi.apply(u, n + l - i, av) * (coeff * _sign(l))
    return lhs == rhs


def l1_mode_relation_failures(phi: TruncatedModeFamily) -> List[Tuple[Parts, Parts, int]]:
    """(u, v, i) where Phi(L(-1)u; i+1)v != L(0)Phi(u;i)v - Phi(L(0)u;i)v - Phi(u;i)L(0)v."""
    kind, D = phi.kind, phi.depth
    bad = []
    for du in range(D):
        for up in vir.basis_at_degree(kind.W1, du):
            u = ModuleElement(kind.W1, {up: Fraction(1)})
            lu = vir.apply_virasoro(-1, u)
            l0u = vir.apply_virasoro(0, u)
            for dv in range(D + 1):
                for vp in vir.basis_at_degree(kind.W2, dv):
                    v = ModuleElement(kind.W2, {vp: Fraction(1)})
                    l0v = vir.apply_virasoro(0, v)
                    for t in range(D + 1):
                        i = du + dv - t - 1
                        left = phi.apply(lu, i + 1, v)
                        right = (vir.apply_virasoro(0, phi.apply(u, i, v))
                                 - phi.apply(l0u, i, v) - phi.apply(u, i, l0v))
                        if left != right:
                            bad.append((up, vp, i))
    return bad


def grading_ok(phi: TruncatedModeFamily) -> bool:
    """Every stored entry is a legal (u, v, tau) triple inside the window."""
    return all(max(sum(u), sum(v), sum(t)) <= phi.depth for (u, v, t) in phi.entries)


def stabilization(c, h1, h2, h3, depths: Sequence[int], weight_cap: int = DEFAULT_WEIGHT_CAP):
    """{D: (dimension, pinned dimension)} for each window."""
    return {D: solve_dimension(c, h1, h2, h3, D, weight_cap) for D in depths}

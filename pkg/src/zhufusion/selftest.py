"""The acceptance checks, each against an oracle that does not share code with
the routine under test.  Used by ``zhufusion --self-test`` and by
tests/test_acceptance.py.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

from . import formalcalc as fc
from . import intertwine as it
from . import logtransform as lt
from . import virasoro as vir
from . import zhu
from .exactla import bareiss_rank, binomial

# Generic tuples: no two h's differ by an integer, so no accidental singular vectors.
SOLVER_TUPLES = (
    (Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(1, 5)),
    (Fraction(1, 2), Fraction(2, 7), Fraction(3, 11), Fraction(5, 13)),
)
SOLVER_DEPTHS = (2, 3, 4)
VERMA_PARAMS = ((Fraction(1, 2), Fraction(1, 16)), (Fraction(1), Fraction(1, 3)), (Fraction(26, 27), Fraction(5, 7)))


@dataclass(frozen=True)
class Result:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float


# --- oracles --------------------------------------------------------------------------

def partitions_oracle(d: int, min_part: int) -> List[Tuple[int, ...]]:
    """Brute force: all weakly decreasing tuples of parts >= min_part summing to d."""
    out = []

    def grow(prefix, left):
        if left == 0:
            out.append(tuple(prefix))
            return
        top = prefix[-1] if prefix else left
        for p in range(min(top, left), min_part - 1, -1):
            grow(prefix + [p], left - p)

    grow([], d)
    return out


def long_division_xy(l: int, window) -> Dict[Tuple[int, int], Fraction]:
    """(x - y)^l for l < 0 expanded in ascending powers of y, by repeated long division of 1/(x - y)."""
    (xlo, xhi), (ylo, yhi) = window
    # 1/(x-y) = x^-1 (1 + y/x + (y/x)^2 + ...): quotient digits of 1 / (x - y)
    base = {}
    rem = {(0, 0): Fraction(1)}  # remainder numerator
    for _ in range(yhi - ylo + abs(l) + 2):
        # divide leading term of rem by x
        (a, b), c = min(rem.items(), key=lambda kv: kv[0][1])
        q = (a - 1, b)
        base[q] = base.get(q, 0) + c
        # rem -= q * (x - y)
        for key, val in (((q[0] + 1, q[1]), c), ((q[0], q[1] + 1), -c)):
            rem[key] = rem.get(key, 0) - val
        rem = {k: v for k, v in rem.items() if v}
    out = {(0, 0): Fraction(1)}
    for _ in range(-l):
        nxt = {}
        for (a1, b1), c1 in out.items():
            for (a2, b2), c2 in base.items():
                if b1 + b2 <= yhi:
                    nxt[(a1 + a2, b1 + b2)] = nxt.get((a1 + a2, b1 + b2), 0) + c1 * c2
        out = nxt
    return {k: v for k, v in out.items() if xlo <= k[0] <= xhi and ylo <= k[1] <= yhi and v}


def polynomial_xy(j: int, k: int, l: int) -> Dict[Tuple[int, int], Fraction]:
    """x^j y^k (x - y)^l for l >= 0 by repeated multiplication."""
    out = {(j, k): Fraction(1)}
    for _ in range(l):
        nxt = {}
        for (a, b), c in out.items():
            nxt[(a + 1, b)] = nxt.get((a + 1, b), 0) + c
            nxt[(a, b + 1)] = nxt.get((a, b + 1), 0) - c
        out = {e: v for e, v in nxt.items() if v}
    return out


@lru_cache(maxsize=None)
def solved(params: Tuple[Fraction, ...], D: int, weight_cap: int = it.DEFAULT_WEIGHT_CAP):
    system = it.build_constraints(*params, D, weight_cap)
    return (it.solve_mode_families(system), it.solve_mode_families(system, pin_ophi_zero=True))


# --- criteria -------------------------------------------------------------------------

def criterion_1() -> Tuple[bool, str]:
    V = vir.vacuum(Fraction(1, 2))
    states = [vir.element(V, {p: 1}) for d in range(9) for p in vir.basis_at_degree(V, d)]
    forms = {}
    for s in states:
        fast = zhu.reduce_vacuum_rewrite(s)
        slow = zhu.reduce_vacuum_oracle(s)
        if fast != slow:
            return False, "routes disagree on %r" % (s,)
        forms[s] = fast
    pairs = 0
    for a in states:
        for b in states:
            if a.degree + b.degree <= 8:
                pairs += 1
                if zhu.reduce_vacuum(zhu.star(a, b)) != forms[a] * forms[b]:
                    return False, "homomorphism fails for %r * %r" % (a, b)
    return True, "%d basis elements, %d products" % (len(states), pairs)


def criterion_2() -> Tuple[bool, str]:
    c = Fraction(1, 2)
    V = vir.vacuum(c)
    w, one = vir.omega(c), vir.lowest_vector(V)
    checks = {
        "w o 1": zhu.circle(w, one) == vir.element(V, {(3,): 1, (2,): 2}),
        "w * w expansion": zhu.star(w, w) == vir.element(V, {(2, 2): 1, (3,): 2, (2,): 2}),
        "L(-2)^2 -> t^2+2t": zhu.reduce_vacuum(vir.element(V, {(2, 2): 1})) == zhu.NormalForm("VacuumPoly", {2: 1, 1: 2}),
        "w * w -> t^2": zhu.reduce_vacuum(zhu.star(w, w)) == zhu.NormalForm.t(2),
    }
    bad = [k for k, v in checks.items() if not v]
    return not bad, "failed: %s" % bad if bad else "all four identities exact"


def criterion_3() -> Tuple[bool, str]:
    t1 = zhu.NormalForm("VermaPoly", {(1, 0): 1})
    t2 = zhu.NormalForm("VermaPoly", {(0, 1): 1})
    count = 0
    for c, h in VERMA_PARAMS:
        M = vir.verma(c, h)
        V = vir.vacuum(c)
        v = vir.lowest_vector(M)
        r1 = vir.apply_virasoro(-2, v) + vir.apply_virasoro(-1, v) * 2 + vir.apply_virasoro(0, v)
        r2 = vir.apply_virasoro(-2, v) + vir.apply_virasoro(-1, v)
        if zhu.reduce_verma(r1) != t1 or zhu.reduce_verma(r2) != t2:
            return False, "generators wrong at (c,h)=(%s,%s)" % (c, h)
        for da in range(5):
            for ap in vir.basis_at_degree(V, da):
                a = vir.element(V, {ap: 1})
                pa = zhu.reduce_vacuum(a)
                for du in range(5):
                    for up in vir.basis_at_degree(M, du):
                        u = vir.element(M, {up: 1})
                        pu = zhu.reduce_verma(u)
                        if zhu.reduce_verma(zhu.star(a, u, "left")) != pa.left_act(pu):
                            return False, "left action fails for %r, %r" % (a, u)
                        if zhu.reduce_verma(zhu.star(a, u, "right")) != pa.right_act(pu):
                            return False, "right action fails for %r, %r" % (a, u)
                        count += 1
    return True, "3 parameter pairs, %d (a, u) pairs" % count


def borcherds_holds(a, b, u, l: int, m: int, n: int) -> bool:
    """Finite-bound form: sum binom(m,i)(a_{l+i}b)_{m+n-i}u
    = sum_{i<=wt b-n-1+deg u} (-1)^i binom(l,i) a_{m+l-i} b_{n+i} u
      + (-1)^{l+1} sum_{i<=wt a-m-1+deg u} (-1)^i binom(l,i) b_{n+l-i} a_{m+i} u."""
    wa, wb, du = vir.weight(a), vir.weight(b), u.degree
    lhs = vir.ModuleElement(u.module, {})
    i = 0
    while l + i < wa + wb:
        if binomial(m, i):
            s = vir.state_mode(a, l + i, b)
            if s:
                for part in s.homogeneous_parts().values():
                    lhs = lhs + vir.state_mode(part, m + n - i, u) * binomial(m, i)
        i += 1
    rhs = vir.ModuleElement(u.module, {})
    for i in range(max(wb - n - 1 + du, -1) + 1):
        rhs = rhs + vir.state_mode(a, m + l - i, vir.state_mode(b, n + i, u)) * (binomial(l, i) * (-1) ** i)
    sign = -1 if (l + 1) % 2 else 1
    for i in range(max(wa - m - 1 + du, -1) + 1):
        rhs = rhs + vir.state_mode(b, n + l - i, vir.state_mode(a, m + i, u)) * (sign * binomial(l, i) * (-1) ** i)
    return lhs == rhs


def criterion_4(samples: int = 400, seed: int = 20240611) -> Tuple[bool, str]:
    rng = random.Random(seed)
    c = Fraction(7, 10)
    V = vir.vacuum(c)
    mods = [vir.verma(c, Fraction(2, 9)), vir.dual_verma(c, Fraction(3, 7)), V]
    states = [vir.element(V, {p: 1}) for d in range(7) for p in vir.basis_at_degree(V, d)]
    done = 0
    tries = 0
    while done < samples and tries < 50 * samples:
        tries += 1
        a, b = rng.choice(states), rng.choice(states)
        M = rng.choice(mods)
        du = rng.randint(0, 4)
        basis = vir.basis_at_degree(M, du)
        if not basis:
            continue
        u = vir.element(M, {rng.choice(basis): 1})
        l, m, n = rng.randint(-3, 3), rng.randint(-3, 3), rng.randint(-3, 3)
        wa, wb = a.degree, b.degree
        # keep every intermediate vector at degree <= 6
        if max(wb + du - n - 1, wa + du - m - 1, wa + wb + du - l - m - n - 2, wa + wb - l - 1) > 6:
            continue
        if not borcherds_holds(a, b, u, l, m, n):
            return False, "fails at a=%r b=%r u=%r (l,m,n)=(%d,%d,%d)" % (a, b, u, l, m, n)
        done += 1
    return done == samples, "%d sampled instances over Verma, dual Verma and vacuum modules" % done


def criterion_5() -> Tuple[bool, str]:
    lines = []
    ok = True
    hom = it.fusion_dim_hom(1, 1).dimension
    for params in SOLVER_TUPLES:
        dims = []
        for D in SOLVER_DEPTHS:
            sol, pinned = solved(params, D)
            dims.append((sol.dimension, pinned.dimension))
            ok = ok and sol.dimension == hom == 1 and pinned.dimension == 0
        lines.append("%s: %s" % ("/".join(str(p) for p in params), dims))
    return ok, "(dim, pinned) per D=2,3,4; Hom side %d; %s" % (hom, "; ".join(lines))


def criterion_6() -> Tuple[bool, str]:
    checked = 0
    for params in SOLVER_TUPLES:
        for D in SOLVER_DEPTHS:
            sol, _ = solved(params, D)
            for fam in sol.basis:
                if it.l1_mode_relation_failures(fam):
                    return False, "fails for %s at D=%d" % (params, D)
                checked += 1
    return checked > 0, "%d solver families" % checked


def _random_av(rng, d):
    return zhu.AVModule(d, tuple(tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(d))
                                 for _ in range(d)))


def hom_brute_force(O2, O3, degree: int) -> int:
    """Dense Bareiss rank of the linearity equations for phi_{m,n}, m + n <= degree."""
    d2, d3 = O2.dimension, O3.dimension
    labels = [(m, s - m) for s in range(degree + 1) for m in range(s + 1)]
    pos = {lab: q for q, lab in enumerate(labels)}
    width = len(labels) * d2 * d3

    def var(lab, r, s):
        return pos[lab] * d2 * d3 + r * d2 + s

    rows = []
    for (m, n) in labels:
        if m + n == degree:
            continue
        for r in range(d3):
            for s in range(d2):
                row = [Fraction(0)] * width
                row[var((m, n + 1), r, s)] += 1
                for q in range(d2):
                    row[var((m, n), r, q)] -= O2.t_action[q][s]
                rows.append(row)
                row = [Fraction(0)] * width
                row[var((m + 1, n), r, s)] += 1
                for q in range(d3):
                    row[var((m, n), q, s)] -= O3.t_action[r][q]
                rows.append(row)
    return width - bareiss_rank(rows) if rows else width


def criterion_7(seed: int = 7) -> Tuple[bool, str]:
    rng = random.Random(seed)
    for d2 in (1, 2, 3):
        for d3 in (1, 2, 3):
            O2, O3 = _random_av(rng, d2), _random_av(rng, d3)
            sol = it.fusion_dim_hom(O2, O3)
            brute = hom_brute_force(O2, O3, 4)
            if not (sol.dimension == brute == d2 * d3):
                return False, "(%d,%d): got %d, brute force %d" % (d2, d3, sol.dimension, brute)
    return True, "all 9 shapes match dim2*dim3 and the Bareiss brute force"


def criterion_8() -> Tuple[bool, str]:
    window = ((-20, 0), (0, 19))  # 20 x 20
    m = fc.MonomialJKL(0, 0, -1)
    xy = fc.iota_expand(m, "x,y", window)
    if dict(xy.terms) != long_division_xy(-1, window):
        return False, "iota_{x,y} 1/(x-y) differs from long division"
    for l in (-2, -3):
        if dict(fc.iota_expand(fc.MonomialJKL(0, 0, l), "x,y", window).terms) != long_division_xy(l, window):
            return False, "iota_{x,y} (x-y)^%d differs from long division" % l
    # y,x: 1/(x-y) = -1/(y-x), the same division with the roles of x and y swapped
    yx = fc.iota_expand(m, "y,x", ((0, 19), (-20, 0)))
    swapped = {(b, a): -c for (a, b), c in long_division_xy(-1, window).items()}
    if dict(yx.terms) != swapped:
        return False, "iota_{y,x} 1/(x-y) differs from long division"
    cases = 0
    wide = ((-12, 12), (-12, 12))
    for j in range(-3, 4):
        for k in range(-3, 4):
            for l in range(4):
                target = polynomial_xy(j, k, l)
                mono = fc.MonomialJKL(j, k, l)
                for direction in ("x,y", "y,x"):
                    if dict(fc.iota_expand(mono, direction, wide).terms) != target:
                        return False, "%s differs for %r" % (direction, mono)
                win = ((-30, 12), (0, 12))  # x reaches j + k - 12 at the top (y-x) power
                third = fc.iota_expand(mono, "x,y-x", win)
                if k >= 0:
                    if fc.to_xy(third) != target:
                        return False, "x,y-x differs for %r" % (mono,)
                else:
                    # y^k is an infinite series in y-x; multiply back by y^{-k} and compare
                    back = third * fc.iota_expand(fc.MonomialJKL(0, -k, 0), "x,y-x", win)
                    if dict(back.terms) != dict(fc.iota_expand(fc.MonomialJKL(j, 0, l), "x,y-x", win).terms):
                        return False, "x,y-x re-multiplication differs for %r" % (mono,)
                cases += 1
    return True, "long division on a 20x20 window; %d polynomial cases in all three directions" % cases


def _random_jordan_data(rng, lam, dims):
    """L(0) per degree: (lam + d) + P J P^{-1} with Jordan blocks of size <= 3."""
    L0 = []
    for d, n in enumerate(dims):
        sizes = []
        left = n
        while left:
            s = rng.randint(1, min(3, left))
            sizes.append(s)
            left -= s
        J = [[Fraction(0)] * n for _ in range(n)]
        pos = 0
        for s in sizes:
            for r in range(s - 1):
                J[pos + r][pos + r + 1] = Fraction(1)
            pos += s
        # P unit upper triangular, P^{-1} by back substitution
        P = [[Fraction(int(i == j)) if j <= i else Fraction(0) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                P[i][j] = Fraction(rng.randint(-2, 2))
        Pinv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        for i in range(n - 1, -1, -1):
            for j in range(i + 1, n):
                if P[i][j]:
                    for k in range(n):
                        Pinv[i][k] -= P[i][j] * Pinv[j][k]
        from .exactla import mat_mul
        N = mat_mul(mat_mul(P, J), Pinv)
        L0.append(tuple(tuple(N[i][j] + (lam + d if i == j else 0) for j in range(n)) for i in range(n)))
    return lt.GradedOperatorData(lam, tuple(L0))


def _random_block_family(rng, dims1, dims2, dims3):
    blocks = {}
    for i in range(len(dims1)):
        for j in range(len(dims2)):
            for t in range(len(dims3)):
                k = i + j - t - 1
                blocks[(i, j, k)] = tuple(
                    tuple(tuple(Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(dims2[j]))
                          for _ in range(dims3[t]))
                    for _ in range(dims1[i]))
    return lt.BlockFamily(dims1, dims2, dims3, blocks)


def criterion_9(trials: int = 50, seed: int = 99) -> Tuple[bool, str]:
    rng = random.Random(seed)
    for trial in range(trials):
        dims = [tuple(rng.randint(1, 3) for _ in range(3)) for _ in range(3)]
        lams = [Fraction(rng.randint(-5, 5), rng.randint(1, 6)) for _ in range(3)]
        gs = [_random_jordan_data(rng, lam, d) for lam, d in zip(lams, dims)]
        phi = _random_block_family(rng, *dims)
        J = lt.from_z_graded(phi, *gs)
        if lt.to_z_graded(J) != phi:
            return False, "round trip fails in trial %d" % trial
        if J.log_degree > lt.log_degree_bound(*gs):
            return False, "log degree bound fails in trial %d" % trial
    # N = 0: the solver family and its L(-1) relation match the log recursion exactly
    params = SOLVER_TUPLES[0]
    sol, _ = solved(params, 2)
    phi = sol.basis[0]
    kind = phi.kind
    blocks = lt.blocks_from_mode_family(phi)
    gs = []
    for m, h in ((kind.W1, kind.h1), (kind.W2, kind.h2), (kind.W3, kind.h3)):
        L0 = tuple(tuple(tuple(r) for r in vir.mode_matrix(vir.omega(kind.c), 1, m, d)[0]) for d in range(3))
        gs.append(lt.GradedOperatorData(h, L0))
    J = lt.from_z_graded(blocks, *gs)
    lm1 = [vir.mode_matrix(vir.omega(kind.c), 0, kind.W1, d)[0] for d in range(2)]
    ok = (J.log_degree == 0 and lt.to_z_graded(J) == blocks
          and J.shift == kind.h3 - kind.h1 - kind.h2 and lt.l1_recursion(J, lm1))
    bumped = dict(phi.entries)
    key = ((1,), (), ())
    bumped[key] = bumped.get(key, 0) + 1
    bad = lt.blocks_from_mode_family(it.TruncatedModeFamily(kind, phi.depth, bumped))
    ok = ok and not lt.l1_recursion(lt.from_z_graded(bad, *gs), lm1)
    return ok, "%d random round trips; N = 0 specialization %s" % (trials, "exact" if ok else "fails")


def criterion_10() -> Tuple[bool, str]:
    expected = (1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42)
    M = vir.verma(Fraction(1, 2), Fraction(1, 16))
    V = vir.vacuum(Fraction(1, 2))
    for d in range(11):
        got = vir.basis_at_degree(M, d)
        if len(got) != expected[d] or sorted(got) != sorted(partitions_oracle(d, 1)):
            return False, "Verma degree %d" % d
        if sorted(vir.basis_at_degree(V, d)) != sorted(partitions_oracle(d, 2)):
            return False, "vacuum degree %d" % d
    return True, "d <= 10 for Verma and vacuum modules"


CRITERIA: Tuple[Tuple[int, str, Callable], ...] = (
    (1, "A(M_c) = C[t]: both routes to degree 8, homomorphism", criterion_1),
    (2, "worked identities", criterion_2),
    (3, "A(M_{c,h}) = C[t1,t2] and bimodule compatibility", criterion_3),
    (4, "Borcherds identity for state modes", criterion_4),
    (5, "intertwiner dimension = Hom dimension, pinned = 0", criterion_5),
    (6, "L(-1)-mode relation on solver families", criterion_6),
    (7, "fusionDimHom = dim2 * dim3", criterion_7),
    (8, "iota expansions", criterion_8),
    (9, "logarithmic round trip", criterion_9),
    (10, "graded dimensions", criterion_10),
)


def run_one(number: int) -> Result:
    for num, title, fn in CRITERIA:
        if num == number:
            start = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # report, do not hide
                ok, detail = False, "%s: %s" % (type(exc).__name__, exc)
            return Result(num, title, ok, detail, time.perf_counter() - start)
    raise KeyError(number)


def run_all() -> List[Result]:
    return [run_one(num) for num, _, _ in CRITERIA]


def format_line(r: Result) -> str:
    return "criterion %2d %s  %s (%.1fs): %s" % (r.number, "PASS" if r.passed else "FAIL", r.title, r.seconds, r.detail)


def format_table(results: List[Result]) -> str:
    lines = [format_line(r) for r in results]
    lines.append("%d/%d criteria pass" % (sum(r.passed for r in results), len(results)))
    return "\n".join(lines)

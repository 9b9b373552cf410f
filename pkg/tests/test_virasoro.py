import random
from fractions import Fraction as F

import pytest

from zhufusion import virasoro as vir
from zhufusion.selftest import borcherds_holds, partitions_oracle

C, H = F(3, 5), F(1, 3)
M = vir.verma(C, H)
V = vir.vacuum(C)
DUAL = vir.dual_verma(C, H)


def basis_elements(m, dmax):
    return [vir.element(m, {p: 1}) for d in range(dmax + 1) for p in vir.basis_at_degree(m, d)]


def test_basis_examples():
    assert vir.basis_at_degree(M, 2) == [(2,), (1, 1)]
    assert sorted(vir.basis_at_degree(V, 4)) == sorted(partitions_oracle(4, 2)) == [(2, 2), (4,)]
    assert len(vir.basis_at_degree(M, 5)) == 7


def test_basis_order_is_decreasing_lexicographic():
    for d in range(8):
        b = vir.basis_at_degree(M, d)
        assert b == sorted(b, reverse=True)


def test_illegal_monomials_rejected():
    with pytest.raises(ValueError):
        vir.element(M, {(1, 2): 1})
    with pytest.raises(ValueError):
        vir.element(V, {(2, 1): 1})
    with pytest.raises(ValueError):
        vir.ModuleId("Vacuum", C, F(1))


def test_virasoro_examples():
    v = vir.lowest_vector(M)
    assert vir.apply_virasoro(1, vir.apply_virasoro(-1, v)) == v * (2 * H)
    assert vir.apply_virasoro(2, vir.apply_virasoro(-2, v)) == v * (4 * H + C / 2)
    for u in basis_elements(M, 4):
        assert vir.apply_virasoro(0, u) == u * (H + u.degree)


@pytest.mark.parametrize("module", [M, V, DUAL], ids=["verma", "vacuum", "dual"])
def test_commutator_relations(module):
    for u in basis_elements(module, 3):
        for m in range(-3, 4):
            for n in range(-3, 4):
                lhs = vir.apply_virasoro(m, vir.apply_virasoro(n, u)) - vir.apply_virasoro(n, vir.apply_virasoro(m, u))
                rhs = vir.apply_virasoro(m + n, u) * (m - n)
                if m + n == 0:
                    rhs = rhs + u * (F(m ** 3 - m, 12) * C)
                assert lhs == rhs, (u, m, n)


def test_dual_action_is_transpose():
    rng = random.Random(5)
    for _ in range(40):
        n = rng.randint(-3, 3)
        d = rng.randint(0, 4)
        fb = vir.basis_at_degree(DUAL, d)
        f = vir.element(DUAL, {p: rng.randint(-3, 3) for p in fb})
        if d + n < 0:
            continue
        ub = vir.basis_at_degree(M, d + n)
        if not ub:
            continue
        u = vir.element(M, {p: rng.randint(-3, 3) for p in ub})
        # <L(n) f, u> = <f, L(-n) u>
        assert vir.pairing(vir.apply_virasoro(n, f), u) == vir.pairing(f, vir.apply_virasoro(-n, u))


def test_pairing_examples():
    f = vir.lowest_vector(DUAL)
    assert vir.pairing(f, vir.lowest_vector(M)) == 1
    assert vir.pairing(vir.element(DUAL, {(1,): 1}), vir.element(M, {(2,): 1})) == 0
    with pytest.raises(ValueError):
        vir.pairing(f, vir.lowest_vector(vir.verma(C, F(1, 7))))


def test_state_mode_examples():
    v = vir.lowest_vector(M)
    w = vir.omega(C)
    assert vir.state_mode(w, 1, v) == v * H
    one = vir.lowest_vector(V)
    for k in range(-3, 3):
        u = vir.element(M, {(2, 1): 1})
        assert vir.state_mode(one, k, u) == (u if k == -1 else u * 0)


def normal_ordered_ww(k, u):
    """(w_{-1} w)_k u = sum_{j<0} L(j-1) L(k-2-j) u + sum_{j>=0} L(k-2-j) L(j-1) u."""
    L = vir.apply_virasoro
    out = u * 0
    for j in range(k - 2 - u.degree - 1, 0):
        out = out + L(j - 1, L(k - 2 - j, u))
    for j in range(0, u.degree + 2):
        out = out + L(k - 2 - j, L(j - 1, u))
    return out


def test_composite_mode_against_normal_ordering():
    a = vir.element(V, {(2, 2): 1})
    v = vir.lowest_vector(M)
    assert vir.state_mode(a, 3, v) == v * (2 * H + H * H)
    for u in basis_elements(M, 4):
        for k in range(-2, 6):
            assert vir.state_mode(a, k, u) == normal_ordered_ww(k, u), (k, u)


def test_grading_and_truncation():
    for ap in [(2,), (3,), (2, 2), (4,), (3, 2)]:
        a = vir.element(V, {ap: 1})
        for u in basis_elements(M, 3):
            for k in range(-3, 8):
                out = vir.state_mode(a, k, u)
                if k >= sum(ap) + u.degree:
                    assert not out
                if out:
                    assert out.degrees() == [sum(ap) + u.degree - k - 1]


def test_inhomogeneous_state_rejected():
    with pytest.raises(ValueError):
        vir.state_mode(vir.element(V, {(2,): 1, (3,): 1}), 0, vir.lowest_vector(M))


def test_borcherds_small_exhaustive():
    states = [vir.element(V, {p: 1}) for p in [(), (2,), (3,)]]
    for a in states:
        for b in states:
            for u in basis_elements(M, 2):
                for l in range(-2, 3):
                    for m in range(-2, 3):
                        for n in range(-2, 3):
                            assert borcherds_holds(a, b, u, l, m, n)


def test_dimensions():
    expected = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
    assert [len(vir.basis_at_degree(M, d)) for d in range(11)] == expected
    assert [len(vir.basis_at_degree(V, d)) for d in range(11)] == [len(partitions_oracle(d, 2)) for d in range(11)]


def test_element_json_round_trip():
    for m in (M, V, DUAL):
        for u in basis_elements(m, 3):
            e = u * F(-2, 7) + vir.lowest_vector(m)
            assert vir.ModuleElement.from_json(e.to_json()) == e

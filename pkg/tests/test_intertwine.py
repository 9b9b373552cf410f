import random
from fractions import Fraction as F

import pytest

from zhufusion import intertwine as it
from zhufusion import virasoro as vir
from zhufusion import zhu
from zhufusion.formalcalc import TruncationError
from zhufusion.selftest import SOLVER_TUPLES, solved

TUPLE = SOLVER_TUPLES[0]


def test_generalized_verma():
    assert it.generalized_verma(F(1, 3), F(1), 0).dims == (1,)
    assert it.generalized_verma(F(1, 3), F(1), 2).dims == (1, 1, 2)
    m = it.generalized_verma(F(1, 3), F(1), 2).module
    v = vir.lowest_vector(m)
    assert not vir.apply_virasoro(1, v) and not vir.apply_virasoro(2, v)


def test_unit_rows_vanish():
    system = it.build_constraints(*TUPLE, 2)
    assert not [p for p in system.provenance if p[0] != "pin" and p[0].a == ()]


def test_rows_grow_with_window():
    counts = [len(it.build_constraints(*TUPLE, D).rows) for D in (1, 2, 3)]
    assert counts[0] < counts[1] < counts[2]


def test_degree_zero_window_is_unconstrained():
    system = it.build_constraints(*TUPLE, 0)
    assert system.keys == [((), (), ())] and system.rows == []
    assert it.solve_mode_families(system).dimension == 1


def test_lowest_degree_instance_is_the_action_compatibility():
    # a = w, (l, m, n) = (0, 1, -1) on lowest weight vectors:
    # Phi(L(-1)v; 0) + h1 Phi(v; -1) = (h3 - h2) Phi(v; -1); the first term needs D >= 1
    c, h1, h2, h3 = TUPLE
    inst = it.Instance((2,), (), (), 0, 1, -1)
    assert not it.is_interior(inst, 0) and it.is_interior(inst, 1)
    system = it.build_constraints(*TUPLE, 1)
    col = system.column()
    rows = it.instance_rows(system.kind, inst, 1, col)
    assert rows == {(): {col[((1,), (), ())]: F(1), col[((), (), ())]: h1 + h2 - h3}}


def test_system_rows_are_interior():
    system = it.build_constraints(*TUPLE, 2)
    for prov in system.provenance:
        inst, _ = prov
        assert it.is_interior(inst, 2)


def test_solutions_and_pins():
    sol, pinned = solved(TUPLE, 3)
    assert (sol.dimension, pinned.dimension) == (1, 0)
    phi = sol.basis[0]
    assert it.extract_hom(phi).matrix == ((1,),)
    assert it.grading_ok(phi)
    assert not it.l1_mode_relation_failures(phi)


def test_zero_family_is_a_solution():
    system = it.build_constraints(*TUPLE, 2)
    zero = it.TruncatedModeFamily(system.kind, 2, {})
    for prov in system.provenance[:200]:
        assert it.check_borcherds_residual(zero, prov[0])
    assert it.extract_hom(zero).matrix == ((0,),)


@pytest.mark.parametrize("params", SOLVER_TUPLES)
def test_solver_family_satisfies_every_instance_directly(params):
    sol, _ = solved(params, 2)
    phi = sol.basis[0]
    system = it.build_constraints(*params, 2)
    for inst in {p[0] for p in system.provenance}:
        assert it.check_borcherds_residual(phi, inst)


def test_perturbation_is_detected():
    sol, _ = solved(TUPLE, 2)
    phi = sol.basis[0]
    system = it.build_constraints(*TUPLE, 2)
    insts = sorted({p[0] for p in system.provenance}, key=repr)
    rng = random.Random(11)
    for key in rng.sample(sorted(phi.entries), 5):
        bumped = dict(phi.entries)
        bumped[key] += 1
        bad = it.TruncatedModeFamily(phi.kind, phi.depth, bumped)
        assert not all(it.check_borcherds_residual(bad, i) for i in insts)


def test_non_interior_instance_rejected():
    sol, _ = solved(TUPLE, 2)
    with pytest.raises(TruncationError):
        it.check_borcherds_residual(sol.basis[0], it.Instance((2,), (1, 1), (), -5, 0, 0))


def test_extract_hom_is_linear():
    sol, _ = solved(TUPLE, 2)
    phi = sol.basis[0]
    other = it.TruncatedModeFamily(phi.kind, 2, {((), (), ()): F(2), ((1,), (), ()): F(5)})
    combo = phi * F(3, 4) + other
    assert it.extract_hom(combo).matrix == ((F(3, 4) + 2,),)


def test_ophi_factors_through_zhu_bimodule():
    # o^Phi(u) v_{h2} = p(h3, h2) o^Phi(v_{h1}) v_{h2} with p = [u] in C[t1, t2]
    for params in SOLVER_TUPLES:
        sol, _ = solved(params, 3)
        assert it.ophi_matches_zhu(sol.basis[0], lambda u: zhu.reduce_verma(u, check=False)) == []


def test_family_json_round_trip():
    sol, _ = solved(TUPLE, 2)
    phi = sol.basis[0]
    assert it.TruncatedModeFamily.from_json(phi.to_json()) == phi


def test_family_rejects_out_of_window_entries():
    with pytest.raises(TruncationError):
        it.TruncatedModeFamily(it.IntertwinerType(*TUPLE), 1, {((2,), (), ()): F(1)})


def test_fusion_dim_hom_examples():
    assert it.fusion_dim_hom(1, 1).dimension == 1
    two = zhu.AVModule(2, ((F(1), F(1)), (F(0), F(1))))
    three = zhu.AVModule(3, ((F(1, 2), 0, 0), (0, F(2), 1), (0, 0, F(2))))
    sol = it.fusion_dim_hom(two, three)
    assert sol.dimension == sol.brute_force_dimension == 6
    one = zhu.AVModule(1, ((F(-7, 3),),))
    assert it.fusion_dim_hom(one, two).dimension == 2


def test_extension_satisfies_the_tensor_relations():
    O2 = zhu.AVModule(2, ((F(1), F(2)), (F(0), F(3))))
    O3 = zhu.AVModule(2, ((F(0), F(1)), (F(-1), F(0))))
    f0 = it.fusion_dim_hom(O2, O3).basis[1]
    from zhufusion.exactla import mat_mul
    for m in range(3):
        for n in range(3):
            here = [list(r) for r in it.extend_hom(f0, O2, O3, m, n).matrix]
            right = [list(r) for r in it.extend_hom(f0, O2, O3, m, n + 1).matrix]
            up = [list(r) for r in it.extend_hom(f0, O2, O3, m + 1, n).matrix]
            assert right == mat_mul(here, [list(r) for r in O2.t_action])
            assert up == mat_mul([list(r) for r in O3.t_action], here)

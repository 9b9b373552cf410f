import random
from fractions import Fraction as F

import pytest

from zhufusion import intertwine as it
from zhufusion import logtransform as lt
from zhufusion import virasoro as vir
from zhufusion.selftest import SOLVER_TUPLES, _random_block_family, _random_jordan_data, solved


def scalar_data(lam, dims):
    return lt.GradedOperatorData(F(lam), tuple(
        tuple(tuple(F(lam) + d if r == c else F(0) for c in range(n)) for r in range(n))
        for d, n in enumerate(dims)))


def solver_setup(depth=2):
    sol, _ = solved(SOLVER_TUPLES[0], depth)
    phi = sol.basis[0]
    kind = phi.kind
    gs = []
    for m, h in ((kind.W1, kind.h1), (kind.W2, kind.h2), (kind.W3, kind.h3)):
        L0 = tuple(tuple(tuple(r) for r in vir.mode_matrix(vir.omega(kind.c), 1, m, d)[0])
                   for d in range(depth + 1))
        gs.append(lt.GradedOperatorData(h, L0))
    lm1 = [vir.mode_matrix(vir.omega(kind.c), 0, kind.W1, d)[0] for d in range(depth)]
    return phi, lt.blocks_from_mode_family(phi), gs, lm1


def test_jordan_split_examples():
    g = scalar_data(F(1, 3), (1, 2))
    assert g.nu == (1, 1) and g.max_nilpotency == 1
    block = lt.jordan_split([[[F(2), F(1)], [F(0), F(2)]]], F(2))
    assert block.N == (((0, 1), (0, 0)),) and block.nu == (2,)
    three = lt.jordan_split([[[5, 1, 0], [0, 5, 1], [0, 0, 5]]], 5)
    assert three.nu == (3,)
    with pytest.raises(ValueError):
        lt.jordan_split([[[F(2), F(0)], [F(0), F(3)]]], F(2))
    with pytest.raises(ValueError):
        lt.jordan_split([[[1]], [[1]]], 1)


def test_graded_data_json_round_trip():
    g = _random_jordan_data(random.Random(2), F(-3, 4), (2, 3, 1))
    assert lt.GradedOperatorData.from_json(g.to_json()) == g


def test_x_pow_l0_on_a_jordan_block():
    g = lt.jordan_split([[[F(1, 2), F(1)], [F(0), F(1, 2)]]], F(1, 2))
    up = lt.x_pow_l0(g, 1, (0, 1), 0)
    assert up.offset == F(1, 2) and up.terms == {(0, 0): (0, 1), (0, 1): (1, 0)}
    down = lt.x_pow_l0(g, -1, (0, 1), 0)
    assert down.offset == F(-1, 2) and down.terms == {(0, 0): (0, 1), (0, 1): (-1, 0)}
    assert up.log_degree == 1
    with pytest.raises(ValueError):
        lt.x_pow_l0(g, 2, (0, 1), 0)


def test_x_ddx_of_x_pow_l0_is_l0():
    rng = random.Random(5)
    for _ in range(20):
        g = _random_jordan_data(rng, F(rng.randint(-4, 4), rng.randint(1, 5)), (3, 2))
        for d in range(2):
            v = tuple(F(rng.randint(-3, 3)) for _ in range(g.dims[d]))
            assert lt.x_pow_l0(g, 1, v, d).x_ddx() == lt.x_pow_l0(g, 1, lt.l0_apply(g, v, d), d)


def test_semisimple_data_gives_log_degree_zero():
    rng = random.Random(3)
    dims = (1, 2, 2)
    gs = [scalar_data(F(k, 7), dims) for k in (1, 2, 4)]
    phi = _random_block_family(rng, dims, dims, dims)
    J = lt.from_z_graded(phi, *gs)
    assert J.components == (phi,) and J.shift == F(1, 7)
    assert lt.log_degree_bound(*gs) == 0


def test_single_jordan_block_in_the_target():
    g1 = scalar_data(0, (1, 1))
    g2 = scalar_data(0, (1, 1))
    g3 = lt.jordan_split([[[0, 1], [0, 0]], [[1, 0], [0, 1]]], 0)
    phi = lt.BlockFamily((1, 1), (1, 1), (2, 2), {(0, 0, -1): ((((0,), (1,))),),
                                                   (1, 0, -1): ((((1,), (1,))),),
                                                   (0, 0, -2): ((((2,), (3,))),)})
    J = lt.from_z_graded(phi, g1, g2, g3)
    assert lt.log_degree_bound(g1, g2, g3) == 1 and J.log_degree == 1
    # J^(1) = N3 Phi, nonzero only where the target degree carries the block
    assert J.components[1].blocks == {(0, 0, -1): (((F(1),), (F(0),)),)}
    assert J.components[0] == phi


def test_round_trip_on_random_data():
    rng = random.Random(17)
    for _ in range(10):
        dims = [tuple(rng.randint(1, 3) for _ in range(2)) for _ in range(3)]
        gs = [_random_jordan_data(rng, F(rng.randint(-3, 3), 2), d) for d in dims]
        phi = _random_block_family(rng, *dims)
        J = lt.from_z_graded(phi, *gs)
        assert lt.to_z_graded(J) == phi
        assert J.log_degree <= lt.log_degree_bound(*gs)


def test_zero_family():
    g = _random_jordan_data(random.Random(1), F(0), (2, 2))
    phi = lt.BlockFamily((2, 2), (2, 2), (2, 2), {})
    J = lt.from_z_graded(phi, g, g, g)
    assert J.log_degree == -1 and lt.to_z_graded(J) == phi
    assert lt.l1_recursion(J, [[[1, 0], [0, 1]]])


def test_dimension_mismatch_rejected():
    g = scalar_data(0, (1, 2))
    with pytest.raises(ValueError):
        lt.from_z_graded(lt.BlockFamily((1, 1), (1, 2), (1, 2), {}), g, g, g)


def test_block_family_validates_shape_and_window():
    with pytest.raises(ValueError):
        lt.BlockFamily((1,), (1,), (1,), {(0, 0, 3): (((1,),),)})
    with pytest.raises(ValueError):
        lt.BlockFamily((1,), (1,), (2,), {(0, 0, -1): (((1,),),)})
    fam = _random_block_family(random.Random(4), (1, 2), (2, 1), (1, 1))
    assert lt.BlockFamily.from_json(fam.to_json()) == fam


def test_solver_family_satisfies_the_log_recursion():
    phi, blocks, gs, lm1 = solver_setup()
    J = lt.from_z_graded(blocks, *gs)
    assert J.log_degree == 0 and lt.l1_recursion(J, lm1)


def test_perturbed_family_breaks_the_log_recursion():
    phi, _, gs, lm1 = solver_setup()
    bumped = dict(phi.entries)
    bumped[((1,), (1,), ())] = bumped.get(((1,), (1,), ()), 0) + 1
    bad = lt.blocks_from_mode_family(it.TruncatedModeFamily(phi.kind, phi.depth, bumped))
    assert not lt.l1_recursion(lt.from_z_graded(bad, *gs), lm1)


def tensored(B, s1, s2, s3):
    phi, blocks, gs, lm1 = solver_setup()
    big = lt.tensor_family(blocks, B, s1, s2, s3)
    tg = [lt.tensor_with_jordan(g, s) for g, s in zip(gs, (s1, s2, s3))]
    one = [[F(int(i == j)) for j in range(s1)] for i in range(s1)]
    tl = [lt.kron(M, one) for M in lm1]
    return lt.from_z_graded(big, *tg), tg, tl


def test_intertwining_twist_keeps_the_recursion():
    # B commutes with the Jordan blocks, so the log components cancel
    I2 = [[1, 0], [0, 1]]
    J, tg, tl = tensored([I2], 1, 2, 2)
    assert J.log_degree == 0 and lt.l1_recursion(J, tl)


def test_log_degree_can_reach_the_sum_bound():
    # three size-2 blocks and a B that does not intertwine them
    B = [[[0, 0], [1, 0]], [[0, 0], [0, 0]]]
    J, tg, _ = tensored(B, 2, 2, 2)
    assert max(g.max_nilpotency for g in tg) == 2
    assert J.log_degree == lt.log_degree_bound(*tg) == 3

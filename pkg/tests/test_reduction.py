import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbpart.brute import enumerate_feasible
from wbpart.model import ClusterBounds, Instance, Item, Partition, WeightDomain, is_feasible, stacked_utility
from wbpart.reduction import (
    DecodeError,
    InfeasiblePartition,
    ReductionError,
    build,
    build_p1,
    build_p2,
    build_p3,
    decode_solution,
    encode_assignment,
    slack_caps,
)
from wbpart.synthetic import RandomInstanceConfig, random_instance


def exact_pair():
    dom = WeightDomain.from_vectors([(1, 1)])
    items = [Item(j, 0, ((0, 0),)) for j in range(2)]
    return Instance(dom, items, [ClusterBounds.exact((1,))] * 2)


def test_p1_hand_assembly():
    sys = build_p1(exact_pair())
    assert sys.N == 4
    assert sys.block_top == ((1, 0), (0, 1))
    assert sys.block_bottom == (1, 1)
    assert sys.rhs == (1, 1, 1, 1)
    assert sys.dense_matrix() == [[1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 0, 0], [0, 0, 1, 1]]


def test_p1_dimensions_and_upper_bounds():
    dom = WeightDomain.from_vectors([(1, 2), (3, 1)])
    items = [Item(j, j % 2, ((1, 2), (3, 4))) for j in range(3)]
    inst = Instance(dom, items, [ClusterBounds.exact((1,))] * 2)
    sys = build_p1(inst)
    assert sys.N == 3 * 2 * 2
    assert sys.c == len(sys.objective_matrix) == 2 * 2
    # item 0 uses entry 0, item 1 entry 1
    assert sys.upper[:8] == (1, 1, 0, 0, 0, 0, 1, 1)
    # m copies of the utility block per item
    assert sys.objective_blocks[0][0] == (1, 0, 1, 0)


def test_p1_preconditions():
    dom = WeightDomain.from_vectors([(1, 1)])
    wide = Instance(dom, [Item(0, 0, ((0, 0),))], [ClusterBounds((0,), (1,))] * 2)
    with pytest.raises(ReductionError):
        build_p1(wide)
    two = WeightDomain((((1,), (1,)),))
    with pytest.raises(ReductionError):
        build_p1(Instance(two, [Item(0, 0, ((0,),))], [ClusterBounds.exact((1, 1))]))
    with pytest.raises(ReductionError):
        build_p2(Instance(two, [Item(0, 0, ((0,),))], [ClusterBounds.exact((1, 1))]))


def test_p2_single_item_slacks():
    dom = WeightDomain.from_vectors([(5,)])
    inst = Instance(dom, [Item(0, 0, ((1,),))], [ClusterBounds((3,), (7,))])
    sys = build_p2(inst)
    assert sys.nu == (5,)
    x = encode_assignment(sys, Partition((0,)), inst)
    assert x[sys.slack_column("+", 0, 0)] == 2
    assert x[sys.slack_column("-", 0, 0)] == 2
    dec = decode_solution(sys, x)
    assert dec.slack_plus == ((2,),) and dec.slack_minus == ((2,),)


def test_p2_block_width_and_later_slacks_fixed():
    dom = WeightDomain.from_vectors([(1, 2), (2, 1), (1, 1)])
    items = [Item(j, j % 3, ((0, 0),)) for j in range(3)]
    sys = build_p2(Instance(dom, items, [ClusterBounds((0,), (9,))] * 2))
    assert sys.t == 2 * 2 + 3 * 2 == 10
    for j in range(1, 3):
        assert sys.upper[j * sys.t : j * sys.t + 4] == (0, 0, 0, 0)


def test_p3_block_shape():
    dom = WeightDomain((((1, 2), (3, 4)),))
    inst = Instance(dom, [Item(0, 0, ((0, 0),))], [ClusterBounds((0, 0), (9, 9))] * 2)
    sys = build_p3(inst)
    assert sys.t == 2 * 2 * 2 + 1 * 2 == 10
    assert sys.r1 == len(sys.block_top) == 8


def test_slack_caps_componentwise_absolute_sum():
    dom = WeightDomain((((1,), (2,)), ((-3,), (4,))))
    items = [Item(0, 0, ((0,),)), Item(1, 1, ((0,),))]
    inst = Instance(dom, items, [ClusterBounds((-9, -9), (9, 9))])
    assert slack_caps(inst) == (4, 6)


def test_encode_single_item_exact():
    dom = WeightDomain.from_vectors([(2,)])
    inst = Instance(dom, [Item(0, 0, ((0,),))], [ClusterBounds.exact((2,))])
    assert encode_assignment(build_p1(inst), Partition((0,)), inst) == (1,)


def test_encode_rejects_infeasible():
    inst = exact_pair()
    with pytest.raises(InfeasiblePartition) as err:
        encode_assignment(build_p1(inst), Partition((0, 0)), inst)
    assert not err.value.report.feasible


def test_decode_rejects_two_ones():
    inst = exact_pair()
    sys = build_p1(inst)
    with pytest.raises(DecodeError):
        decode_solution(sys, (1, 1, 0, 0))
    with pytest.raises(DecodeError):
        decode_solution(sys, (0, 0, 0, 1, 0))


def test_dump_text_lists_matrix():
    text = build_p1(exact_pair()).dump_text()
    assert "1 0 1 0" in text and text.splitlines()[0].startswith("# p1")


@pytest.mark.parametrize("model", ["p1", "p2", "p3"])
def test_roundtrip_and_projection(model):
    rng = random.Random(7)
    for _ in range(40):
        cfg = RandomInstanceConfig(n=rng.randint(1, 6), p=rng.randint(1, 3), s=rng.randint(1, 2), m=rng.randint(1, 3), d=2)
        inst, part = random_instance(rng, model, cfg)
        sys = build(inst, model)
        x = encode_assignment(sys, part, inst)
        assert sys.is_feasible(x)
        assert decode_solution(sys, x).partition == part
        assert sys.project(x) == stacked_utility(inst, part)


def test_p3_with_exact_bounds_matches_p1_feasibility():
    rng = random.Random(3)
    for _ in range(25):
        cfg = RandomInstanceConfig(n=rng.randint(1, 5), p=rng.randint(1, 3), m=rng.randint(1, 3))
        inst, _ = random_instance(rng, "p1", cfg)
        s1, s3 = build_p1(inst), build_p3(inst)
        parts = list(enumerate_feasible(inst))
        for part in parts:
            assert s1.is_feasible(encode_assignment(s1, part, inst))
            assert s3.is_feasible(encode_assignment(s3, part, inst))


def box_points(sys):
    """All integer points of a tiny system, by enumerating assignments and solving the slacks."""
    import itertools

    n, t, sw = sys.n, sys.t, sys.slack_width
    for choice in itertools.product(range(t - sw), repeat=n):
        x = [0] * sys.N
        for j, k in enumerate(choice):
            x[j * t + sw + k] = 1
        if any(x[k] > sys.upper[k] for k in range(sys.N)):
            continue
        if sw:
            top = sys.matvec(x)[: sys.r1]
            sp = sys.s * sys.p
            for r in range(sp):
                x[r] = sys.rhs[r] - top[r]
                x[sp + r] = top[sp + r] - sys.rhs[sp + r]
        yield x


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["p1", "p2", "p3"]))
def test_feasible_points_decode_to_feasible_partitions(seed, model):
    rng = random.Random(seed)
    cfg = RandomInstanceConfig(n=rng.randint(1, 4), p=rng.randint(1, 3), s=rng.randint(1, 2), m=rng.randint(1, 2))
    inst, _ = random_instance(rng, model, cfg)
    sys = build(inst, model)
    decoded = set()
    for x in box_points(sys):
        if sys.is_feasible(x):
            part = decode_solution(sys, x).partition
            assert is_feasible(inst, part)
            decoded.add(part)
    assert decoded == set(enumerate_feasible(inst))


def test_objective_zero_on_slack_columns():
    rng = random.Random(11)
    inst, _ = random_instance(rng, "p3", RandomInstanceConfig(n=3, p=2, s=2, m=2, d=2))
    sys = build_p3(inst)
    for blk in sys.objective_blocks:
        for row in blk:
            assert all(a == Fraction(0) for a in row[: sys.slack_width])

import random
from fractions import Fraction

import numpy as np
import pytest

from wbpart.augmentation import (
    AugmentationError,
    SolverConfig,
    fiber_test_set,
    graver_best_step,
    linear_value,
    max_step,
    solve_linear,
)
from wbpart.brute import brute_optimum
from wbpart.model import ClusterBounds, Instance, Item, Partition, WeightDomain
from wbpart.objectives import linear, sum_objective
from wbpart.reduction import build, build_p1, encode_assignment
from wbpart.synthetic import RandomInstanceConfig, random_instance


def test_max_step_examples():
    assert max_step((0, 1), (1, -1), (0, 0), (1, 1)) == 1
    assert max_step((0, 0), (1, -1), (0, 0), (9, 9)) == 0
    assert max_step((0, 5), (1, -2), (0, 0), (9, 5)) == 2
    with pytest.raises(ValueError):
        max_step((0,), (0,), (0,), (1,))


def test_graver_best_step_example():
    g, alpha, imp = graver_best_step((0, 2), [(1, -1), (-1, 1)], (3, 1), (0, 0), (2, 2))
    assert (g, alpha, imp) == ((1, -1), 2, 4)


def test_graver_best_step_none_at_optimum():
    assert graver_best_step((2, 0), [(1, -1), (-1, 1)], (3, 1), (0, 0), (2, 2)) is None


def test_graver_best_step_tie_goes_to_smaller_vector():
    basis = [(0, 1, -1), (1, -1, 0), (1, 0, -1)]
    # (0,1,-1) and (1,0,-1) both gain 1 per unit with alpha 1
    g, alpha, imp = graver_best_step((0, 0, 1), basis, (1, 1, 0), (0, 0, 0), (1, 1, 1))
    assert g == (0, 1, -1) and alpha == 1 and imp == 1


def test_alpha_max_is_best_for_linear_objective():
    rng = random.Random(2)
    for _ in range(50):
        g = tuple(rng.randint(-2, 2) for _ in range(3))
        if not any(g):
            continue
        x = tuple(rng.randint(0, 5) for _ in range(3))
        c = tuple(rng.randint(-3, 3) for _ in range(3))
        amax = max_step(x, g, (0,) * 3, (5,) * 3)
        gains = [a * sum(ci * gi for ci, gi in zip(c, g)) for a in range(amax + 1)]
        best = max(range(amax + 1), key=lambda a: (gains[a], -a))
        if gains[best] > 0:
            assert best == amax


def p1_four_items():
    dom = WeightDomain.from_vectors([(1, 1)])
    utils = [(3, -1), (2, 5), (-4, 0), (1, 1)]
    items = [Item(j, 0, (u,)) for j, u in enumerate(utils)]
    return Instance(dom, items, [ClusterBounds.exact((2,))] * 2)


def test_p1_four_items_matches_brute():
    inst = p1_four_items()
    sys = build_p1(inst)
    x0 = encode_assignment(sys, Partition((0, 0, 1, 1)), inst)
    spec = sum_objective(2)
    x, trace = solve_linear(sys, x0, spec.weights)
    res = brute_optimum(inst, spec)
    assert res.feasible_count == 6
    assert linear_value(sys, x, spec.weights) == res.value == trace.final_objective


def test_optimal_start_gives_empty_trace():
    inst = p1_four_items()
    sys = build_p1(inst)
    spec = sum_objective(2)
    best = brute_optimum(inst, spec).partition
    x0 = encode_assignment(sys, best, inst)
    x, trace = solve_linear(sys, x0, spec.weights)
    assert x == x0 and trace.steps == [] and trace.start_objective == trace.final_objective


def test_infeasible_start_rejected():
    sys = build_p1(p1_four_items())
    with pytest.raises(ValueError):
        solve_linear(sys, (0,) * sys.N, (1, 1))


def test_step_cap():
    inst = p1_four_items()
    sys = build_p1(inst)
    x0 = encode_assignment(sys, Partition((0, 0, 1, 1)), inst)
    with pytest.raises(AugmentationError):
        solve_linear(sys, x0, (-1, 1), config=SolverConfig(max_steps=0))


def run_random(rng, model):
    cfg = RandomInstanceConfig(n=rng.randint(1, 6), p=rng.randint(1, 3), s=rng.randint(1, 2), m=rng.randint(1, 3))
    inst, part = random_instance(rng, model, cfg)
    sys = build(inst, model)
    w = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(sys.c)]
    x0 = encode_assignment(sys, part, inst)
    return inst, sys, x0, w


@pytest.mark.parametrize("model", ["p1", "p2", "p3"])
def test_random_instances_match_brute(model):
    rng = random.Random({"p1": 1, "p2": 2, "p3": 3}[model])
    for _ in range(25):
        inst, sys, x0, w = run_random(rng, model)
        x, trace = solve_linear(sys, x0, w)
        assert linear_value(sys, x, w) == brute_optimum(inst, linear(w)).value
        # trace bookkeeping
        assert all(st.delta > 0 for st in trace.steps)
        assert trace.final_objective == trace.start_objective + sum(st.delta for st in trace.steps)
        assert trace.final_objective == linear_value(sys, x, w)


def test_optimality_certificate_and_feasibility_of_steps():
    rng = random.Random(9)
    for _ in range(15):
        inst, sys, x0, w = run_random(rng, "p3")
        ts = fiber_test_set(sys)
        x, trace = solve_linear(sys, x0, w, test_set=ts)
        cur = list(x0)
        for st in trace.steps:
            cur = [a + st.alpha * b for a, b in zip(cur, st.g)]
            assert sys.is_feasible(cur)
        assert tuple(cur) == x
        coeffs = sys.objective_columns(w)
        for g in ts.vectors:
            amax = max_step(x, g, sys.lower, sys.upper)
            gain = sum(c * int(a) for c, a in zip(coeffs, g))
            for a in range(1, amax + 1):
                assert a * gain <= 0


def test_test_set_kernel_and_fixed_columns():
    rng = random.Random(5)
    inst, sys, _, _ = run_random(rng, "p3")
    ts = fiber_test_set(sys)
    A = np.array(sys.dense_matrix())
    fixed = [k for k in range(sys.N) if sys.upper[k] == sys.lower[k]]
    for g in ts.vectors:
        assert not (A @ g).any()
        assert not g[fixed].any()

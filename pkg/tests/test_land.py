import random
from fractions import Fraction

import pytest

from wbpart.brute import brute_optimum, enumerate_feasible
from wbpart.land import (
    Farmer,
    LandInstance,
    Lot,
    approximation_factor,
    evaluate_f1,
    evaluate_f2,
    evaluate_f3,
    f2_objective,
    generate_instance,
    objective_f1,
    objective_f3,
    run_algorithm1,
    solve_land,
)
from wbpart.objectives import clustering_body, linear
from wbpart.model import ModelError, Partition, is_feasible, stacked_utility
from wbpart.reduction import InfeasiblePartition


def village(farmsteads, lots, original, lower=Fraction(1), upper=Fraction(100)):
    """Single-feature village; ``lots`` holds ``(location, size)`` pairs."""
    p = len(farmsteads)
    lot_objs = [Lot(j, loc, size, ((size,) * p,)) for j, (loc, size) in enumerate(lots)]
    totals = [0] * p
    for j, i in enumerate(original):
        totals[i] += lots[j][1]
    farmers = [Farmer(i, v, (totals[i],), (lower,), (upper,)) for i, v in enumerate(farmsteads)]
    return LandInstance(tuple(lot_objs), tuple(farmers), Partition(tuple(original)))


def test_f1_two_unit_lots():
    li = village([(0, 0)], [((1, 0), 1), ((0, 1), 1)], [0, 0])
    assert evaluate_f1(li, li.original) == 2


def test_coincident_lot_contributes_nothing():
    li = village([(3, 4)], [((3, 4), 5)], [0])
    assert evaluate_f1(li, li.original) == 0


def test_f1_minimizer_matches_brute():
    li = village(
        [(0, 0), (10, 0)],
        [((1, 0), 2), ((9, 1), 1), ((6, 0), 3), ((2, 2), 1)],
        [1, 0, 0, 1],
    )
    inst, spec = objective_f1(li)
    res = brute_optimum(inst, spec)
    assert -res.value == evaluate_f1(li, res.partition)
    sol = run_algorithm1(li, "f1")
    assert sol.value == min(evaluate_f1(li, p) for p in _all_feasible(li))


def _all_feasible(li):
    return list(enumerate_feasible(li.instance()))


def test_equal_kappa_f3_matches_f1_argmin():
    li = village(
        [(0, 0), (6, 0)],
        [((1, 0), 2), ((5, 1), 2), ((3, 0), 1), ((4, 4), 1)],
        [0, 1, 0, 1],
    )
    assert li.kappas == (3, 3)
    a = brute_optimum(*objective_f1(li)).partition
    b = brute_optimum(*objective_f3(li)).partition
    assert a == b


def test_kappa_ratio_pushes_lot_to_large_farmer():
    lots = [((0, 0), 1), ((4, 0), 9), ((Fraction(3, 2), 0), 1)]
    li = village([(0, 0), (4, 0)], lots, [0, 1, 1])
    assert li.kappas == (1, 10)
    f1_part = brute_optimum(*objective_f1(li)).partition
    f3_part = brute_optimum(*objective_f3(li)).partition
    assert f1_part.assignment[2] == 0
    assert f3_part.assignment[2] == 1


def test_single_farmer_f3_is_f1_over_kappa():
    li = village([(1, 1)], [((0, 0), 2), ((3, 1), 5)], [0, 0])
    assert evaluate_f3(li, li.original) == evaluate_f1(li, li.original) / 7


def test_f2_examples():
    li = village([(0, 0)], [((1, 1), 1), ((2, 0), 1)], [0, 0])
    # weighted distance sum 2 + 4 = 6 over total size 2
    assert evaluate_f2(li, li.original) == 3
    two = village([(0, 0), (5, 5)], [((1, 1), 1), ((2, 0), 1)], [0, 1], lower=Fraction(1))
    assert evaluate_f2(two, Partition((0, 0))) == 3


def test_f2_equals_f3_when_sizes_match_kappa():
    rng = random.Random(3)
    for _ in range(20):
        li = generate_instance(rng.randrange(10**6), n=5, p=2, s=1, omega_size=3, deviation=Fraction(1, 2))
        for part in _all_feasible(li):
            sizes = [0] * li.p
            for j, i in enumerate(part.assignment):
                sizes[i] += li.lots[j].size
            if tuple(sizes) == li.kappas:
                assert evaluate_f2(li, part) == evaluate_f3(li, part)


def test_approximation_factor_values():
    exact = village([(0, 0), (1, 1)], [((0, 0), 100), ((1, 1), 100)], [0, 1], lower=Fraction(0), upper=Fraction(0))
    assert approximation_factor(exact) == 1
    three = village(
        [(0, 0), (1, 1)],
        [((0, 0), 100), ((1, 1), 100)],
        [0, 1],
        lower=Fraction(3, 100),
        upper=Fraction(3, 100),
    )
    assert approximation_factor(three) == Fraction(103, 97)


def test_zero_kappa_rejected():
    with pytest.raises(ModelError):
        village([(0, 0), (1, 1)], [((0, 0), 2)], [0])


def test_infeasible_original_rejected():
    lots = (Lot(0, (0, 0), 2, ((2,),)),)
    farmers = (Farmer(0, (0, 0), (5,), (Fraction(0),), (Fraction(0),)),)
    with pytest.raises(InfeasiblePartition):
        LandInstance(lots, farmers, Partition((0,)))


def test_size_row_must_match_lot_size():
    with pytest.raises(ModelError):
        LandInstance(
            (Lot(0, (0, 0), 2, ((3,),)),),
            (Farmer(0, (0, 0), (3,), (Fraction(0),), (Fraction(0),)),),
            Partition((0,)),
        )


def test_original_optimal_gives_empty_trace():
    li = village([(0, 0), (10, 0)], [((0, 1), 1), ((10, 1), 1)], [0, 1])
    sol = run_algorithm1(li, "f3")
    assert sol.partition == li.original and sol.trace.steps == []
    # lower size bound 0 leaves the factor undefined
    assert sol.approximation_factor is None


@pytest.mark.parametrize("objective", ["f1", "f3"])
def test_algorithm1_matches_brute_on_desk_villages(objective):
    for seed in range(6):
        li = generate_instance(seed, n=6, p=2, s=2, omega_size=4, deviation=Fraction(1, 4))
        sol = run_algorithm1(li, objective)
        maker = objective_f1 if objective == "f1" else objective_f3
        res = brute_optimum(*maker(li))
        assert sol.value == -res.value
        assert is_feasible(li.instance(), sol.partition)
        for rep in sol.per_farmer:
            assert all(lo <= t <= up for lo, t, up in zip(rep.lower, rep.totals, rep.upper))
        assert sol.trace.final_objective - sol.trace.start_objective == sum(st.delta for st in sol.trace.steps)


def test_f3_report_has_certificate_and_f2():
    li = generate_instance(1, n=5, p=2, s=1, omega_size=3)
    sol = run_algorithm1(li, "f3")
    assert sol.approximation_factor == approximation_factor(li)
    assert sol.f2_value == evaluate_f2(li, sol.partition)
    assert run_algorithm1(li, "f1").approximation_factor is None


def test_nonlinear_land_objectives_match_brute():
    li = generate_instance(2, n=4, p=2, s=1, omega_size=2, deviation=Fraction(1, 2))
    sol = solve_land(li, "clustering-body", model="p2", body=("l1", "l_inf"))
    inst, spec = objective_f1(li)
    body = clustering_body("l1", "l_inf", 1)
    assert sol.value == brute_optimum(inst.with_objective(body), body).value
    lin = solve_land(li, "linear", weights=(2, 1))
    assert lin.value == brute_optimum(inst, linear((2, 1))).value


def test_generator_is_deterministic_and_feasible():
    a = generate_instance(42, n=8, p=3, s=3, omega_size=4)
    b = generate_instance(42, n=8, p=3, s=3, omega_size=4)
    assert a == b
    assert is_feasible(a.instance(), a.original)
    assert generate_instance(43, n=8, p=3, s=3, omega_size=4) != a


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_generator_respects_omega_size(k):
    for seed in range(5):
        li = generate_instance(seed, n=10, p=2, s=2, omega_size=k)
        domain, _ = li.domain()
        assert domain.m <= k


def test_generator_rejects_bad_parameters():
    with pytest.raises(ValueError):
        generate_instance(0, n=3, p=2, s=1, omega_size=2, deviation=Fraction(-1, 10))
    with pytest.raises(ValueError):
        generate_instance(0, n=1, p=2, s=1, omega_size=2)


def test_f2_bound_chain_on_random_tiny_villages():
    rng = random.Random(11)
    for _ in range(30):
        li = _tiny(rng)
        pi3 = brute_optimum(*objective_f3(li)).partition
        pi2 = brute_optimum(*f2_objective(li)).partition
        kappas, kb = li.kappas, li.kappa_bounds
        left = max(Fraction(k, lo) for k, (lo, _) in zip(kappas, kb))
        right = max(Fraction(up, k) for k, (_, up) in zip(kappas, kb))
        assert evaluate_f2(li, pi3) <= left * evaluate_f3(li, pi3)
        assert evaluate_f3(li, pi3) <= evaluate_f3(li, pi2) <= right * evaluate_f2(li, pi2)
        assert evaluate_f2(li, pi3) <= approximation_factor(li) * evaluate_f2(li, pi2)


def _tiny(rng):
    n = rng.randint(2, 5)
    p = rng.randint(1, min(3, n))
    return generate_instance(rng.randrange(10**6), n=n, p=p, s=rng.randint(1, 2), omega_size=3,
                             deviation=Fraction(rng.choice([3, 10, 30]), 100))


def test_argmin_invariant_under_common_size_scaling():
    rng = random.Random(8)
    for _ in range(10):
        li = _tiny(rng)
        inst, spec = objective_f1(li)
        base = brute_optimum(inst, spec)
        scaled = li.instance([tuple(tuple(3 * u for u in row) for row in item.utility) for item in inst.items])
        res = brute_optimum(scaled, spec)
        assert res.partition == base.partition and res.value == 3 * base.value
        assert stacked_utility(scaled, res.partition) == tuple(3 * a for a in stacked_utility(inst, base.partition))

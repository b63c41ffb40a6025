"""Land consolidation: lots, farmers and the least-squares redistribution.

Farmer ``i`` sits at farmstead ``v_i``; lot ``j`` has midpoint ``z_j`` and size
``omega_j``.  The linear objectives

    f1 = sum_i sum_{j in pi_i} omega_j |v_i - z_j|^2
    f3 = sum_i (1/kappa_i) sum_{j in pi_i} omega_j |v_i - z_j|^2

are minimized exactly by the linear solver; ``f2`` divides by the realized
size instead of ``kappa_i`` and is only evaluated.  An ``f3`` optimum is an
``approximation_factor``-approximation for ``f2``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .augmentation import AugmentationTrace, SolverConfig, solve_linear
from .convex import ConvexConfig, solve_convex
from .model import (
    ClusterBounds,
    Instance,
    IntMatrix,
    Item,
    ModelError,
    Partition,
    WeightDomain,
    as_fraction,
    bit_length,
    cluster_feature_totals,
    is_feasible,
    stacked_utility,
)
from .objectives import ObjectiveSpec, clustering_body, custom, linear, sum_objective
from .reduction import InfeasiblePartition, build, decode_solution, encode_assignment

Point = tuple[Fraction, Fraction]

SIZE_CATEGORIES = (20, 35, 50, 80, 120)  # ares
SOIL_QUALITIES = (1, 2, 3, 4, 5)
SUBSIDY_RATES = (1, 2, 3)


def _point(p: Sequence) -> Point:
    if len(p) != 2:
        raise ModelError(f"expected a point in the plane, got {p!r}")
    return (as_fraction(p[0]), as_fraction(p[1]))


def sq_dist(a: Point, b: Point) -> Fraction:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


@dataclass(frozen=True)
class Lot:
    id: int
    location: Point
    size: int
    weight_matrix: IntMatrix

    def __post_init__(self):
        object.__setattr__(self, "location", _point(self.location))
        object.__setattr__(self, "weight_matrix", tuple(tuple(int(a) for a in row) for row in self.weight_matrix))
        if isinstance(self.size, bool) or int(self.size) != self.size or self.size <= 0:
            raise ModelError(f"lot {self.id}: size must be a positive integer, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))


@dataclass(frozen=True)
class Farmer:
    id: int
    farmstead: Point
    totals: tuple[int, ...]
    deviation_lower: tuple[Fraction, ...]
    deviation_upper: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "farmstead", _point(self.farmstead))
        object.__setattr__(self, "totals", tuple(int(a) for a in self.totals))
        lo = tuple(as_fraction(a) for a in self.deviation_lower)
        up = tuple(as_fraction(a) for a in self.deviation_upper)
        if len(lo) != len(self.totals) or len(up) != len(self.totals):
            raise ModelError(f"farmer {self.id}: deviation needs one entry per feature")
        if any(a < 0 for a in lo + up):
            raise ModelError(f"farmer {self.id}: deviations must be nonnegative")
        object.__setattr__(self, "deviation_lower", lo)
        object.__setattr__(self, "deviation_upper", up)

    def bounds(self) -> ClusterBounds:
        """Tolerance band, rounded inward to integers."""
        lower = tuple(math.ceil((1 - d) * b) for d, b in zip(self.deviation_lower, self.totals))
        upper = tuple(math.floor((1 + d) * b) for d, b in zip(self.deviation_upper, self.totals))
        return ClusterBounds(lower, upper)


@dataclass(frozen=True)
class LandInstance:
    lots: tuple[Lot, ...]
    farmers: tuple[Farmer, ...]
    original: Partition
    size_feature_row: int = 0
    units: tuple[tuple[str, str], ...] = (("length", "m"), ("size", "are"))

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(sorted(dict(self.units).items())))
        object.__setattr__(self, "lots", tuple(self.lots))
        object.__setattr__(self, "farmers", tuple(self.farmers))
        if not self.lots or not self.farmers:
            raise ModelError("need at least one lot and one farmer")
        s, p = self.s, self.p
        if not 0 <= self.size_feature_row < s:
            raise ModelError(f"size_feature_row {self.size_feature_row} out of range for s={s}")
        for j, lot in enumerate(self.lots):
            if lot.id != j:
                raise ModelError(f"lot ids must be 0..n-1 in order, got {lot.id} at {j}")
            W = lot.weight_matrix
            if len(W) != s or any(len(row) != p for row in W):
                raise ModelError(f"lot {j}: weight matrix must be {s} x {p}")
            if any(w != lot.size for w in W[self.size_feature_row]):
                raise ModelError(f"lot {j}: size row must equal the lot size {lot.size} for every farmer")
        for i, farmer in enumerate(self.farmers):
            if farmer.id != i:
                raise ModelError(f"farmer ids must be 0..p-1 in order, got {farmer.id} at {i}")
            if len(farmer.totals) != s:
                raise ModelError(f"farmer {i}: totals need {s} entries")
        if self.original.n != len(self.lots):
            raise ModelError("original distribution must assign every lot")
        if any(not 0 <= a < p for a in self.original.assignment):
            raise ModelError("original distribution uses an unknown farmer")
        if any(k <= 0 for k in self.kappas):
            raise ModelError("every farmer needs positive original land size")
        report = is_feasible(self.instance(), self.original)
        if not report:
            raise InfeasiblePartition(report)

    @property
    def n(self) -> int:
        return len(self.lots)

    @property
    def p(self) -> int:
        return len(self.farmers)

    @property
    def s(self) -> int:
        return len(self.farmers[0].totals)

    @property
    def kappas(self) -> tuple[int, ...]:
        out = [0] * self.p
        for j, i in enumerate(self.original.assignment):
            out[i] += self.lots[j].size
        return tuple(out)

    @property
    def kappa_bounds(self) -> tuple[tuple[int, int], ...]:
        r = self.size_feature_row
        return tuple((b.lower[r], b.upper[r]) for b in (f.bounds() for f in self.farmers))

    @property
    def bounds(self) -> tuple[ClusterBounds, ...]:
        return tuple(f.bounds() for f in self.farmers)

    def domain(self) -> tuple[WeightDomain, tuple[int, ...]]:
        """Distinct weight matrices in order of first use, and each lot's index."""
        entries: dict[IntMatrix, int] = {}
        index = []
        for lot in self.lots:
            index.append(entries.setdefault(lot.weight_matrix, len(entries)))
        return WeightDomain(tuple(entries)), tuple(index)

    def weighted_distance(self, i: int, j: int) -> Fraction:
        return self.lots[j].size * sq_dist(self.farmers[i].farmstead, self.lots[j].location)

    def instance(self, utilities: Sequence[Sequence[Sequence[Fraction]]] | None = None) -> Instance:
        """Partitioning instance; ``utilities[j]`` is lot ``j``'s ``d x p`` matrix (zero row by default)."""
        domain, index = self.domain()
        if utilities is None:
            utilities = [((0,) * self.p,)] * self.n
        items = tuple(Item(j, index[j], utilities[j]) for j in range(self.n))
        return Instance(domain, items, self.bounds)

    def input_bits(self) -> int:
        """Binary encoding length of the numeric data (diagnostic only)."""
        bits = bit_length
        total = 0
        for lot in self.lots:
            total += bits(lot.size) + sum(bits(c) for c in lot.location)
            total += sum(bits(w) for row in lot.weight_matrix for w in row)
        for farmer in self.farmers:
            total += sum(bits(c) for c in farmer.farmstead) + sum(bits(b) for b in farmer.totals)
            total += sum(bits(b) for bd in (farmer.bounds(),) for b in bd.lower + bd.upper)
        return total


# -- objectives -----------------------------------------------------------


def _distance_utilities(li: LandInstance, scale: Sequence[Fraction]) -> list[tuple[tuple[Fraction, ...]]]:
    return [(tuple(-li.weighted_distance(i, j) * scale[i] for i in range(li.p)),) for j in range(li.n)]


def objective_f1(li: LandInstance) -> tuple[Instance, ObjectiveSpec]:
    """Maximizing the sum of these utilities minimizes ``f1``."""
    spec = sum_objective(li.p)
    inst = li.instance(_distance_utilities(li, [Fraction(1)] * li.p)).with_objective(spec)
    return inst, spec


def objective_f3(li: LandInstance) -> tuple[Instance, ObjectiveSpec]:
    kappas = li.kappas
    if any(k <= 0 for k in kappas):
        raise ModelError("f3 needs positive kappa for every farmer")
    spec = sum_objective(li.p)
    inst = li.instance(_distance_utilities(li, [Fraction(1, k) for k in kappas])).with_objective(spec)
    return inst, spec


def evaluate_f1(li: LandInstance, part: Partition) -> Fraction:
    return sum((li.weighted_distance(i, j) for j, i in enumerate(part.assignment)), Fraction(0))


def evaluate_f3(li: LandInstance, part: Partition) -> Fraction:
    kappas = li.kappas
    return sum((li.weighted_distance(i, j) / kappas[i] for j, i in enumerate(part.assignment)), Fraction(0))


def _ratio_sum(y: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for num, size in zip(y[0::2], y[1::2]):
        if size == 0:
            if num != 0:
                raise ModelError("f2 is undefined for an empty cluster with nonzero distance sum")
            continue
        total += num / size
    return total


def evaluate_f2(li: LandInstance, part: Partition) -> Fraction:
    """Weighted squared distances divided by each farmer's realized size."""
    nums = [Fraction(0)] * li.p
    sizes = [0] * li.p
    for j, i in enumerate(part.assignment):
        nums[i] += li.weighted_distance(i, j)
        sizes[i] += li.lots[j].size
    return _ratio_sum([a for pair in zip(nums, sizes) for a in pair])


def f2_objective(li: LandInstance) -> tuple[Instance, ObjectiveSpec]:
    """``f2`` through a comparison oracle on two utility rows per farmer.

    The rows are ``(-omega_j |v_i - z_j|^2, omega_j)`` so the oracle maximizes
    ``-f2``.  The function is not convex; this is meant for the exhaustive
    solver only.
    """
    utilities = [
        (
            tuple(-li.weighted_distance(i, j) for i in range(li.p)),
            tuple(Fraction(li.lots[j].size) for _ in range(li.p)),
        )
        for j in range(li.n)
    ]
    spec = custom(lambda y, z: _ratio_sum(y) <= _ratio_sum(z), name="f2")
    return li.instance(utilities).with_objective(spec), spec


def approximation_factor(li: LandInstance) -> Fraction:
    """``(max kappa_i / kappa_i^-) * (max kappa_i^+ / kappa_i)``."""
    kappas = li.kappas
    kb = li.kappa_bounds
    if any(lo <= 0 for lo, _ in kb):
        raise ModelError("approximation factor needs positive lower size bounds")
    left = max(Fraction(k, lo) for k, (lo, _) in zip(kappas, kb))
    right = max(Fraction(up, k) for k, (_, up) in zip(kappas, kb))
    return left * right


def has_approximation_factor(li: LandInstance) -> bool:
    return all(lo > 0 for lo, _ in li.kappa_bounds)


# -- end to end -----------------------------------------------------------

LAND_OBJECTIVES = ("f1", "f3", "linear", "clustering-body")


@dataclass(frozen=True)
class FarmerReport:
    totals: tuple[int, ...]
    lower: tuple[int, ...]
    upper: tuple[int, ...]
    slack_plus: tuple[int, ...]
    slack_minus: tuple[int, ...]


@dataclass
class LandSolution:
    """Result of a land solve.

    ``value`` is the minimized ``f1``/``f3`` value for those objectives and
    the maximized objective value for ``linear`` and ``clustering-body``
    (both taken over the per-farmer sums of ``-omega_j |v_i - z_j|^2``).
    """

    objective: str
    value: Fraction
    partition: Partition
    per_farmer: list[FarmerReport]
    f2_value: Fraction
    approximation_factor: Fraction | None
    trace: AugmentationTrace
    input_bits: int
    model: str = "p3"
    weights: tuple[Fraction, ...] | None = None
    body: tuple[str, str] | None = None
    units: dict[str, str] = field(default_factory=dict)


def farmer_reports(li: LandInstance, part: Partition) -> list[FarmerReport]:
    out = []
    for total, b in zip(cluster_feature_totals(li.instance(), part), li.bounds):
        out.append(
            FarmerReport(
                totals=total,
                lower=b.lower,
                upper=b.upper,
                slack_plus=tuple(u - t for u, t in zip(b.upper, total)),
                slack_minus=tuple(t - lo for t, lo in zip(total, b.lower)),
            )
        )
    return out


def land_objective(
    li: LandInstance,
    objective: str,
    weights: Sequence | None = None,
    body: tuple[str, str] = ("l1", "l1"),
) -> tuple[Instance, ObjectiveSpec]:
    if objective == "f1":
        return objective_f1(li)
    if objective == "f3":
        return objective_f3(li)
    inst, _ = objective_f1(li)
    if objective == "linear":
        spec = linear(weights if weights is not None else [1] * li.p)
        if len(spec.weights) != li.p:
            raise ModelError(f"linear objective needs {li.p} weights, got {len(spec.weights)}")
    elif objective == "clustering-body":
        spec = clustering_body(body[0], body[1], 1)
    else:
        raise ValueError(f"objective must be one of {LAND_OBJECTIVES}, got {objective!r}")
    return inst.with_objective(spec), spec


def objective_value(li: LandInstance, part: Partition, objective: str, spec: ObjectiveSpec, inst: Instance) -> Fraction:
    """Reported value of ``part``, evaluated directly from the lot data."""
    if objective == "f1":
        return evaluate_f1(li, part)
    if objective == "f3":
        return evaluate_f3(li, part)
    return spec.value(stacked_utility(inst, part))


def solve_land(
    li: LandInstance,
    objective: str = "f3",
    model: str = "p3",
    weights: Sequence | None = None,
    body: tuple[str, str] = ("l1", "l1"),
    solver: SolverConfig | None = None,
    convex: ConvexConfig | None = None,
) -> LandSolution:
    """Start from the original distribution in the chosen system and optimize."""
    inst, spec = land_objective(li, objective, weights, body)
    sys = build(inst, model)
    x0 = encode_assignment(sys, li.original, inst)
    if spec.is_linear:
        x, trace = solve_linear(sys, x0, spec.weights, config=solver)
    else:
        convex = convex or ConvexConfig(solver=solver or SolverConfig())
        result = solve_convex(sys, x0, spec, config=convex)
        x = result.x
        trace = _sweep_summary(sys.project(x0), result, spec)
    part = decode_solution(sys, x).partition
    if not is_feasible(inst, part):
        raise AssertionError("solver returned an infeasible distribution")
    value = objective_value(li, part, objective, spec, inst)
    if spec.is_linear:
        expected = -spec.value(stacked_utility(inst, part)) if objective in ("f1", "f3") else spec.value(stacked_utility(inst, part))
        if expected != value:
            raise AssertionError("objective value disagrees with the direct evaluation")
    return LandSolution(
        objective=objective,
        value=value,
        partition=part,
        per_farmer=farmer_reports(li, part),
        f2_value=evaluate_f2(li, part),
        approximation_factor=approximation_factor(li) if objective == "f3" and has_approximation_factor(li) else None,
        trace=trace,
        input_bits=li.input_bits(),
        model=model,
        weights=spec.weights if objective == "linear" else None,
        body=body if objective == "clustering-body" else None,
        units=dict(li.units),
    )


def _sweep_summary(y0: Sequence[Fraction], result, spec: ObjectiveSpec) -> AugmentationTrace:
    """All steps of a convex sweep, with start and final values of the objective itself."""
    basis_size = result.traces[0].basis_size if result.traces else 0
    trace = AugmentationTrace(spec.value(y0), spec.value(result.projection), basis_size=basis_size)
    for t in result.traces:
        trace.steps.extend(t.steps)
    return trace


def run_algorithm1(li: LandInstance, objective: str = "f3", config: SolverConfig | None = None) -> LandSolution:
    """Build the bounded multi-feature system, encode the original distribution and augment to optimality."""
    if objective not in ("f1", "f3"):
        raise ValueError(f"objective must be f1 or f3, got {objective!r}")
    return solve_land(li, objective, "p3", solver=config)


# -- synthetic villages ---------------------------------------------------


def generate_instance(
    seed: int,
    n: int,
    p: int,
    s: int,
    omega_size: int,
    deviation: Fraction | str | int = Fraction(3, 100),
    side: int = 1000,
    max_retries: int = 100,
) -> LandInstance:
    """Reproducible synthetic village.

    Feature row 0 is the lot size, row 1 (if present) the soil value
    ``quality * size`` and every further row a farmer-dependent subsidy
    ``rate_i * size``.  At most ``omega_size`` distinct lot types occur.  The
    original distribution hands lots, in a shuffled order, to the farmer with
    the least land so far; farmer totals are that distribution's totals.
    """
    if min(n, p, s, omega_size) < 1:
        raise ValueError("n, p, s and omega_size must be positive")
    if n < p:
        raise ValueError(f"need at least as many lots as farmers (n={n}, p={p})")
    deviation = as_fraction(deviation)
    if deviation < 0:
        raise ValueError("deviation must be nonnegative")
    rng = random.Random(seed)
    rates = [[rng.choice(SUBSIDY_RATES) for _ in range(max(s - 2, 0))] for _ in range(p)]
    kinds = [(size, q) for size in SIZE_CATEGORIES for q in (SOIL_QUALITIES if s >= 2 else (0,))]
    rng.shuffle(kinds)
    kinds = kinds[:omega_size]

    def matrix(size: int, quality: int) -> IntMatrix:
        rows = [(size,) * p]
        if s >= 2:
            rows.append((quality * size,) * p)
        for f in range(s - 2):
            rows.append(tuple(rates[i][f] * size for i in range(p)))
        return tuple(rows)

    for _ in range(max_retries):
        lot_kinds = [rng.randrange(len(kinds)) for _ in range(n)]
        locations = [(rng.randrange(side + 1), rng.randrange(side + 1)) for _ in range(n)]
        farmsteads = [(rng.randrange(side + 1), rng.randrange(side + 1)) for _ in range(p)]
        lots = [Lot(j, locations[j], kinds[lot_kinds[j]][0], matrix(*kinds[lot_kinds[j]])) for j in range(n)]

        order = list(range(n))
        rng.shuffle(order)
        held = [0] * p
        assignment = [0] * n
        for j in order:
            i = min(range(p), key=lambda a: (held[a], a))
            assignment[j] = i
            held[i] += lots[j].size
        part = Partition(tuple(assignment))
        totals = _totals(lots, part, p, s)
        if all(t[0] > 0 for t in totals):
            farmers = [Farmer(i, farmsteads[i], totals[i], (deviation,) * s, (deviation,) * s) for i in range(p)]
            li = LandInstance(tuple(lots), tuple(farmers), part, size_feature_row=0)
            assert is_feasible(li.instance(), li.original)
            return li
    raise RuntimeError(f"no feasible original distribution within {max_retries} attempts")


def _totals(lots: Sequence[Lot], part: Partition, p: int, s: int) -> list[tuple[int, ...]]:
    out = [[0] * s for _ in range(p)]
    for lot, i in zip(lots, part.assignment):
        for f in range(s):
            out[i][f] += lot.weight_matrix[f][i]
    return [tuple(t) for t in out]

"""Items, clusters, weights, utilities, bounds and partitions.

Cluster and item indices are 0-based throughout.  A weight matrix ``W`` is
stored row-major as ``W[feature][cluster]``; a utility matrix ``C`` as
``C[row][cluster]``, so column ``i`` is the utility vector gained if the item
joins cluster ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .objectives import ObjectiveSpec

IntMatrix = tuple[tuple[int, ...], ...]
RatMatrix = tuple[tuple[Fraction, ...], ...]


class ModelError(ValueError):
    """Invalid instance data or a partition that does not fit its instance."""


def _int_matrix(rows: Sequence[Sequence[int]]) -> IntMatrix:
    out = []
    for row in rows:
        r = []
        for a in row:
            if isinstance(a, bool) or int(a) != a:
                raise ModelError(f"weights must be integers, got {a!r}")
            r.append(int(a))
        out.append(tuple(r))
    return tuple(out)


def as_fraction(a) -> Fraction:
    """Exact rational from an int, Fraction or ``"num/den"`` string."""
    if isinstance(a, float):
        raise ModelError(f"refusing float {a!r}; pass an int, Fraction or 'num/den' string")
    return Fraction(a)


@dataclass(frozen=True)
class WeightDomain:
    """The finite list of admissible weight matrices (each ``s x p``)."""

    entries: tuple[IntMatrix, ...]

    def __post_init__(self):
        entries = tuple(_int_matrix(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ModelError("weight domain must be non-empty")
        s, p = len(entries[0]), len(entries[0][0]) if entries[0] else 0
        if s < 1 or p < 1:
            raise ModelError("weight matrices need s >= 1 rows and p >= 1 columns")
        for e in entries:
            if len(e) != s or any(len(row) != p for row in e):
                raise ModelError("all weight matrices must share the shape s x p")
        if len(set(entries)) != len(entries):
            raise ModelError("weight domain entries must be distinct")

    @classmethod
    def from_vectors(cls, vectors: Sequence[Sequence[int]]) -> "WeightDomain":
        """Single-feature domain (``s = 1``) from weight vectors ``w in Z^p``."""
        return cls(tuple((tuple(v),) for v in vectors))

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def s(self) -> int:
        return len(self.entries[0])

    @property
    def p(self) -> int:
        return len(self.entries[0][0])

    def column(self, k: int, i: int) -> tuple[int, ...]:
        """Feature vector ``W_i`` of entry ``k`` (contribution to cluster ``i``)."""
        return tuple(row[i] for row in self.entries[k])


@dataclass(frozen=True)
class Item:
    id: int
    weight_index: int
    utility: RatMatrix

    def __post_init__(self):
        object.__setattr__(self, "utility", tuple(tuple(as_fraction(a) for a in row) for row in self.utility))


@dataclass(frozen=True)
class ClusterBounds:
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", _int_matrix([self.lower])[0])
        object.__setattr__(self, "upper", _int_matrix([self.upper])[0])
        if len(self.lower) != len(self.upper):
            raise ModelError("lower and upper bounds differ in length")
        if any(lo > up for lo, up in zip(self.lower, self.upper)):
            raise ModelError(f"lower bound exceeds upper bound: {self.lower} > {self.upper}")

    @classmethod
    def exact(cls, target: Sequence[int]) -> "ClusterBounds":
        return cls(tuple(target), tuple(target))

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper


@dataclass(frozen=True)
class Partition:
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(a) for a in self.assignment))

    @property
    def n(self) -> int:
        return len(self.assignment)

    def clusters(self, p: int) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(p)]
        for j, i in enumerate(self.assignment):
            out[i].append(j)
        return out


@dataclass(frozen=True)
class Instance:
    domain: WeightDomain
    items: tuple[Item, ...]
    bounds: tuple[ClusterBounds, ...]
    objective: "ObjectiveSpec | None" = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "bounds", tuple(self.bounds))
        if not self.items:
            raise ModelError("instance needs at least one item")
        if len(self.bounds) != self.domain.p:
            raise ModelError(f"expected {self.domain.p} cluster bounds, got {len(self.bounds)}")
        for b in self.bounds:
            if len(b.lower) != self.domain.s:
                raise ModelError("bound vectors must have one entry per feature")
        d = len(self.items[0].utility)
        for j, item in enumerate(self.items):
            if item.id != j:
                raise ModelError(f"item ids must be 0..n-1 in order, got {item.id} at {j}")
            if not 0 <= item.weight_index < self.domain.m:
                raise ModelError(f"item {j}: weight_index {item.weight_index} out of range")
            if len(item.utility) != d or any(len(row) != self.domain.p for row in item.utility):
                raise ModelError(f"item {j}: utility must be {d} x {self.domain.p}")

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def p(self) -> int:
        return self.domain.p

    @property
    def s(self) -> int:
        return self.domain.s

    @property
    def d(self) -> int:
        return len(self.items[0].utility)

    def weight(self, j: int) -> IntMatrix:
        return self.domain.entries[self.items[j].weight_index]

    def with_objective(self, objective: "ObjectiveSpec") -> "Instance":
        return Instance(self.domain, self.items, self.bounds, objective)

    def input_bits(self) -> int:
        """Binary encoding length of weights, bounds and utilities."""
        total = sum(bit_length(w) for e in self.domain.entries for row in e for w in row)
        total += sum(bit_length(b) for bd in self.bounds for b in bd.lower + bd.upper)
        total += sum(bit_length(u) for item in self.items for row in item.utility for u in row)
        return total


def bit_length(a) -> int:
    """Sign bit plus the bits of numerator and denominator."""
    a = Fraction(a)
    return abs(a.numerator).bit_length() + a.denominator.bit_length() + 1


@dataclass(frozen=True)
class Violation:
    cluster: int
    feature: int
    amount: int  # negative: deficit below the lower bound; positive: excess above the upper bound

    @property
    def kind(self) -> str:
        return "deficit" if self.amount < 0 else "excess"


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[Violation, ...]

    def __bool__(self) -> bool:
        return self.feasible


def _check_partition(inst: Instance, part: Partition) -> None:
    if part.n != inst.n:
        raise ModelError(f"partition has {part.n} entries, instance has {inst.n} items")
    bad = [a for a in part.assignment if not 0 <= a < inst.p]
    if bad:
        raise ModelError(f"cluster index {bad[0]} out of range for p={inst.p}")


def cluster_feature_totals(inst: Instance, part: Partition) -> list[tuple[int, ...]]:
    _check_partition(inst, part)
    totals = [[0] * inst.s for _ in range(inst.p)]
    for j, i in enumerate(part.assignment):
        W = inst.weight(j)
        for f in range(inst.s):
            totals[i][f] += W[f][i]
    return [tuple(t) for t in totals]


def cluster_utility_sums(inst: Instance, part: Partition) -> list[tuple[Fraction, ...]]:
    _check_partition(inst, part)
    sums = [[Fraction(0)] * inst.d for _ in range(inst.p)]
    for j, i in enumerate(part.assignment):
        C = inst.items[j].utility
        for r in range(inst.d):
            sums[i][r] += C[r][i]
    return [tuple(v) for v in sums]


def stacked_utility(inst: Instance, part: Partition) -> tuple[Fraction, ...]:
    """Cluster utility sums concatenated cluster by cluster (length ``d*p``)."""
    return tuple(a for vec in cluster_utility_sums(inst, part) for a in vec)


def is_feasible(inst: Instance, part: Partition) -> FeasibilityReport:
    violations = []
    for i, total in enumerate(cluster_feature_totals(inst, part)):
        b = inst.bounds[i]
        for f, t in enumerate(total):
            if t < b.lower[f]:
                violations.append(Violation(i, f, t - b.lower[f]))
            elif t > b.upper[f]:
                violations.append(Violation(i, f, t - b.upper[f]))
    return FeasibilityReport(not violations, tuple(violations))

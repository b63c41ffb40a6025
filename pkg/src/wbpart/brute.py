"""Exhaustive reference solver over all ``p^n`` assignments."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .model import Instance, Partition, cluster_feature_totals, stacked_utility
from .objectives import ObjectiveSpec

DEFAULT_CAP = 2_000_000


class EnumerationTooLarge(RuntimeError):
    pass


class NoFeasiblePartition(ValueError):
    pass


def _guard(inst: Instance, cap: int) -> None:
    if inst.p**inst.n > cap:
        raise EnumerationTooLarge(f"p^n = {inst.p}^{inst.n} exceeds the enumeration cap {cap}")


def enumerate_feasible(inst: Instance, cap: int = DEFAULT_CAP) -> Iterator[Partition]:
    """Feasible partitions in lexicographic order of their assignment vectors."""
    _guard(inst, cap)
    lows = [b.lower for b in inst.bounds]
    ups = [b.upper for b in inst.bounds]
    for assignment in itertools.product(range(inst.p), repeat=inst.n):
        part = Partition(assignment)
        totals = cluster_feature_totals(inst, part)
        if all(lo <= t <= up for i in range(inst.p) for lo, t, up in zip(lows[i], totals[i], ups[i])):
            yield part


@dataclass(frozen=True)
class BruteResult:
    partition: Partition
    projection: tuple[Fraction, ...]
    value: Fraction | None
    feasible_count: int


def brute_optimum(inst: Instance, spec: ObjectiveSpec | None = None, cap: int = DEFAULT_CAP) -> BruteResult:
    """Oracle-maximal feasible partition; ties go to the first in lexicographic order."""
    spec = spec or inst.objective
    if spec is None:
        raise ValueError("no objective given")
    best = None
    best_y = None
    count = 0
    for part in enumerate_feasible(inst, cap):
        count += 1
        y = stacked_utility(inst, part)
        if best is None or not spec.leq(y, best_y):
            best, best_y = part, y
    if best is None:
        raise NoFeasiblePartition("no feasible partition")
    return BruteResult(best, best_y, spec.value(best_y) if spec.has_value else None, count)

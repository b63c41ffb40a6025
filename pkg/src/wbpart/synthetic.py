"""Seeded random partitioning instances with a known feasible partition."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .model import ClusterBounds, Instance, Item, Partition, WeightDomain, cluster_feature_totals


@dataclass(frozen=True)
class RandomInstanceConfig:
    n: int = 4
    p: int = 2
    s: int = 1
    m: int = 2
    d: int = 1
    weight_range: tuple[int, int] = (0, 3)
    utility_range: tuple[int, int] = (-9, 9)
    slack: int = 2  # how far bounds may widen around the planted totals


def random_instance(rng: random.Random, model: str, config: RandomInstanceConfig) -> tuple[Instance, Partition]:
    """Instance for ``model`` in {p1, p2, p3} and a planted feasible partition.

    Bounds are the planted totals, widened by up to ``slack`` on each side
    for the bounded models.
    """
    c = config
    s = 1 if model in ("p1", "p2") else c.s
    lo_w, hi_w = c.weight_range
    entries: list[tuple[tuple[int, ...], ...]] = []
    while len(entries) < c.m:
        W = tuple(tuple(rng.randint(lo_w, hi_w) for _ in range(c.p)) for _ in range(s))
        if W not in entries:
            entries.append(W)
    domain = WeightDomain(tuple(entries))
    lo_u, hi_u = c.utility_range
    items = [
        Item(j, rng.randrange(c.m), tuple(tuple(Fraction(rng.randint(lo_u, hi_u)) for _ in range(c.p)) for _ in range(c.d)))
        for j in range(c.n)
    ]
    part = Partition(tuple(rng.randrange(c.p) for _ in range(c.n)))
    probe = Instance(domain, items, [ClusterBounds((0,) * s, (0,) * s)] * c.p)
    totals = cluster_feature_totals(probe, part)
    bounds = []
    for t in totals:
        if model == "p1":
            bounds.append(ClusterBounds.exact(t))
        else:
            bounds.append(
                ClusterBounds(
                    tuple(a - rng.randint(0, c.slack) for a in t),
                    tuple(a + rng.randint(0, c.slack) for a in t),
                )
            )
    return Instance(domain, items, bounds), part

"""Objective functions over stacked cluster utility sums.

An objective sees the vector ``y`` of length ``d*p`` that concatenates the
per-cluster utility sums (cluster 0 first).  Solvers talk to it only through
:meth:`ObjectiveSpec.leq`, i.e. the question "is f(y) <= f(z)?".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, TypeVar

from .model import as_fraction

Oracle = Callable[[Sequence[Fraction], Sequence[Fraction]], bool]
T = TypeVar("T")

INNER_NORMS = ("l1", "l2_squared", "l_inf")
OUTER_NORMS = ("l1", "l_inf")


def _inner(vec: Sequence[Fraction], kind: str) -> Fraction:
    if kind == "l1":
        return sum((abs(a) for a in vec), Fraction(0))
    if kind == "l2_squared":
        return sum((a * a for a in vec), Fraction(0))
    if kind == "l_inf":
        return max((abs(a) for a in vec), default=Fraction(0))
    raise ValueError(f"unknown inner norm {kind!r}")


def _outer(vals: Sequence[Fraction], kind: str) -> Fraction:
    # arguments are nonnegative, so l1 is a plain sum
    if kind == "l1":
        return sum(vals, Fraction(0))
    if kind == "l_inf":
        return max(vals, default=Fraction(0))
    raise ValueError(f"unknown outer norm {kind!r}")


@dataclass(frozen=True)
class ObjectiveSpec:
    """``kind`` is ``"linear"``, ``"clustering_body"`` or ``"custom"``."""

    kind: str
    weights: tuple[Fraction, ...] | None = None
    inner: str | None = None
    outer: str | None = None
    d: int | None = None
    oracle: Oracle | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind == "linear":
            if not self.weights:
                raise ValueError("linear objective needs weights")
            object.__setattr__(self, "weights", tuple(as_fraction(w) for w in self.weights))
        elif self.kind == "clustering_body":
            if self.inner not in INNER_NORMS or self.outer not in OUTER_NORMS:
                raise ValueError(f"clustering body needs inner in {INNER_NORMS} and outer in {OUTER_NORMS}")
            if not self.d or self.d < 1:
                raise ValueError("clustering body needs the utility dimension d")
        elif self.kind == "custom":
            if self.oracle is None:
                raise ValueError("custom objective needs a comparison oracle")
        else:
            raise ValueError(f"unknown objective kind {self.kind!r}")

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    @property
    def has_value(self) -> bool:
        return self.kind != "custom"

    def value(self, y: Sequence[Fraction]) -> Fraction:
        """Explicit value; only defined for linear and clustering-body objectives."""
        if self.kind == "linear":
            if len(y) != len(self.weights):
                raise ValueError(f"objective expects length {len(self.weights)}, got {len(y)}")
            return sum((w * a for w, a in zip(self.weights, y)), Fraction(0))
        if self.kind == "clustering_body":
            if len(y) % self.d:
                raise ValueError(f"length {len(y)} is not a multiple of d={self.d}")
            parts = [y[k : k + self.d] for k in range(0, len(y), self.d)]
            return _outer([_inner(part, self.inner) for part in parts], self.outer)
        raise TypeError("custom objectives are only available through comparisons")

    def leq(self, y: Sequence[Fraction], z: Sequence[Fraction]) -> bool:
        """True iff f(y) <= f(z)."""
        if self.kind == "custom":
            return bool(self.oracle(tuple(y), tuple(z)))
        return self.value(y) <= self.value(z)

    def argmax(self, candidates: Iterable[T], key: Callable[[T], Sequence[Fraction]]) -> T:
        """First candidate (in iteration order) whose ``key`` is f-maximal."""
        best = None
        best_y = None
        for c in candidates:
            y = key(c)
            if best is None or not self.leq(y, best_y):
                best, best_y = c, y
        if best is None:
            raise ValueError("argmax of an empty candidate set")
        return best


def linear(weights: Sequence) -> ObjectiveSpec:
    return ObjectiveSpec("linear", weights=tuple(weights), name="linear")


def sum_objective(length: int) -> ObjectiveSpec:
    """``f(y) = 1^T y``."""
    return ObjectiveSpec("linear", weights=(Fraction(1),) * length, name="sum")


def clustering_body(inner: str, outer: str, d: int) -> ObjectiveSpec:
    return ObjectiveSpec("clustering_body", inner=inner, outer=outer, d=d, name=f"body[{inner},{outer}]")


def custom(oracle: Oracle, name: str = "custom") -> ObjectiveSpec:
    return ObjectiveSpec("custom", oracle=oracle, name=name)

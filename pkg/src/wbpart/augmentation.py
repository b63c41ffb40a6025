"""Graver-best augmentation for linear objectives over an n-fold fiber.

The test set is the Graver basis of the columns the box leaves free, truncated
to the box widths.  Fixed columns cannot move, and a Graver element that does
not fit in the box can never be applied from a feasible point, so both
restrictions keep every usable augmenting direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Callable, Sequence

import numpy as np

from .graver import GraverBasis, GraverConfig, graver_basis
from .reduction import NFoldSystem

_SAFE = 2**62


class AugmentationError(RuntimeError):
    """Augmentation did not terminate within its step cap."""


@dataclass(frozen=True)
class TestSet:
    """Graver basis of the free columns of a system, embedded into ``Z^N``."""

    __test__ = False

    columns: tuple[int, ...]
    basis: GraverBasis
    vectors: np.ndarray = field(compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.basis)


def _widths(sys: NFoldSystem, cols: Sequence[int]) -> tuple[int, ...]:
    out = []
    for k in cols:
        w = sys.upper[k] - sys.lower[k]
        span = sys.slack_span(k)
        out.append(w if span is None else min(w, span))
    return tuple(out)


@lru_cache(maxsize=64)
def _cached_basis(rows: tuple[tuple[int, ...], ...], widths: tuple[int, ...], config: GraverConfig) -> GraverBasis:
    return graver_basis(rows, bounds=widths, method="lift", config=config)


def fiber_test_set(sys: NFoldSystem, config: GraverConfig | None = None) -> TestSet:
    """Truncated Graver basis of the free part of ``sys`` (cached per matrix and box)."""
    config = config or GraverConfig()
    cols, rows = sys.active_submatrix()
    if not cols:
        empty = GraverBasis(matrix=((0,),), vectors=())
        return TestSet((), empty, np.zeros((0, sys.N), dtype=np.int64))
    if not rows:
        rows = [[0] * len(cols)]
    basis = _cached_basis(tuple(tuple(r) for r in rows), _widths(sys, cols), config)
    V = np.zeros((len(basis), sys.N), dtype=np.int64)
    if len(basis):
        V[:, list(cols)] = basis.array()
    return TestSet(tuple(cols), basis, V)


def max_step(x: Sequence[int], g: Sequence[int], lower: Sequence[int], upper: Sequence[int]) -> int:
    """Largest ``alpha >= 0`` with ``lower <= x + alpha*g <= upper``."""
    if not any(g):
        raise ValueError("direction must be nonzero")
    alpha = None
    for xk, gk, lo, up in zip(x, g, lower, upper):
        if gk > 0:
            a = (up - xk) // gk
        elif gk < 0:
            a = (xk - lo) // (-gk)
        else:
            continue
        alpha = a if alpha is None else min(alpha, a)
    return max(alpha, 0)


def _scaled(coeffs: Sequence[Fraction]) -> tuple[list[int], int]:
    scale = lcm(*(Fraction(c).denominator for c in coeffs)) if coeffs else 1
    return [int(Fraction(c) * scale) for c in coeffs], scale


def _alphas(V: np.ndarray, x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    big = np.iinfo(np.int64).max
    pos, neg = V > 0, V < 0
    up = np.where(pos, (upper - x)[None, :] // np.where(pos, V, 1), big).min(axis=1)
    down = np.where(neg, (x - lower)[None, :] // np.where(neg, -V, 1), big).min(axis=1)
    return np.maximum(np.minimum(up, down), 0)


def _best(gains: np.ndarray, alpha: np.ndarray):
    """Row index, alpha and scaled improvement of the Graver-best step (or None)."""
    if len(gains) == 0:
        return None
    if gains.dtype == object:
        improvement = np.array([int(a) * int(g) for a, g in zip(alpha, gains)], dtype=object)
    else:
        improvement = alpha * gains
    k = int(np.argmax(improvement))  # first maximum = lexicographically smallest g
    if improvement[k] <= 0:
        return None
    return k, int(alpha[k]), int(improvement[k])


def graver_best_step(
    x: Sequence[int],
    basis: GraverBasis | np.ndarray | Sequence[Sequence[int]],
    objective: Sequence[Fraction],
    lower: Sequence[int],
    upper: Sequence[int],
) -> tuple[tuple[int, ...], int, Fraction] | None:
    """Best ``(g, alpha, improvement)`` over the basis for a linear objective.

    For a linear objective the gain along ``g`` is linear in ``alpha``, so the
    best length for an improving ``g`` is its maximal feasible step.  Ties go
    to the lexicographically smallest ``g``; ``None`` certifies that no basis
    direction improves.
    """
    vecs = sorted(tuple(int(a) for a in v) for v in (basis.vectors if isinstance(basis, GraverBasis) else basis))
    if not vecs:
        return None
    V = np.array(vecs, dtype=np.int64)
    cint, scale = _scaled(objective)
    gains = V @ np.array(cint, dtype=np.int64)
    found = _best(gains, _alphas(V, np.array(x, dtype=np.int64), np.array(lower, dtype=np.int64), np.array(upper, dtype=np.int64)))
    if found is None:
        return None
    k, alpha, imp = found
    return vecs[k], alpha, Fraction(imp, scale)


@dataclass(frozen=True)
class AugmentationStep:
    g: tuple[int, ...]
    alpha: int
    delta: Fraction


@dataclass
class AugmentationTrace:
    start_objective: Fraction
    final_objective: Fraction
    steps: list[AugmentationStep] = field(default_factory=list)
    basis_size: int = 0

    def to_text(self) -> str:
        lines = [f"# start {self.start_objective} final {self.final_objective} steps {len(self.steps)}"]
        lines += [f"{k} {st.alpha} {st.delta}" for k, st in enumerate(self.steps)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SolverConfig:
    graver: GraverConfig = GraverConfig()
    max_steps: int = 100_000


def augment(
    x0: Sequence[int],
    V: np.ndarray,
    gains: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    max_steps: int,
    alphas: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    """Repeat Graver-best steps until none improves.

    ``gains`` holds the scaled objective gain of every row of ``V``.
    ``alphas(x)`` may supply the maximal step of every row at ``x`` (useful
    when it is cached across objectives); by default only improving rows
    are examined.  Returns the final point and the steps as ``(row, alpha,
    scaled improvement)``.
    """
    if alphas is None:
        improving = gains > 0
        rows = np.flatnonzero(improving)
        V, gains = V[improving], gains[improving]

        def alphas(x):
            return _alphas(V, x, lower, upper)

    else:
        rows = np.arange(len(V))
    x = np.array(x0, dtype=np.int64)
    steps = []
    while True:
        found = _best(gains, alphas(x))
        if found is None:
            return x, steps
        if len(steps) >= max_steps:
            raise AugmentationError(f"augmentation exceeded max_steps={max_steps}")
        k, alpha, imp = found
        x = x + alpha * V[k]
        steps.append((int(rows[k]), alpha, imp))


def gain_vector(V: np.ndarray, cint: Sequence[int]) -> np.ndarray:
    """``V @ cint`` in int64 when that cannot overflow, exact Python ints otherwise."""
    vmax = int(np.abs(V).max()) if V.size else 0
    bound = max((abs(int(c)) for c in cint), default=0) * max(vmax, 1) * max(V.shape[1], 1)
    if bound < _SAFE:
        return V @ np.array([int(c) for c in cint], dtype=np.int64)
    return V.astype(object) @ np.array([int(c) for c in cint], dtype=object)


def solve_linear(
    sys: NFoldSystem,
    x0: Sequence[int],
    weights: Sequence,
    test_set: TestSet | None = None,
    config: SolverConfig | None = None,
) -> tuple[tuple[int, ...], AugmentationTrace]:
    """Maximize ``weights^T C x`` over the fiber of ``sys`` starting from ``x0``."""
    config = config or SolverConfig()
    if not sys.is_feasible(x0):
        raise ValueError("start vector is not feasible for the system")
    coeffs = sys.objective_columns([Fraction(w) for w in weights])
    ts = test_set if test_set is not None else fiber_test_set(sys, config.graver)
    cint, scale = _scaled(coeffs)
    return run_scaled(sys, x0, ts, cint, scale, config.max_steps)


def run_scaled(sys: NFoldSystem, x0: Sequence[int], ts: TestSet, cint: Sequence[int], scale: int, max_steps: int):
    """Augment for the column objective ``cint / scale`` (``x0`` assumed feasible)."""
    V = ts.vectors
    cols = list(ts.columns)
    lower = np.array(sys.lower, dtype=np.int64)[cols]
    upper = np.array(sys.upper, dtype=np.int64)[cols]
    x = np.array(x0, dtype=np.int64)
    xa, steps = augment(x[cols], V[:, cols], gain_vector(V, cint), lower, upper, max_steps)
    x[cols] = xa
    start = Fraction(sum(int(c) * int(v) for c, v in zip(cint, x0) if v), scale)
    trace = AugmentationTrace(start_objective=start, final_objective=start, basis_size=len(ts))
    for row, alpha, imp in steps:
        delta = Fraction(imp, scale)
        trace.steps.append(AugmentationStep(tuple(int(a) for a in V[row]), alpha, delta))
        trace.final_objective += delta
    return tuple(int(a) for a in x), trace


def linear_value(sys: NFoldSystem, x: Sequence[int], weights: Sequence) -> Fraction:
    return sum((Fraction(w) * y for w, y in zip(weights, sys.project(x))), Fraction(0))

"""Convex maximization over a fiber through linear subproblems.

Edge directions of the projected polytope ``conv{Cx : x feasible}`` are among
the projections ``Cg`` of the Graver elements.  A linear functional taken
from the interior of a cell of the central hyperplane arrangement normal to
those directions has a unique maximizer over the polytope, which is a
vertex; running the linear solver once per cell therefore visits every
vertex, and a convex ``f`` attains its maximum at one of them.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

import numpy as np

from .augmentation import (
    AugmentationStep,
    AugmentationTrace,
    SolverConfig,
    TestSet,
    _alphas,
    augment,
    fiber_test_set,
    solve_linear,
)
from .objectives import ObjectiveSpec
from .reduction import NFoldSystem

Direction = tuple[int, ...]


class ConvexPathTooLarge(RuntimeError):
    """Objective dimension or number of edge directions exceeds the desk-scale caps."""


@dataclass(frozen=True)
class ConvexConfig:
    max_dim: int = 3
    max_directions: int = 400
    workers: int = 1
    solver: SolverConfig = SolverConfig()


def _primitive(v: Sequence[int]) -> Direction:
    g = 0
    for a in v:
        g = gcd(g, int(a))
    return tuple(int(a) // g for a in v) if g else tuple(int(a) for a in v)


def _integer_objective(sys: NFoldSystem) -> np.ndarray:
    """Objective matrix scaled by the common denominator (row directions are kept)."""
    C = sys.objective_matrix
    scale = lcm(*(a.denominator for row in C for a in row)) if C else 1
    return np.array([[int(a * scale) for a in row] for row in C], dtype=object)


def projected_edge_directions(sys: NFoldSystem, basis: TestSet | np.ndarray | Sequence[Sequence[int]]) -> set[Direction]:
    """Primitive integer directions of ``{C g}``, zero projections dropped."""
    V = basis.vectors if isinstance(basis, TestSet) else np.asarray(basis, dtype=np.int64)
    if len(V) == 0:
        return set()
    P = V.astype(object) @ _integer_objective(sys).T
    out = set()
    for row in P:
        if any(row):
            out.add(_primitive(row))
    return out


def _sign(a: Fraction) -> int:
    return (a > 0) - (a < 0)


def _samples(points: list[Fraction]) -> list[Fraction]:
    """One point in each open interval cut out by ``points`` on the line."""
    pts = sorted(set(points))
    if not pts:
        return [Fraction(0)]
    out = [pts[0] - 1]
    out += [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    out.append(pts[-1] + 1)
    return out


def _hyperplanes(dirs: set[Direction]) -> list[Direction]:
    # e and -e describe the same hyperplane
    normals = set()
    for e in dirs:
        if any(e):
            lead = next(a for a in e if a)
            normals.add(e if lead > 0 else tuple(-a for a in e))
    return sorted(normals)


def _plane_cells(normals: list[Direction], t: int) -> list[tuple[Fraction, ...]]:
    """Points covering every cell of the line arrangement cut by ``normals`` on the plane ``y_3 = t``.

    Sweeping left to right, cells only open where the sweep line crosses a
    vertical line (every region is new) or a vertex (the wedges between
    the lines through it, taken just right of it).
    """
    lines = [e for e in normals if e[0] or e[1]]
    vertical = {Fraction(-e[2] * t, e[0]) for e in lines if e[1] == 0}
    slanted = [e for e in lines if e[1]]
    # two planes meet along their cross product; normalized it names the vertex
    groups: dict[tuple[int, int, int], set[int]] = {}
    for u in range(len(slanted)):
        e = slanted[u]
        for v in range(u + 1, len(slanted)):
            f = slanted[v]
            w = e[0] * f[1] - e[1] * f[0]
            if not w:
                continue
            X, Y = e[1] * f[2] - e[2] * f[1], e[2] * f[0] - e[0] * f[2]
            g = gcd(gcd(X, Y), w) * (1 if w > 0 else -1)
            groups.setdefault((X // g, Y // g, w // g), set()).update((u, v))
    at_x: dict[Fraction, list[set[int]]] = {}
    for (X, _, w), members in groups.items():
        at_x.setdefault(Fraction(t * X, w), []).append(members)
    xs = sorted(set(at_x) | vertical)
    sample_x = _samples(xs)

    def height(e: Direction, x: Fraction) -> Fraction:
        return -(e[0] * x + e[2] * t) / e[1]

    def column(x: Fraction) -> list[tuple[Fraction, ...]]:
        return [(x, y, Fraction(t)) for y in _samples([height(e, x) for e in slanted])]

    out = column(sample_x[0])
    for k, xc in enumerate(xs):
        xr = sample_x[k + 1]
        if xc in vertical:
            out += column(xr)
            continue
        for members in at_x[xc]:
            # just right of the vertex no other line runs between two
            # neighbouring lines through it
            heights = sorted(height(slanted[i], xr) for i in members)
            out += [(xr, (h + g) / 2, Fraction(t)) for h, g in zip(heights, heights[1:])]
    return out


def _chart_points(normals: list[Direction], c: int, t: int) -> list[tuple[Fraction, ...]]:
    """Cell representatives of the affine arrangement in the chart ``y_c = t``."""
    if c == 2:
        crit = [Fraction(-e[1] * t, e[0]) for e in normals if e[0]]
        return [(y1, Fraction(t)) for y1 in _samples(crit)]
    return _plane_cells(normals, t)


_exact_sign = np.frompyfunc(lambda v: (v > 0) - (v < 0), 1, 1)


def _sign_keys(normals: list[Direction], points: list[tuple[Fraction, ...]]) -> np.ndarray:
    """Sign of ``e . y`` for every point (rows) and normal (columns)."""
    scaled = []
    for y in points:
        den = lcm(*(a.denominator for a in y))
        scaled.append([int(a * den) for a in y])  # positive rescaling keeps signs
    E = np.array(normals, dtype=object).T
    P = np.array(scaled, dtype=object)
    big = max(abs(v) for row in scaled for v in row) * max(abs(a) for e in normals for a in e) * len(normals[0])
    if big < 2**62:
        return np.sign(P.astype(np.int64) @ E.astype(np.int64))
    return _exact_sign(P @ E).astype(np.int64)


def test_directions(dirs: set[Direction] | Sequence[Direction], c: int, max_directions: int = 400) -> list[tuple[Fraction, ...]]:
    """One interior point for every full-dimensional cell of the central
    arrangement ``{y : e.y = 0}``, ``e`` in ``dirs``.

    Every open cell meets one of the charts ``y_c = +1`` or ``y_c = -1`` in an
    open set, so covering the affine arrangements there hits every cell;
    duplicates are merged by sign vector.
    """
    if c < 1 or c > 3:
        raise ConvexPathTooLarge(f"cell enumeration supports c <= 3, got c = {c}")
    dirs = set(dirs)
    if any(len(e) != c for e in dirs):
        raise ValueError(f"directions must have length {c}")
    normals = _hyperplanes(dirs)
    if len(normals) > max_directions:
        raise ConvexPathTooLarge(
            f"{len(normals)} edge directions exceed the cap {max_directions}; use a linear objective or a smaller instance"
        )
    if c == 1:
        return [(Fraction(1),), (Fraction(-1),)]
    points = [y for t in (1, -1) for y in _chart_points(normals, c, t)]
    if not normals:
        return [points[0]]
    keys = _sign_keys(normals, points)
    assert not (keys == 0).any()
    cells: dict[tuple[int, ...], tuple[Fraction, ...]] = {}
    for key, y in zip(map(tuple, keys.tolist()), points):
        cells.setdefault(key, y)
    return list(cells.values())


test_directions.__test__ = False  # not a pytest test despite the name


@dataclass
class ConvexResult:
    """Chosen point, its projection and the distinct candidates ``(lambda, x, Cx)``.

    ``lambda`` is the first cell representative that produced ``x`` (``None``
    for the start point).  Trace objectives are in the integer scaling of
    each ``lambda``, so they are comparable within a trace only.
    """

    x: tuple[int, ...]
    projection: tuple[Fraction, ...]
    candidates: list[tuple[tuple[Fraction, ...], tuple[int, ...], tuple[Fraction, ...]]] = field(default_factory=list)
    traces: list[AugmentationTrace] = field(default_factory=list)


def _int_matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Exact product of integer arrays, in int64 when the magnitudes allow it."""
    amax = max((abs(int(v)) for v in A.flat), default=0)
    bmax = max((abs(int(v)) for v in B.flat), default=0)
    if amax * bmax * max(A.shape[-1], 1) < 2**62:
        return A.astype(np.int64) @ B.astype(np.int64)
    return A.astype(object) @ B.astype(object)


def _sweep(
    sys: NFoldSystem, ts: TestSet, lambdas: list[tuple[Fraction, ...]], x0: tuple[int, ...], max_steps: int
) -> list[tuple[tuple[Fraction, ...], tuple[int, ...], AugmentationTrace]]:
    """Linear optimum for each ``lambda`` in turn, each solve restarting from the previous optimum."""
    C = _integer_objective(sys)
    V = ts.vectors
    cols = list(ts.columns)
    Va = V[:, cols]  # fixed columns never move
    P = _int_matmul(V, C.T) if len(V) else np.zeros((0, sys.c), dtype=np.int64)
    pmax = int(np.abs(P).max()) if P.size else 0
    lower = np.array(sys.lower, dtype=np.int64)[cols]
    upper = np.array(sys.upper, dtype=np.int64)[cols]
    alpha_cache: dict[bytes, np.ndarray] = {}
    cx_cache: dict[bytes, list[int]] = {}

    # step lengths depend on the point only, so they are shared by all lambdas
    def alphas(xa: np.ndarray) -> np.ndarray:
        key = xa.tobytes()
        if key not in alpha_cache:
            alpha_cache[key] = _alphas(Va, xa, lower, upper)
        return alpha_cache[key]

    def projection(x: np.ndarray) -> list[int]:
        key = x.tobytes()
        if key not in cx_cache:
            cx_cache[key] = [int(v) for v in _int_matmul(C, x[:, None])[:, 0]]
        return cx_cache[key]

    out = []
    x = np.array(x0, dtype=np.int64)
    for lam in lambdas:
        den = lcm(*(a.denominator for a in lam))
        lint = [int(a * den) for a in lam]
        if pmax * max(map(abs, lint)) * sys.c < 2**62:
            gains = P @ np.array(lint, dtype=np.int64)
        else:
            gains = P.astype(object) @ np.array(lint, dtype=object)
        start = sum(a * b for a, b in zip(lint, projection(x)))
        xa, steps = augment(x[cols], Va, gains, lower, upper, max_steps, alphas)
        x = x.copy()
        x[cols] = xa
        trace = AugmentationTrace(Fraction(start), Fraction(start), basis_size=len(ts))
        for row, alpha, imp in steps:
            trace.steps.append(AugmentationStep(tuple(int(a) for a in V[row]), alpha, Fraction(imp)))
            trace.final_objective += imp
        out.append((lam, tuple(int(a) for a in x), trace))
    return out


def solve_convex(
    sys: NFoldSystem,
    x0: Sequence[int],
    spec: ObjectiveSpec,
    test_set: TestSet | None = None,
    config: ConvexConfig | None = None,
) -> ConvexResult:
    """Oracle-best point among the linear optima of all cell representatives.

    Each linear solve restarts from the previous optimum; cells come in
    sweep order, so neighbouring cells usually share their optimum and the
    restart is cheap.  With ``workers > 1`` the cells are split into
    contiguous chunks, each swept from ``x0`` in its own process; candidates
    are merged in cell order either way.
    """
    config = config or ConvexConfig()
    if spec.is_linear:
        x, trace = solve_linear(sys, x0, spec.weights, test_set, config.solver)
        return ConvexResult(x, sys.project(x), [(spec.weights, x, sys.project(x))], [trace])
    if sys.c > config.max_dim:
        raise ConvexPathTooLarge(f"objective dimension c = {sys.c} exceeds max_dim = {config.max_dim}")
    x0 = tuple(int(a) for a in x0)
    if not sys.is_feasible(x0):
        raise ValueError("start vector is not feasible for the system")
    ts = test_set if test_set is not None else fiber_test_set(sys, config.solver.graver)
    lambdas = test_directions(projected_edge_directions(sys, ts), sys.c, config.max_directions)

    workers = max(1, min(config.workers, len(lambdas)))
    if workers == 1:
        swept = _sweep(sys, ts, lambdas, x0, config.solver.max_steps)
    else:
        size = -(-len(lambdas) // workers)
        chunks = [lambdas[k : k + size] for k in range(0, len(lambdas), size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_sweep, *zip(*[(sys, ts, ch, x0, config.solver.max_steps) for ch in chunks]))
            swept = [item for part in parts for item in part]

    seen = {x0}
    candidates = [(None, x0, sys.project(x0))]
    for lam, x, _ in swept:
        if x not in seen:
            seen.add(x)
            candidates.append((lam, x, sys.project(x)))
    best = spec.argmax(candidates, key=lambda cand: cand[2])
    return ConvexResult(best[1], best[2], candidates, [trace for _, _, trace in swept])

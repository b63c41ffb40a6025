"""Reductions of the partitioning models to n-fold integer programs.

Every item owns one column block.  Inside a block the columns are ordered as
slack+ coordinates, slack- coordinates, then the ``m*p`` assignment
coordinates, weight-entry major and cluster minor.  The exact-size model has
no slack columns.  Slack coordinates are indexed cluster major, feature minor
so that row ``i*s + f`` of the top block belongs to cluster ``i`` and
feature ``f``.

The full n-fold matrix is never stored; products use the block structure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import (
    FeasibilityReport,
    Instance,
    IntMatrix,
    ModelError,
    Partition,
    cluster_feature_totals,
    is_feasible,
)

MODELS = ("p1", "p2", "p3")


class ReductionError(ModelError):
    """Instance does not meet the preconditions of the requested build."""


class InfeasiblePartition(ModelError):
    def __init__(self, report: FeasibilityReport):
        self.report = report
        details = ", ".join(f"cluster {v.cluster} feature {v.feature} {v.kind} {abs(v.amount)}" for v in report.violations)
        super().__init__(f"partition violates the cluster bounds: {details}")


class DecodeError(ValueError):
    """Assignment block of a vector is not a unit vector."""


@dataclass(frozen=True)
class ColumnTag:
    kind: str  # "slack+", "slack-" or "assign"
    cluster: int
    feature: int | None = None
    omega: int | None = None


@dataclass(frozen=True)
class NFoldSystem:
    model: str
    block_top: IntMatrix
    block_bottom: tuple[int, ...]
    n: int
    rhs: tuple[int, ...]
    lower: tuple[int, ...]
    upper: tuple[int, ...]
    objective_blocks: tuple[tuple[tuple[Fraction, ...], ...], ...]
    decode_meta: tuple[ColumnTag, ...]
    s: int
    p: int
    m: int
    d: int
    nu: tuple[int, ...]

    @property
    def t(self) -> int:
        return len(self.block_bottom)

    @property
    def r1(self) -> int:
        return len(self.block_top)

    @property
    def N(self) -> int:
        return self.n * self.t

    @property
    def c(self) -> int:
        return self.d * self.p

    @property
    def slack_width(self) -> int:
        return 0 if self.model == "p1" else 2 * self.s * self.p

    @property
    def objective_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        """Dense ``c x N`` objective matrix (for inspection; solvers use blocks)."""
        return tuple(tuple(a for blk in self.objective_blocks for a in blk[r]) for r in range(self.c))

    def column(self, k: int) -> tuple[int, ColumnTag]:
        """(item, tag) of global column ``k``."""
        j, off = divmod(k, self.t)
        return j, self.decode_meta[off]

    def assign_column(self, item: int, omega: int, cluster: int) -> int:
        return item * self.t + self.slack_width + omega * self.p + cluster

    def slack_column(self, sign: str, cluster: int, feature: int) -> int:
        """Global column of a block-1 slack coordinate (``sign`` is '+' or '-')."""
        if self.model == "p1":
            raise ReductionError("the exact-size system has no slack columns")
        base = 0 if sign == "+" else self.s * self.p
        return base + cluster * self.s + feature

    def slack_span(self, k: int) -> int | None:
        """Upper minus lower bound of the cluster row a slack column closes.

        Any feasible point has that slack in ``[0, span]``; ``None`` for
        non-slack columns.
        """
        _, tag = self.column(k)
        if tag.kind == "assign":
            return None
        r = tag.cluster * self.s + tag.feature
        sp = self.s * self.p
        return self.rhs[r] - self.rhs[sp + r]

    # -- products ---------------------------------------------------------

    def _blocks(self, x: Sequence[int]) -> list[Sequence[int]]:
        if len(x) != self.N:
            raise ValueError(f"expected a vector of length {self.N}, got {len(x)}")
        return [x[j * self.t : (j + 1) * self.t] for j in range(self.n)]

    def matvec(self, x: Sequence[int]) -> tuple[int, ...]:
        """``A^(n) x`` computed block by block."""
        top = [0] * self.r1
        bottom = []
        for xb in self._blocks(x):
            for r, row in enumerate(self.block_top):
                top[r] += sum(a * int(v) for a, v in zip(row, xb) if a)
            bottom.append(sum(a * int(v) for a, v in zip(self.block_bottom, xb) if a))
        return tuple(top) + tuple(bottom)

    def is_feasible(self, x: Sequence[int]) -> bool:
        x = [int(v) for v in x]
        if any(v < lo or v > up for v, lo, up in zip(x, self.lower, self.upper)):
            return False
        return self.matvec(x) == self.rhs

    def project(self, x: Sequence[int]) -> tuple[Fraction, ...]:
        """Objective matrix times ``x``."""
        out = [Fraction(0)] * self.c
        for blk, xb in zip(self.objective_blocks, self._blocks(x)):
            for r in range(self.c):
                out[r] += sum((a * int(v) for a, v in zip(blk[r], xb) if a and v), Fraction(0))
        return tuple(out)

    def objective_columns(self, weights: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Linear coefficients ``weights^T C`` of every global column."""
        if len(weights) != self.c:
            raise ValueError(f"objective weights need length {self.c}")
        out = []
        for blk in self.objective_blocks:
            for k in range(self.t):
                out.append(sum((Fraction(w) * blk[r][k] for r, w in enumerate(weights) if blk[r][k]), Fraction(0)))
        return tuple(out)

    def dense_matrix(self) -> list[list[int]]:
        rows = [[0] * self.N for _ in range(self.r1 + self.n)]
        for j in range(self.n):
            off = j * self.t
            for r, row in enumerate(self.block_top):
                rows[r][off : off + self.t] = row
            rows[self.r1 + j][off : off + self.t] = self.block_bottom
        return rows

    def active_columns(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.N) if self.upper[k] > self.lower[k])

    def active_submatrix(self) -> tuple[tuple[int, ...], list[list[int]]]:
        """Columns that are not fixed by their bounds and the rows of ``A^(n)``
        restricted to them (all-zero rows dropped)."""
        cols = self.active_columns()
        dense = self.dense_matrix()
        rows = [[row[k] for k in cols] for row in dense]
        return cols, [r for r in rows if any(r)]

    def dump_text(self) -> str:
        """Plain-text listing: header, then A, b, l, u as space-separated integers."""
        lines = [f"# {self.model} n={self.n} t={self.t} r1={self.r1} N={self.N}", "A"]
        lines += [" ".join(map(str, row)) for row in self.dense_matrix()]
        lines += ["b", " ".join(map(str, self.rhs))]
        lines += ["l", " ".join(map(str, self.lower))]
        lines += ["u", " ".join(map(str, self.upper))]
        return "\n".join(lines) + "\n"


def _assignment_part(inst: Instance) -> tuple[list[list[int]], list[ColumnTag]]:
    """``A1'``: column ``k*p + i`` holds ``W_i^k`` in the rows of cluster ``i``."""
    s, p, m = inst.s, inst.p, inst.domain.m
    cols = []
    tags = []
    for k in range(m):
        for i in range(p):
            col = [0] * (s * p)
            for f, w in enumerate(inst.domain.column(k, i)):
                col[i * s + f] = w
            cols.append(col)
            tags.append(ColumnTag("assign", cluster=i, omega=k))
    rows = [[cols[c][r] for c in range(m * p)] for r in range(s * p)]
    return rows, tags


def _objective_block(inst: Instance, j: int, slack: int) -> tuple[tuple[Fraction, ...], ...]:
    d, p, m = inst.d, inst.p, inst.domain.m
    C = inst.items[j].utility
    rows = [[Fraction(0)] * (slack + m * p) for _ in range(d * p)]
    for k in range(m):
        for i in range(p):
            for r in range(d):
                rows[i * d + r][slack + k * p + i] = C[r][i]
    return tuple(tuple(r) for r in rows)


def _assignment_upper(inst: Instance, j: int) -> list[int]:
    m, p = inst.domain.m, inst.p
    return [1 if k == inst.items[j].weight_index else 0 for k in range(m) for _ in range(p)]


def slack_caps(inst: Instance) -> tuple[int, ...]:
    """Componentwise absolute weight sum over all items and clusters."""
    nu = [0] * inst.s
    for j in range(inst.n):
        W = inst.weight(j)
        for f in range(inst.s):
            nu[f] += sum(abs(w) for w in W[f])
    return tuple(nu)


def build_p1(inst: Instance) -> NFoldSystem:
    if inst.s != 1:
        raise ReductionError("exact-size build needs s = 1; use build_p3")
    if not all(b.is_exact for b in inst.bounds):
        raise ReductionError("exact-size build needs lower = upper; use build_p2")
    A1, tags = _assignment_part(inst)
    t = len(tags)
    n = inst.n
    upper = []
    for j in range(n):
        upper += _assignment_upper(inst, j)
    rhs = tuple(b.lower[0] for b in inst.bounds) + (1,) * n
    return NFoldSystem(
        model="p1",
        block_top=tuple(tuple(r) for r in A1),
        block_bottom=(1,) * t,
        n=n,
        rhs=rhs,
        lower=(0,) * (n * t),
        upper=tuple(upper),
        objective_blocks=tuple(_objective_block(inst, j, 0) for j in range(n)),
        decode_meta=tuple(tags),
        s=1,
        p=inst.p,
        m=inst.domain.m,
        d=inst.d,
        nu=(),
    )


def _build_slacked(inst: Instance, model: str) -> NFoldSystem:
    s, p, n = inst.s, inst.p, inst.n
    sp = s * p
    A1, tags = _assignment_part(inst)
    top = []
    for r in range(sp):
        top.append([int(c == r) for c in range(sp)] + [0] * sp + A1[r])
    for r in range(sp):
        top.append([0] * sp + [-int(c == r) for c in range(sp)] + A1[r])
    slack_tags = [ColumnTag("slack+", cluster=i, feature=f) for i in range(p) for f in range(s)]
    slack_tags += [ColumnTag("slack-", cluster=i, feature=f) for i in range(p) for f in range(s)]
    meta = tuple(slack_tags + tags)
    bottom = (0,) * (2 * sp) + (1,) * len(tags)

    nu = slack_caps(inst)
    plus = [b.upper[f] for b in inst.bounds for f in range(s)]
    minus = [b.lower[f] for b in inst.bounds for f in range(s)]
    # nu suffices whenever the bounds lie inside the reachable range; the span
    # of the bound interval is an exact cap for every feasible point otherwise
    caps = [max(nu[r % s], plus[r] - minus[r]) for r in range(sp)]
    upper = []
    for j in range(n):
        upper += (caps + caps) if j == 0 else [0] * (2 * sp)
        upper += _assignment_upper(inst, j)
    return NFoldSystem(
        model=model,
        block_top=tuple(tuple(r) for r in top),
        block_bottom=bottom,
        n=n,
        rhs=tuple(plus) + tuple(minus) + (1,) * n,
        lower=(0,) * (n * len(meta)),
        upper=tuple(upper),
        objective_blocks=tuple(_objective_block(inst, j, 2 * sp) for j in range(n)),
        decode_meta=meta,
        s=s,
        p=p,
        m=inst.domain.m,
        d=inst.d,
        nu=nu,
    )


def build_p2(inst: Instance) -> NFoldSystem:
    if inst.s != 1:
        raise ReductionError("bounded single-feature build needs s = 1; use build_p3")
    return _build_slacked(inst, "p2")


def build_p3(inst: Instance) -> NFoldSystem:
    return _build_slacked(inst, "p3")


def build(inst: Instance, model: str) -> NFoldSystem:
    builders = {"p1": build_p1, "p2": build_p2, "p3": build_p3}
    if model not in builders:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    return builders[model](inst)


def encode_assignment(sys: NFoldSystem, part: Partition, inst: Instance) -> tuple[int, ...]:
    """Lift a feasible partition to a feasible point of ``sys``."""
    report = is_feasible(inst, part)
    if not report:
        raise InfeasiblePartition(report)
    if inst.n != sys.n:
        raise ModelError("instance and system disagree on the item count")
    x = [0] * sys.N
    for j, i in enumerate(part.assignment):
        x[sys.assign_column(j, inst.items[j].weight_index, i)] = 1
    if sys.model != "p1":
        totals = cluster_feature_totals(inst, part)
        sp = sys.s * sys.p
        for i in range(sys.p):
            for f in range(sys.s):
                r = i * sys.s + f
                x[sys.slack_column("+", i, f)] = sys.rhs[r] - totals[i][f]
                x[sys.slack_column("-", i, f)] = totals[i][f] - sys.rhs[sp + r]
    if not sys.is_feasible(x):
        raise ModelError("encoded vector is infeasible; instance does not match the system")
    return tuple(x)


@dataclass(frozen=True)
class DecodedSolution:
    partition: Partition
    slack_plus: tuple[tuple[int, ...], ...]  # per cluster, per feature
    slack_minus: tuple[tuple[int, ...], ...]


def decode_solution(sys: NFoldSystem, x: Sequence[int]) -> DecodedSolution:
    x = [int(v) for v in x]
    if len(x) != sys.N:
        raise DecodeError(f"expected a vector of length {sys.N}, got {len(x)}")
    assignment = []
    sw = sys.slack_width
    for j in range(sys.n):
        block = x[j * sys.t + sw : (j + 1) * sys.t]
        hot = [k for k, v in enumerate(block) if v]
        if len(hot) != 1 or block[hot[0]] != 1:
            raise DecodeError(f"item {j}: assignment block {block} is not a unit vector")
        assignment.append(sys.decode_meta[sw + hot[0]].cluster)
    if sys.model == "p1":
        empty = tuple(() for _ in range(sys.p))
        return DecodedSolution(Partition(tuple(assignment)), empty, empty)
    plus = tuple(tuple(x[sys.slack_column("+", i, f)] for f in range(sys.s)) for i in range(sys.p))
    minus = tuple(tuple(x[sys.slack_column("-", i, f)] for f in range(sys.s)) for i in range(sys.p))
    return DecodedSolution(Partition(tuple(assignment)), plus, minus)

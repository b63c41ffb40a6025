"""Command-line driver: solve, generate, verify, oracle and graver.

Exit codes: 0 success, 2 infeasible, 3 resource cap exceeded, 4 input error,
5 internal invariant failure (including a report that does not verify).
Machine-readable output goes to ``--output``; a short summary goes to
stdout and timings to stderr.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from typing import Sequence

from .augmentation import AugmentationError, SolverConfig
from .brute import DEFAULT_CAP, EnumerationTooLarge, NoFeasiblePartition, brute_optimum
from .convex import ConvexConfig, ConvexPathTooLarge
from .graver import GraverBasisTooLarge, GraverConfig, graver_basis
from .io import FormatError, dumps, instance_to_dict, load_instance, load_json, parse_rat, rat, solution_to_dict
from .land import (
    LAND_OBJECTIVES,
    LandInstance,
    approximation_factor,
    evaluate_f2,
    f2_objective,
    farmer_reports,
    generate_instance,
    has_approximation_factor,
    land_objective,
    objective_value,
    solve_land,
)
from .model import ModelError, Partition, is_feasible
from .objectives import INNER_NORMS, OUTER_NORMS
from .reduction import MODELS, InfeasiblePartition, ReductionError

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_CAP = 3
EXIT_INPUT = 4
EXIT_INTERNAL = 5


class VerificationFailed(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _weights(text: str | None) -> list[Fraction] | None:
    if text is None:
        return None
    return [parse_rat(a) for a in text.split(",")]


def _deviation_table(per_farmer) -> str:
    lines = ["farmer  feature  lower  total  upper"]
    for i, f in enumerate(per_farmer):
        for k, (lo, t, up) in enumerate(zip(f.lower, f.totals, f.upper)):
            lines.append(f"{i:>6}  {k:>7}  {lo:>5}  {t:>5}  {up:>5}")
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    li = load_instance(args.instance)
    graver = GraverConfig(max_size=args.max_basis)
    solver = SolverConfig(graver=graver, max_steps=args.max_steps)
    convex = ConvexConfig(max_directions=args.max_directions, workers=args.threads, solver=solver)
    t0 = time.perf_counter()
    sol = solve_land(
        li,
        args.objective,
        args.model,
        weights=_weights(args.weights),
        body=(args.inner, args.outer),
        solver=solver,
        convex=convex,
    )
    elapsed = time.perf_counter() - t0
    _write(args.output, dumps(solution_to_dict(sol)))
    if args.trace:
        _write(args.trace, sol.trace.to_text())
    if args.output not in (None, "-"):
        print(f"objective {sol.objective} ({sol.model}): value {rat(sol.value)}")
        print(f"assignment {' '.join(map(str, sol.partition.assignment))}")
        print(f"f2 {rat(sol.f2_value)}", end="")
        if sol.approximation_factor is not None:
            print(f"  approximation factor {rat(sol.approximation_factor)}", end="")
        print(f"  steps {len(sol.trace.steps)}  graver basis {sol.trace.basis_size}")
        sys.stdout.write(_deviation_table(sol.per_farmer))
    print(f"solve time {elapsed:.3f}s", file=sys.stderr)
    return EXIT_OK


def cmd_generate(args) -> int:
    deviation = parse_rat(args.deviation)
    if deviation < 0:
        raise FormatError("deviation must be nonnegative")
    li = generate_instance(args.seed, args.lots, args.farmers, args.features, args.omega, deviation, side=args.side)
    _write(args.output, dumps(instance_to_dict(li)))
    return EXIT_OK


def verify_report(li: LandInstance, report: dict) -> None:
    """Recompute everything the report states; raise VerificationFailed on any difference."""
    try:
        objective = report["objective"]
        assignment = report["assignment"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"report misses field {exc}") from exc
    if objective not in LAND_OBJECTIVES:
        raise FormatError(f"unknown objective {objective!r} in report")
    if not isinstance(assignment, list) or any(isinstance(a, bool) or not isinstance(a, int) for a in assignment):
        raise FormatError("assignment must be a list of farmer indices")
    part = Partition(tuple(assignment))
    if part.n != li.n or any(not 0 <= a < li.p for a in assignment):
        raise VerificationFailed("assignment does not match the instance", EXIT_INFEASIBLE)

    weights = report.get("weights")
    body = report.get("body") or {"inner": "l1", "outer": "l1"}
    inst, spec = land_objective(
        li,
        objective,
        None if weights is None else [parse_rat(w) for w in weights],
        (body.get("inner"), body.get("outer")),
    )
    feas = is_feasible(inst, part)
    if not feas:
        raise VerificationFailed(str(InfeasiblePartition(feas)), EXIT_INFEASIBLE)

    expected = {
        "value": rat(objective_value(li, part, objective, spec, inst)),
        "f2_value": rat(evaluate_f2(li, part)),
        "approximation_factor": (
            rat(approximation_factor(li)) if objective == "f3" and has_approximation_factor(li) else None
        ),
        "per_farmer": [
            {
                "totals": list(f.totals),
                "lower": list(f.lower),
                "upper": list(f.upper),
                "slack_plus": list(f.slack_plus),
                "slack_minus": list(f.slack_minus),
            }
            for f in farmer_reports(li, part)
        ],
    }
    for key, want in expected.items():
        got = report.get(key)
        if key != "per_farmer" and got is not None:
            got = rat(parse_rat(got))
        if got != want:
            raise VerificationFailed(f"{key} mismatch: report has {got!r}, recomputed {want!r}", EXIT_INTERNAL)


def cmd_verify(args) -> int:
    li = load_instance(args.instance)
    report = load_json(args.solution)
    try:
        verify_report(li, report)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return exc.code
    print("verified")
    return EXIT_OK


def cmd_oracle(args) -> int:
    li = load_instance(args.instance)
    if args.objective == "f2":
        inst, spec = f2_objective(li)
    else:
        inst, spec = land_objective(li, args.objective, _weights(args.weights), (args.inner, args.outer))
    res = brute_optimum(inst, spec, cap=args.cap)
    value = objective_value(li, res.partition, args.objective, spec, inst) if args.objective != "f2" else evaluate_f2(li, res.partition)
    print(f"optimum {rat(value)}")
    print(f"assignment {' '.join(map(str, res.partition.assignment))}")
    print(f"feasible partitions {res.feasible_count}")
    return EXIT_OK


def _read_matrix(path: str) -> list[list[int]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                try:
                    rows.append([int(a) for a in line.split()])
                except ValueError as exc:
                    raise FormatError(f"{path}: non-integer matrix entry") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: expected a non-empty rectangular integer matrix")
    return rows


def cmd_graver(args) -> int:
    A = _read_matrix(args.matrix)
    bounds = None if args.bounds is None else [int(a) for a in args.bounds.split(",")]
    basis = graver_basis(A, bounds=bounds, method=args.method, config=GraverConfig(max_size=args.max_basis))
    _write(args.output, basis.to_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wbpart", description="Exact weight-balanced partitioning and land consolidation.")
    sub = ap.add_subparsers(dest="command", required=True)

    def objective_flags(p, choices):
        p.add_argument("--objective", choices=choices, default="f3")
        p.add_argument("--weights", help="comma-separated farmer weights for --objective linear")
        p.add_argument("--inner", choices=INNER_NORMS, default="l1")
        p.add_argument("--outer", choices=OUTER_NORMS, default="l1")

    s = sub.add_parser("solve", help="optimize a land instance starting from its original distribution")
    s.add_argument("instance")
    s.add_argument("--model", choices=MODELS, default="p3")
    objective_flags(s, LAND_OBJECTIVES)
    s.add_argument("--trace", metavar="PATH", help="write the augmentation trace (index alpha improvement)")
    s.add_argument("--output", metavar="PATH", help="solution report (default stdout)")
    s.add_argument("--threads", type=int, default=1, help="worker processes for the convex path")
    s.add_argument("--max-basis", type=int, default=GraverConfig().max_size)
    s.add_argument("--max-steps", type=int, default=SolverConfig().max_steps)
    s.add_argument("--max-directions", type=int, default=ConvexConfig().max_directions)
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("generate", help="write a reproducible synthetic village")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lots", type=int, default=6)
    g.add_argument("--farmers", type=int, default=2)
    g.add_argument("--features", type=int, default=2)
    g.add_argument("--omega", type=int, default=3, help="maximal number of distinct lot types")
    g.add_argument("--deviation", default="3/100", help="relative tolerance, e.g. 3/100 or 0.03")
    g.add_argument("--side", type=int, default=1000, help="side length of the village square")
    g.add_argument("--output", metavar="PATH")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="recheck a solution report against its instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exhaustive optimum for tiny instances")
    o.add_argument("instance")
    objective_flags(o, ("f1", "f2", "f3", "linear", "clustering-body"))
    o.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest p^n to enumerate")
    o.set_defaults(func=cmd_oracle)

    gr = sub.add_parser("graver", help="Graver basis of an integer matrix (one vector per line)")
    gr.add_argument("matrix", help="text file, one matrix row per line")
    gr.add_argument("--bounds", help="comma-separated per-column truncation bounds")
    gr.add_argument("--method", choices=("lift", "pottier"), default="lift")
    gr.add_argument("--max-basis", type=int, default=GraverConfig().max_size)
    gr.add_argument("--output", metavar="PATH")
    gr.set_defaults(func=cmd_graver)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (InfeasiblePartition, NoFeasiblePartition) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (EnumerationTooLarge, GraverBasisTooLarge, ConvexPathTooLarge, AugmentationError) as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (FormatError, ReductionError, ModelError, OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AssertionError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Batch cross-check of the linear and convex solvers against exhaustive enumeration."""

import argparse
import random
import time

from wbpart.augmentation import linear_value, solve_linear
from wbpart.brute import brute_optimum
from wbpart.convex import solve_convex
from wbpart.objectives import INNER_NORMS, OUTER_NORMS, clustering_body, linear
from wbpart.reduction import MODELS, build, encode_assignment
from wbpart.synthetic import RandomInstanceConfig, random_instance


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--convex", action="store_true", help="clustering-body objectives instead of linear ones")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    failures = 0
    t0 = time.perf_counter()
    for k in range(args.count):
        model = MODELS[k % len(MODELS)]
        p = rng.randint(1, 3)
        d = rng.randint(1, 3 // p) if args.convex else 1
        cfg = RandomInstanceConfig(
            n=rng.randint(1, args.max_n),
            p=p,
            s=1 if model != "p3" else rng.randint(1, 2),
            m=rng.randint(1, 3),
            d=d,
        )
        inst, part = random_instance(rng, model, cfg)
        sys = build(inst, model)
        x0 = encode_assignment(sys, part, inst)
        if args.convex:
            spec = clustering_body(rng.choice(INNER_NORMS), rng.choice(OUTER_NORMS), d)
            got = spec.value(solve_convex(sys, x0, spec).projection)
        else:
            w = [rng.randint(-3, 3) for _ in range(sys.c)]
            spec = linear(w)
            got = linear_value(sys, solve_linear(sys, x0, w)[0], w)
        want = brute_optimum(inst, spec).value
        if got != want:
            failures += 1
            print(f"mismatch #{k}: model {model} n={inst.n} p={inst.p}: solver {got}, brute {want}")
    print(f"{args.count - failures}/{args.count} agree in {time.perf_counter() - t0:.1f}s")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()

"""Augmentation step counts against n * L on random instances (tab-separated)."""

import argparse
import random

from wbpart.augmentation import solve_linear
from wbpart.reduction import build, encode_assignment
from wbpart.synthetic import RandomInstanceConfig, random_instance


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--max-utility", type=int, default=9)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    print("model\tn\tp\ts\tm\tL\tsteps\tbasis\tsteps_per_nL")
    for k in range(args.count):
        model = ("p1", "p2", "p3")[k % 3]
        cfg = RandomInstanceConfig(
            n=rng.randint(1, args.max_n),
            p=rng.randint(1, 3),
            s=1 if model != "p3" else rng.randint(1, 2),
            m=rng.randint(1, 3),
            utility_range=(-args.max_utility, args.max_utility),
        )
        inst, part = random_instance(rng, model, cfg)
        sys = build(inst, model)
        w = [rng.randint(-3, 3) for _ in range(sys.c)]
        _, trace = solve_linear(sys, encode_assignment(sys, part, inst), w)
        L = inst.input_bits()
        steps = len(trace.steps)
        print(f"{model}\t{inst.n}\t{inst.p}\t{inst.s}\t{cfg.m}\t{L}\t{steps}\t{trace.basis_size}\t{steps / (inst.n * L):.5f}")


if __name__ == "__main__":
    main()

"""Synthetic villages: f1 and f3 consolidation against exhaustive optima, plus the f2 certificate."""

import argparse
import time
from fractions import Fraction

from wbpart.brute import brute_optimum
from wbpart.land import approximation_factor, evaluate_f2, f2_objective, generate_instance, run_algorithm1


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--lots", type=int, default=6)
    ap.add_argument("--farmers", type=int, default=2)
    ap.add_argument("--features", type=int, default=2)
    ap.add_argument("--omega", type=int, default=3)
    ap.add_argument("--deviation", default="3/100")
    args = ap.parse_args()
    deviation = Fraction(args.deviation)

    print("seed\tf1_start\tf1_opt\tf3_opt\tsteps_f3\tf2_of_f3\tf2_best\tratio\tfactor\tseconds")
    for seed in range(args.seeds):
        li = generate_instance(seed, args.lots, args.farmers, args.features, args.omega, deviation)
        t0 = time.perf_counter()
        s1 = run_algorithm1(li, "f1")
        s3 = run_algorithm1(li, "f3")
        elapsed = time.perf_counter() - t0
        best2 = evaluate_f2(li, brute_optimum(*f2_objective(li)).partition)
        ratio = s3.f2_value / best2 if best2 else Fraction(1)
        print(
            f"{seed}\t{float(-s1.trace.start_objective):.1f}\t{float(s1.value):.1f}\t{float(s3.value):.1f}"
            f"\t{len(s3.trace.steps)}\t{float(s3.f2_value):.1f}\t{float(best2):.1f}\t{float(ratio):.5f}"
            f"\t{float(approximation_factor(li)):.5f}\t{elapsed:.2f}"
        )


if __name__ == "__main__":
    main()

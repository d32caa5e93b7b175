"""Acceptance versus partition size for the Rosenbrock shape in several dimensions.

The nine-dimensional run up to 10^6 boxes is long (hours and several GB in
pure Python); request it with --long.
"""

import argparse
import csv

from moore_rs.diagnostics import acceptance_sweep
from moore_rs.targets import build_target, named_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="2,3")
    ap.add_argument("--sizes", default="100,300,1000,3000,10000")
    ap.add_argument("--long", action="store_true", help="add D=9 at sizes up to 10^6")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="rosenbrock.csv")
    args = ap.parse_args()

    runs = [(int(d), [int(s) for s in args.sizes.split(",")]) for d in args.dims.split(",")]
    if args.long:
        runs.append((9, [10 ** k for k in range(2, 7)]))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dimension", "partition_size", "guaranteed_lower_bound",
                    "empirical_acceptance", "n_trials", "n_accepted", "cpu_seconds"])
        for D, sizes in runs:
            spec = named_spec("rosenbrock", D=D)
            for pt in acceptance_sweep(build_target(spec), spec.domain, "integral", sizes,
                                       seed=args.seed + D):
                w.writerow([D, pt.partition_size, pt.guaranteed_lower_bound,
                            pt.empirical_acceptance, pt.n_trials, pt.n_accepted,
                            f"{pt.cpu_seconds:.3f}"])
                fh.flush()
                print(f"D={D} {pt.partition_size} boxes: {pt.empirical_acceptance:.4f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

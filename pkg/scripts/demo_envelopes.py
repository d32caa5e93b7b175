"""Uniform refinements of the one-dimensional demo shape on [-10, 6].

Writes one row per partition size W with the guaranteed acceptance lower
bound and the envelope sums, plus the boxes of a few small partitions so the
step-function envelopes can be plotted.
"""

import argparse
import csv

from moore_rs.envelope import Partition
from moore_rs.exprdag import parse
from moore_rs.interval import Box
from moore_rs.targets import DEMO_FORMULA


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-log2", type=int, default=12)
    ap.add_argument("--out", default="demo_bounds.csv")
    ap.add_argument("--boxes-out", default="demo_boxes.csv")
    ap.add_argument("--dump-sizes", default="4,16,64")
    args = ap.parse_args()

    dump = {int(s) for s in args.dump_sizes.split(",") if s}
    p = Partition(parse(DEMO_FORMULA, 1), Box.cube(-10, 6, 1), "volume")
    with open(args.out, "w", newline="") as fh, open(args.boxes_out, "w", newline="") as bh:
        w, bw = csv.writer(fh), csv.writer(bh)
        w.writerow(["W", "guaranteed_lower_bound", "upper_sum", "lower_sum"])
        bw.writerow(["W"] + p.header())
        for k in range(0, args.max_log2 + 1):
            p.refine_to(2 ** k)
            w.writerow([len(p), p.acceptance_bounds().lo, p.upper_sum, p.lower_sum])
            if len(p) in dump:
                for row in p.rows():
                    bw.writerow([len(p), *row])
    print(f"wrote {args.out} and {args.boxes_out}")


if __name__ == "__main__":
    main()

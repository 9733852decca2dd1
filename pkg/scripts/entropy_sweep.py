"""Entropy lower bounds of the block construction as k1 grows.

Toy levels give the block bound and the empirical factor entropy; the chain
bound only carries weight in faithful mode.
"""

import argparse
import json
import math
from fractions import Fraction

from toeplitz.blocks import (
    BlockConstruction,
    BlockSpec,
    entropy_lower_bound,
    factor_entropy,
    toy_spec,
)
from toeplitz.odometer import Scale


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k1", type=int, nargs="*", default=[4, 6, 8, 12, 16, 24])
    ap.add_argument("--levels", type=int, default=2)
    ap.add_argument("--faithful", action="store_true",
                    help="also build symbolic faithful levels on the powers of 2")
    args = ap.parse_args()
    for k1 in args.k1:
        con = BlockConstruction(toy_spec(k1, args.levels))
        eb = entropy_lower_bound(con)
        emp = [round(factor_entropy(con, n), 5) for n in range(1, args.levels)]
        print(json.dumps({"mode": "toy", "k1": k1, "chain_bound": round(eb.chain_bound, 5),
                          "per_level": [round(v, 5) for v in eb.per_level],
                          "factor_entropy": emp}))
    if args.faithful:
        for k1 in (19, 25, 40, 80):
            # level 3 of a large k1 outgrows 2^5000, so stop at two levels
            spec = BlockSpec(k1, Fraction(2), Scale.powers(2, 5000), 2, "faithful")
            eb = entropy_lower_bound(BlockConstruction(spec))
            print(json.dumps({"mode": "faithful", "k1": k1, "log_k1": round(math.log(k1), 5),
                              "chain_bound": round(eb.chain_bound, 5)}))


if __name__ == "__main__":
    main()

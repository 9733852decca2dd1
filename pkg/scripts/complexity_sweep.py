"""Complexity tables and exponent fits for a few (p,q) words.

    python scripts/complexity_sweep.py --nmax 400 --out results/complexity
"""

import argparse
import json
import pathlib

from toeplitz.holewords import ConstantWordSystem
from toeplitz.language import complexity_table, fit_exponent

WORDS = ["a?b?c", "a?b", "ab?c?d?e", "abc?d?e"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nmax", type=int, default=300)
    ap.add_argument("--fit-from", type=int, default=30)
    ap.add_argument("--words", nargs="*", default=WORDS)
    ap.add_argument("--out", default=None, help="directory for CSV tables")
    args = ap.parse_args()
    out = pathlib.Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for w in args.words:
        sys_ = ConstantWordSystem(w)
        table = complexity_table(sys_, args.nmax)
        slope, rms = fit_exponent(table, args.fit_from, args.nmax)
        row = {"word": w, "p": sys_.p, "q": sys_.q, "exponent": table.exponent,
               "fit": round(slope, 4), "rms": round(rms, 5),
               "c1": round(table.c1, 4), "c2": round(table.c2, 4)}
        print(json.dumps(row))
        if out:
            (out / f"{w.replace('?', '_')}.csv").write_text(table.to_csv())


if __name__ == "__main__":
    main()

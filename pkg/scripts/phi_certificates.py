"""Certificates for phi_n and the q^n-th roots of the shift.

    python scripts/phi_certificates.py --word "a?b?c" --levels 2
"""

import argparse
import json
import time

from toeplitz.holewords import ConstantWordSystem, HoleWord
from toeplitz.pq_toeplitz import certify_phi, extensional_check, power, root_of_shift, shift_map


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--word", default="a?b?c")
    ap.add_argument("--levels", type=int, default=2)
    args = ap.parse_args()
    w = HoleWord.parse(args.word)
    X = ConstantWordSystem(w)
    for n in range(1, args.levels + 1):
        t = time.perf_counter()
        cert = certify_phi(n, w).to_json()
        psi, a, b = root_of_shift(n, w)
        res = extensional_check(power(psi, w.q**n), shift_map(1), X)
        cert["root"] = {"a": a, "b": b, "radius": psi.radius, "equals_shift": res.equal}
        cert["seconds"] = round(time.perf_counter() - t, 2)
        print(json.dumps(cert))


if __name__ == "__main__":
    main()

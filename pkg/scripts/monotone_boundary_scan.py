"""Scan platoon_pair(a, b, c) over an (a, c) grid and tabulate CM/TM verdicts."""

import argparse

import numpy as np

from sichain import models
from sichain.monotone import cm_certify, tm_certify

SHORT = {"Certified": "C", "Refuted": "R", "RefutedAtTestedEps": "r", "Inconclusive": "?"}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--lo", type=float, default=0.25)
    ap.add_argument("--hi", type=float, default=2.0)
    ap.add_argument("--steps", type=int, default=8)
    args = ap.parse_args()
    grid = np.linspace(args.lo, args.hi, args.steps)
    print("rows a, columns c; each cell CM/TM (C certified, R refuted, r refuted at tested eps, ? inconclusive)")
    print("      " + " ".join(f"{c:6.3f}" for c in grid))
    for a in grid:
        cells = []
        for c in grid:
            phi = models.platoon_pair(a, args.b, c).phi
            cells.append(SHORT[cm_certify(phi).verdict.value] + "/" + SHORT[tm_certify(phi).verdict.value])
        print(f"{a:6.3f} " + " ".join(f"{x:>6s}" for x in cells))


if __name__ == "__main__":
    main()

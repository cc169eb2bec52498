"""Decay-rate fits for every gallery system: two-sided (symbol) and circulant sup curves."""

import argparse
import warnings

from sichain import models
from sichain.semigroup import ExpmOverflowWarning, decay_curves, fit_curve, laurent_decay, log_grid, sup_over_N
from sichain.spectra import hypothesis_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-max", type=float, default=1e4)
    ap.add_argument("--n-max", type=int, default=1024, help="circulant sizes 4, 8, ..., n-max; N^2 should exceed t-max")
    args = ap.parse_args()
    warnings.simplefilter("ignore", ExpmOverflowWarning)
    t = log_grid(1.0, args.t_max, 20)
    window = (args.t_max / 100, args.t_max)
    Ns = [2**k for k in range(2, args.n_max.bit_length()) if 2**k <= args.n_max]
    print(f"{'system':28s} {'predicted':22s} {'alpha(two-sided)':>17s} {'alpha(circ sup)':>16s}")
    for name, s in models.gallery().items():
        rep = hypothesis_check(s)
        two = fit_curve(laurent_decay(s, t), window=window)
        circ = fit_curve(sup_over_N(decay_curves(s, "circulant", Ns, 2, t)), window=window)
        print(f"{name:28s} {rep.predicted_rate:22s} {two.alpha:17.4f} {circ.alpha:16.4f}")


if __name__ == "__main__":
    main()

"""Certify the worked examples: product, mean, the symmetric example and G.

Prints the se-envelope value f0 (> 1 means not se-merging) and the worst
bi-atomic mean (> 1 means not ie-merging) for each function.
"""

import argparse
import time

from emerge.core import merge_mean, merge_product, merge_u_statistic
from emerge.reorder import counterexample_G, merge_symmetric_example
from emerge.verify import GridSpec, se_envelope, verify_ie_biatomic

FUNCTIONS = {
    "product": merge_product,
    "mean": merge_mean,
    "ustat:2": lambda e: merge_u_statistic(2, e),
    "symmetric2": lambda e: merge_symmetric_example(*e),
    "counterexampleG:2": lambda e: counterexample_G(2.0, *e),
}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--M", type=float, default=100)
    p.add_argument("--atoms", default="0,0.5,1,2,4,10")
    p.add_argument("--prob-steps", type=int, default=100)
    args = p.parse_args()
    atoms = [float(a) for a in args.atoms.split(",")]

    print(f"{'function':<20}{'se f0':>14}{'se?':>6}{'ie worst':>14}{'ie?':>6}{'secs':>7}")
    for name, F in FUNCTIONS.items():
        t0 = time.perf_counter()
        env = se_envelope(F, GridSpec(args.n, args.M, 2))
        worst, _ = verify_ie_biatomic(F, 2, sorted(set(atoms) | {2.0}), args.prob_steps)
        ie_ok = worst <= 1 + 1e-9
        print(f"{name:<20}{env.f0:14.10f}{'yes' if env.certified else 'no':>6}{worst:14.10f}"
              f"{'yes' if ie_ok else 'no':>6}{time.perf_counter() - t0:7.2f}")


if __name__ == "__main__":
    main()

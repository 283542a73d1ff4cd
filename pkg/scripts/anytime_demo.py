"""Optional stopping on test martingales versus a process that is not one.

The running product stays at mean 1 under any stopping rule.  The process
F_1 = max(2 - e_1, 0), F_2 = e_1 e_2 has mean 1 at each fixed time but can be
stopped at 1.5 on average by stopping after round 1 exactly when e_1 < 1.
"""

import argparse

import numpy as np

from emerge.verify.anytime import StoppingRule, check_anytime, fixed_time, running_mean_martingale, running_product
from emerge.verify.montecarlo import two_point


def show(title, rep):
    print(f"{title}: {'consistent' if rep.consistent else 'VIOLATION'}")
    for k, f in enumerate(rep.fixed, start=1):
        print(f"  E[F_{k}]        = {f.mean:.4f} +- {f.se:.4f}")
    for t in rep.stopped:
        print(f"  E[F_tau] {t.name:<10} = {t.estimate.mean:.4f} +- {t.estimate.se:.4f}"
              f"   (permutation identity error {t.permutation_max_error:.1e})")


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--runs", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    args = p.parse_args()
    K = args.k
    model = two_point(0.5, 1.5, K)
    taus = [StoppingRule(f"S>={t}", lambda pre, t=t: np.prod(pre, axis=1) >= t) for t in (1.5, 2.0)] + [fixed_time(1)]

    show("running product", check_anytime([running_product] * K, model, taus, args.runs, args.seed))
    show("running mean", check_anytime([running_mean_martingale(K)] * K, model, [fixed_time(2)], args.runs, args.seed))

    Fs = [lambda pre: np.maximum(2 - pre[:, 0], 0), running_product]
    tau = StoppingRule("e1<1", lambda pre: pre[:, 0] < 1 if pre.shape[1] == 1 else np.ones(len(pre), bool))
    show("not a martingale", check_anytime(Fs, two_point(0.5, 1.5, 2), [tau], args.runs, args.seed))


if __name__ == "__main__":
    main()

"""Gaussian likelihood-ratio experiment: one run and the mean of many, in log scale.

    python3 scripts/figure1.py --out results/figure1 --runs 1000 --seed 42
"""

import argparse
from pathlib import Path

from emerge.output import trajectory_csv, trajectory_svg
from emerge.sim import SimConfig, aggregate, aggregate_se, run_experiment

SLOPES = {"fixed_true": 0.045, "fixed_misspecified": 0.025, "random_uniform": 0.075 - 1 / 24}


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--out", default="results/figure1")
    p.add_argument("--k", type=int, default=500)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--theta-true", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threads", type=int, default=None)
    args = p.parse_args()

    cfg = SimConfig(K=args.k, runs=args.runs, theta_true=args.theta_true, seed=args.seed)
    ts = run_experiment(cfg, threads=args.threads)
    mean, se = aggregate(ts), aggregate_se(ts)
    one = {s: ts.logs[s][0] for s in cfg.strategies}

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "one_run.csv").write_text(trajectory_csv(one))
    (out / "mean.csv").write_text(trajectory_csv(mean))
    (out / "figure.svg").write_text(trajectory_svg([("one run", one), (f"average of {cfg.runs} runs", mean)]))

    print(f"{'strategy':<20}{'mean log S_K':>14}{'se':>8}{'predicted':>11}")
    for s in sorted(cfg.strategies, key=lambda s: -mean[s][-1]):
        pred = SLOPES.get(s)
        # only valid for the fixed-theta strategies at theta_true = 0.3
        pred_txt = f"{pred * cfg.K:11.3f}" if pred is not None and cfg.theta_true == 0.3 else f"{'-':>11}"
        print(f"{s:<20}{mean[s][-1]:14.3f}{se[s][-1]:8.3f}{pred_txt}")
    print(f"wrote {out}/one_run.csv, mean.csv, figure.svg")


if __name__ == "__main__":
    main()

"""Acceptance criteria, each at its stated tolerance.

The terminal summary (see conftest.py) prints one PASS/FAIL line per criterion.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np

from emerge.core import (
    evaluate_martingale,
    exceed_and_stop,
    merge_block_product,
    merge_mean,
    merge_product,
    merge_u_statistic,
    product_system,
)
from emerge.reorder import (
    TwoDecomposition,
    counterexample_G,
    merge_generalized,
    merge_symmetric_example,
    merge_two_decomposed,
    symmetric_example_mixture,
)
from emerge.sim import SimConfig, aggregate, aggregate_se, run_experiment
from emerge.verify.anytime import StoppingRule, check_anytime, running_product
from emerge.verify.biatomic import verify_ie_biatomic
from emerge.verify.envelope import GridSpec, concave_majorant, se_envelope
from emerge.verify.montecarlo import mc_e_property, two_point
from oracles import lp_sup


def test_criterion_01_martingale_mc_suite():
    start = time.perf_counter()
    model = two_point(0.25, 2.5, 4)
    catalog = {
        "product": merge_product,
        "mean": merge_mean,
        "U2": lambda E: merge_u_statistic(2, E),
        "block": lambda E: merge_block_product((2,), E),
    }
    for seed, (name, F) in enumerate(catalog.items()):
        est = mc_e_property(F, model, 100_000, seed=seed)
        assert abs(est.mean - 1.0) <= 4 * est.se, (name, est)
    assert time.perf_counter() - start < 10


def test_criterion_02_envelope_soundness():
    grid = GridSpec(1, 4, 2)
    res = se_envelope(merge_product, grid)
    assert abs(res.f0 - 1.0) <= 1e-9
    assert set(res.bets.values()) == {1.0}
    S = res.dominating_system()
    vals = grid.values().tolist()
    for e1 in vals:
        for e2 in vals:
            assert res.f0 * evaluate_martingale(S, 1.0, (e1, e2)).final >= merge_product((e1, e2))


def test_criterion_03_non_se_certificate():
    start = time.perf_counter()
    grid = GridSpec(2, 100, 2)
    res = se_envelope(lambda e: merge_symmetric_example(*e), grid)
    elapsed = time.perf_counter() - start
    vals = grid.values()
    stated = np.maximum(vals, (vals + 1) / 2)
    worst = float(np.max(np.abs(res.levels[1] - stated)))
    assert elapsed < 60
    assert res.f0 > 1
    assert abs(res.f0 - 1.495) <= 1e-6, f"f0 = {res.f0!r}"
    assert worst <= 1e-9, f"one-step envelope differs from max(e, (e+1)/2) by up to {worst!r}"


def test_criterion_04_counterexample_G():
    c = 2.0
    worst, witness = verify_ie_biatomic(lambda e: counterexample_G(c, *e), 2, [0, 2], 100)
    assert abs(worst - 1.0) <= 1e-9
    assert all(w.triple() == (0.0, 2.0, 0.5) for w in witness)
    rng = np.random.default_rng(4)
    for _ in range(100):
        beta, u, v = rng.random(3)
        knots = np.sort(rng.uniform(0, 5, size=3))
        levels = rng.random(3)
        d = TwoDecomposition(beta, 0.0, 0.0, lambda x: float(np.interp(x, knots, levels)), lambda x, u=u, v=v: u if x < 1 else v)
        value = merge_two_decomposed(d, c, c)
        assert value <= c < 2 * c - 1 == counterexample_G(c, c, c)


def test_criterion_05_symmetric_identities():
    mix = symmetric_example_mixture()
    for e1 in np.linspace(0, 10, 50):
        for e2 in np.linspace(0, 10, 50):
            assert abs(merge_generalized(mix, (e1, e2)) - merge_symmetric_example(e1, e2)) <= 1e-12
    assert merge_symmetric_example(1, 1) == 1
    assert abs(merge_symmetric_example(2, 2) - 10 / 3) <= 1e-12


def test_criterion_06_anytime_checker():
    K = 5
    taus = [StoppingRule(f"threshold:{t}", lambda pre, t=t: np.prod(pre, axis=1) >= t) for t in (1.2, 2, 4)]
    rep = check_anytime([running_product] * K, two_point(0.5, 1.5, K), taus, 100_000, seed=1)
    for t in rep.stopped:
        assert abs(t.estimate.mean - 1) <= 4 * t.estimate.se, t
    assert rep.consistent

    Fs = [lambda pre: np.maximum(2 - pre[:, 0], 0), running_product]
    tau = StoppingRule("e1<1", lambda pre: pre[:, 0] < 1 if pre.shape[1] == 1 else np.ones(len(pre), bool))
    bad = check_anytime(Fs, two_point(0.5, 1.5, 2), [tau], 100_000, seed=2)
    est = bad.stopped[0].estimate
    assert abs(est.mean - 1.5) <= 4 * est.se
    assert not bad.anytime_valid and not bad.consistent


def test_criterion_07_simulation_slopes():
    start = time.perf_counter()
    ts = run_experiment(SimConfig(theta_true=0.3, K=500, runs=1000, seed=42))
    mean = {s: v[-1] for s, v in aggregate(ts).items()}
    se = {s: v[-1] for s, v in aggregate_se(ts).items()}
    assert abs(mean["fixed_true"] - 22.5) <= 1.0
    assert abs(mean["fixed_misspecified"] - 12.5) <= 1.0

    def above(a, b):
        return mean[a] - mean[b] > 3 * math.hypot(se[a], se[b])

    for adaptive in ("bayes", "mle"):
        assert above("fixed_true", adaptive)
        assert above(adaptive, "random_uniform")
    assert above("random_uniform", "fixed_misspecified")
    assert time.perf_counter() - start < 60


def test_criterion_08_null_safety():
    ts = run_experiment(SimConfig(theta_true=0.0, K=500, runs=1000, seed=42))
    for s in ts.logs:
        P = ts.raw(s)
        for k in (1, 100, 500):
            x = P[:, k]
            assert x.mean() <= 1 + 4 * x.std(ddof=1) / math.sqrt(len(x)), (s, k)


def test_criterion_09_oracle_equivalence():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        m = int(rng.integers(1, 15))
        cs = np.unique(np.concatenate([[0.0], rng.uniform(0, 8, size=m)]))
        fs = rng.uniform(0, 4, size=len(cs))
        value, _ = concave_majorant(list(zip(cs, fs)))
        assert abs(value - lp_sup(cs, fs)) <= 1e-9

    grid = [0, 0.25, 0.5, 1, 1.5, 2, 4]
    stop = exceed_and_stop(product_system(), 0.5)
    for K in (1, 2, 3):
        catalog = [merge_product, merge_mean, lambda e: merge_u_statistic(min(2, K), e),
                   lambda e: merge_block_product((1,) if K > 1 else (), e),
                   lambda e: evaluate_martingale(stop, 1.0, e).final]
        for F in catalog:
            worst, _ = verify_ie_biatomic(F, K, grid, 8 if K < 3 else 4)
            assert worst <= 1 + 1e-9


COMMANDS = [
    ["merge", "ustat:2", "1", "2", "3", "--trajectory"],
    ["certify", "se", "--function", "symmetric2", "--grid", "n=1,M=20", "--full"],
    ["certify", "ie", "--function", "counterexampleG:c=2", "--atoms", "0,1,2", "--prob-steps", "20"],
    ["certify", "anytime", "--function", "product", "--k", "3", "--runs", "30000", "--seed", "5"],
]


def _cli(argv, threads, out_dir=None):
    env = {**os.environ, "EMERGE_THREADS": str(threads)}
    proc = subprocess.run([sys.executable, "-m", "emerge.cli", *argv], capture_output=True, check=False, env=env)
    files = {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())} if out_dir else {}
    return proc.returncode, proc.stdout, files


def test_criterion_10_determinism(tmp_path):
    for argv in COMMANDS:
        runs = [_cli(argv, threads) for threads in (1, 1, 4)]
        assert runs[0] == runs[1] == runs[2], argv
    sims = []
    for i, threads in enumerate((1, 1, 4)):
        d = tmp_path / f"sim{i}"
        d.mkdir()
        argv = ["simulate", "--k", "60", "--runs", "200", "--seed", "3", "--out", str(d)]
        sims.append(_cli(argv, threads, d))
    assert sims[0] == sims[1] == sims[2]
    assert set(sims[0][2]) == {"one_run.csv", "mean.csv", "figure.svg"}

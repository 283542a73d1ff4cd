"""Command-line interface: ``emerge merge | certify | simulate``.

Exit codes for ``certify``: 0 certified on the grid / consistent, 1 violation
found, 2 inconclusive (budget).  Malformed input exits with 3.
The default thread count comes from ``EMERGE_THREADS``; outputs never depend on it.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from emerge import config, functions
from emerge.core import EVector
from emerge.output import fmt17, trajectory_csv, trajectory_svg
from emerge.report import Report
from emerge.sim import STRATEGIES, SimConfig, aggregate, run_experiment
from emerge.verify.anytime import StoppingRule, check_anytime, fixed_time
from emerge.verify.biatomic import verify_ie_biatomic
from emerge.verify.envelope import CERTIFY_TOL, DEFAULT_BUDGET, BudgetExceeded, GridSpec, se_envelope
from emerge.verify.montecarlo import sequential_two_point, two_point, uniform

EXIT_OK, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_INPUT = 0, 1, 2, 3


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _key_values(text: str, what: str, keys: dict[str, type]) -> dict:
    out, pos = {}, 0
    for item in text.split(","):
        key, sep, value = item.partition("=")
        if not sep or key not in keys:
            raise InputError(f"{what} {text!r}, position {pos}: expected one of {sorted(keys)} as key=value")
        try:
            out[key] = keys[key](value)
        except ValueError:
            raise InputError(f"{what} {text!r}, position {pos + len(key) + 1}: bad value {value!r}") from None
        pos += len(item) + 1
    missing = set(keys) - set(out)
    if missing:
        raise InputError(f"{what} {text!r}: missing {sorted(missing)}")
    return out


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"{what} {text!r}: expected comma-separated numbers") from None


def _fmt16(x: float) -> str:
    return format(float(x), ".16g")


# -- merge ------------------------------------------------------------------


def cmd_merge(args) -> int:
    fn = functions.parse(args.function)
    e = EVector(tuple(args.evalues))
    fn.check_arity(len(e))
    print(_fmt16(fn.scalar(e.values)))
    if args.trajectory:
        if fn.trajectory is None:
            raise InputError(f"{fn.id} is not built from a betting strategy; no trajectory")
        for k, s in enumerate(fn.trajectory(e).capitals):
            print(f"{k}\t{_fmt16(s)}")
    return EXIT_OK


# -- certify ----------------------------------------------------------------


def _arity(fn, k):
    K = k if k is not None else (fn.arity or 2)
    fn.check_arity(K)
    return K


def _certify_se(fn, args, report):
    K = _arity(fn, args.k)
    g = _key_values(args.grid, "grid", {"n": int, "M": float})
    grid = GridSpec(g["n"], g["M"], K)
    report.fields.update({"K": K, "grid.n": grid.n, "grid.M": grid.M, "grid.cells": grid.cells, "budget": args.budget})
    try:
        res = se_envelope(fn.batch, grid, budget=args.budget, batched=True, threads=args.threads)
    except BudgetExceeded as exc:
        report.fields.update({"verdict": "inconclusive", "reason": str(exc)})
        return EXIT_INCONCLUSIVE
    report.fields["f0"] = res.f0
    report.fields["root-bet"] = float(res.bet_levels[0])
    if res.certified:
        report.fields["domination-gap"] = res.domination_gap()
        report.fields["verdict"] = "certified-on-grid"
        code = EXIT_OK
    else:
        report.fields["verdict"] = "not-se-merging"
        code = EXIT_VIOLATION
    if args.full:
        report.sections["bets"] = [(prefix, s) for prefix, s in res.bets.items()]
    return code


def _certify_ie(fn, args, report):
    K = _arity(fn, args.k)
    atoms = _floats(args.atoms, "atoms")
    report.fields.update({"K": K, "atoms": tuple(atoms), "prob-steps": args.prob_steps})
    try:
        worst, witness = verify_ie_biatomic(fn.batch, K, atoms, args.prob_steps, batched=True, threads=args.threads)
    except BudgetExceeded as exc:
        report.fields.update({"verdict": "inconclusive", "reason": str(exc)})
        return EXIT_INCONCLUSIVE
    ok = worst <= 1.0 + CERTIFY_TOL
    report.fields.update({"worst-mean": worst, "verdict": "certified-on-grid" if ok else "not-ie-merging"})
    report.sections["witness"] = [w.triple() for w in witness]
    return EXIT_OK if ok else EXIT_VIOLATION


def _model(text: str, K: int):
    name, _, arg = text.partition(":")
    if name == "two-point":
        vals = _floats(arg, "model")
        if len(vals) != 2:
            raise InputError("two-point model needs x,y")
        return two_point(vals[0], vals[1], K)
    if name == "uniform":
        return uniform(K, float(arg) if arg else 2.0)
    if name == "sequential":
        return sequential_two_point(K)
    raise InputError(f"unknown model {text!r}; use two-point:x,y, uniform:hi or sequential")


def _padded(fn, K):
    def at(k):
        def F(pre):
            padded = np.ones((len(pre), K))
            padded[:, :k] = pre
            return fn.batch(padded)

        return F

    return [at(k) for k in range(1, K + 1)]


def _stopping_rule(text: str, Fs) -> StoppingRule:
    name, _, arg = text.partition(":")
    try:
        value = float(arg)
    except ValueError:
        raise InputError(f"stopping rule {text!r}: expected kind:number") from None
    if name == "threshold":
        return StoppingRule(text, lambda pre: Fs[pre.shape[1] - 1](pre) >= value)
    if name == "below":
        return StoppingRule(text, lambda pre: pre[:, -1] < value)
    if name == "fixed":
        return fixed_time(int(value))
    raise InputError(f"unknown stopping rule {text!r}; use threshold:T, below:x or fixed:k")


def _certify_anytime(fn, args, report):
    if not fn.martingale:
        raise InputError(f"{fn.id} is not a test martingale; anytime checks need product, mean, ustat or block")
    K = _arity(fn, args.k)
    Fs = _padded(fn, K)
    model = _model(args.model, K)
    taus = [_stopping_rule(t, Fs) for t in (args.stop or ["threshold:2", "fixed:1"])]
    rep = check_anytime(Fs, model, taus, args.runs, args.seed, n_se=args.n_se, threads=args.threads)
    report.fields.update({"K": K, "model": model.name, "runs": args.runs, "seed": args.seed, "n-se": args.n_se,
                          "anytime-valid": rep.anytime_valid, "precise": rep.precise,
                          "verdict": "consistent" if rep.consistent else "violation"})
    report.sections["fixed"] = [(k + 1, f.mean, f.se) for k, f in enumerate(rep.fixed)]
    report.sections["stopped"] = [(t.name, t.estimate.mean, t.estimate.se, t.permutation_sum.mean,
                                   t.permutation_sum.se, t.permutation_max_error) for t in rep.stopped]
    if rep.deviations:
        report.sections["deviations"] = [(d,) for d in rep.deviations]
    return EXIT_OK if rep.consistent else EXIT_VIOLATION


def cmd_certify(args) -> int:
    fn = functions.parse(args.function)
    report = Report({"mode": args.mode, "function": fn.id})
    code = {"se": _certify_se, "ie": _certify_ie, "anytime": _certify_anytime}[args.mode](fn, args, report)
    report.fields["exit-code"] = code
    text = report.emit()
    if args.report:
        Path(args.report).write_text(text)
        print(f"{report.fields['verdict']} (exit {code}); report written to {args.report}")
    else:
        sys.stdout.write(text)
    return code


# -- simulate ---------------------------------------------------------------

_SIM_FLAGS = {"k": "K", "runs": "runs", "theta_true": "theta_true", "theta0": "theta0",
              "prior_sd": "prior_sd", "uniform_hi": "uniform_hi", "seed": "seed"}


def sim_config(args) -> SimConfig:
    doc = config.load(args.config, "simulation") if args.config else {"version": config.VERSION, "kind": "simulation"}
    base = asdict(config.simulation(doc))
    for flag, name in _SIM_FLAGS.items():
        if getattr(args, flag) is not None:
            base[name] = getattr(args, flag)
    if args.strategies:
        base["strategies"] = tuple(args.strategies.split(","))
    if args.clamp_mle:
        base["clamp_mle"] = True
    return SimConfig(**base)


def cmd_simulate(args) -> int:
    cfg = sim_config(args)
    ts = run_experiment(cfg, threads=args.threads)
    one = {s: ts.logs[s][0] for s in cfg.strategies}
    mean = aggregate(ts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "one_run.csv").write_text(trajectory_csv(one))
    (out / "mean.csv").write_text(trajectory_csv(mean))
    if not args.no_svg:
        svg = trajectory_svg([("one run (log scale)", one), (f"average of {cfg.runs} runs (mean log)", mean)])
        (out / "figure.svg").write_text(svg)
    for s in cfg.strategies:
        print(f"{s}\t{fmt17(mean[s][-1])}")
    return EXIT_OK


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="emerge", description="Merge, certify and simulate e-values.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("merge", help="evaluate a merging function")
    m.add_argument("function", help="product | mean | ustat:N | block:K1,.. | symmetric2 | decomposed:FILE | "
                                    "generalized:FILE | counterexampleG:C")
    m.add_argument("evalues", nargs="+", type=float)
    m.add_argument("--trajectory", action="store_true", help="also print S_0..S_K")
    m.set_defaults(run=cmd_merge)

    c = sub.add_parser("certify", help="certify a merging function on a grid or by Monte Carlo")
    c.add_argument("mode", choices=["ie", "se", "anytime"])
    c.add_argument("--function", required=True)
    c.add_argument("--k", type=int, default=None, help="number of e-values (default: the function's arity, else 2)")
    c.add_argument("--grid", default="n=2,M=100", help="se: n=RESOLUTION,M=CAP")
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="se: max grid cells")
    c.add_argument("--atoms", default="0,0.5,1,2,4,10", help="ie: comma-separated atom grid (must contain 0)")
    c.add_argument("--prob-steps", type=int, default=100)
    c.add_argument("--model", default="two-point:0.5,1.5", help="anytime: two-point:x,y | uniform:hi | sequential")
    c.add_argument("--stop", action="append", help="anytime: threshold:T | below:x | fixed:k (repeatable)")
    c.add_argument("--runs", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--n-se", type=float, default=4.0)
    c.add_argument("--report", help="write the report here instead of stdout")
    c.add_argument("--full", action="store_true", help="se: include the bet table")
    c.add_argument("--threads", type=int, default=None)
    c.set_defaults(run=cmd_certify)

    s = sub.add_parser("simulate", help="Gaussian likelihood-ratio e-process experiment")
    s.add_argument("--config", help="JSON simulation config (flags override it)")
    s.add_argument("--k", type=int)
    s.add_argument("--runs", type=int)
    s.add_argument("--theta-true", type=float)
    s.add_argument("--theta0", type=float)
    s.add_argument("--prior-sd", type=float)
    s.add_argument("--uniform-hi", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--strategies", help=f"comma-separated subset of {','.join(STRATEGIES)}")
    s.add_argument("--clamp-mle", action="store_true")
    s.add_argument("--out", default=".", help="output directory")
    s.add_argument("--no-svg", action="store_true")
    s.add_argument("--threads", type=int, default=None)
    s.set_defaults(run=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (InputError, functions.FunctionSpecError, config.ConfigError, ValueError) as exc:
        print(f"emerge: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Gaussian likelihood-ratio e-processes under five ways of choosing the alternative.

Observations are ``X_k ~ N(theta_true, 1)`` and the null is ``N(0, 1)``.  The
e-value of round k is ``exp(theta_k X_k - theta_k^2 / 2)``; the strategies
differ only in how ``theta_k`` is picked:

    fixed_true          theta_true
    fixed_misspecified  theta0
    random_uniform      fresh U[0, uniform_hi] draw each round
    bayes               conjugate-normal posterior mean given X_1..X_{k-1}
    mle                 sample mean of X_1..X_{k-1} (theta0 in round 1)

The first three give independent e-values, the last two sequential ones.

RNG scheme: run ``r`` draws its observations from
``SeedSequence(seed, spawn_key=(r, 0))`` and a strategy that needs its own
randomness uses ``spawn_key=(r, STREAM_KEYS[strategy])``.  Keys are fixed per
strategy, so adding or removing strategies never changes anyone else's draws,
and all strategies in a run see the same observations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from emerge._parallel import chunks, ordered_map

STRATEGIES = ("fixed_true", "fixed_misspecified", "random_uniform", "bayes", "mle")
STREAM_KEYS = {"data": 0, "fixed_true": 1, "fixed_misspecified": 2, "random_uniform": 3, "bayes": 4, "mle": 5}
RUN_CHUNK = 64


@dataclass(frozen=True)
class SimConfig:
    K: int = 500
    runs: int = 1000
    theta_true: float = 0.3
    theta0: float = 0.1
    prior_sd: float = 0.2
    uniform_hi: float = 0.5
    seed: int = 0
    strategies: tuple[str, ...] = STRATEGIES
    clamp_mle: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.K < 1 or self.runs < 1:
            raise ValueError("K and runs must be >= 1")
        if not self.prior_sd > 0:
            raise ValueError("prior_sd must be > 0")
        if not self.uniform_hi >= 0:
            raise ValueError("uniform_hi must be >= 0")
        unknown = [s for s in self.strategies if s not in STRATEGIES]
        if unknown or not self.strategies or len(set(self.strategies)) != len(self.strategies):
            raise ValueError(f"strategies must be distinct names from {STRATEGIES}, got {self.strategies}")


def likelihood_ratio(x, theta):
    """``dN(theta, 1) / dN(0, 1)`` at ``x``."""
    out = np.exp(theta * np.asarray(x, dtype=float) - 0.5 * theta * theta)
    return float(out) if out.ndim == 0 else out


def select_theta(strategy: str, history: Sequence[float], config: SimConfig, rng: np.random.Generator | None = None) -> float:
    """``theta_k`` for round ``k = len(history) + 1``."""
    k1 = len(history)
    if strategy == "fixed_true":
        return config.theta_true
    if strategy == "fixed_misspecified":
        return config.theta0
    if strategy == "random_uniform":
        if rng is None:
            raise ValueError("random_uniform needs an rng")
        return float(rng.uniform(0.0, config.uniform_hi))
    if strategy == "bayes":
        if k1 == 0:
            return config.theta0
        prec0 = 1.0 / config.prior_sd**2
        return (config.theta0 * prec0 + float(np.sum(history))) / (prec0 + k1)
    if strategy == "mle":
        if k1 == 0:
            return config.theta0
        theta = float(np.sum(history)) / k1
        return max(theta, 0.0) if config.clamp_mle else theta
    raise ValueError(f"unknown strategy {strategy!r}")


def stream(seed: int, run: int, key: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run, STREAM_KEYS[key])))


def _thetas(strategy: str, X: np.ndarray, config: SimConfig, first_run: int) -> np.ndarray:
    n, K = X.shape
    if strategy == "fixed_true":
        return np.full((n, K), config.theta_true)
    if strategy == "fixed_misspecified":
        return np.full((n, K), config.theta0)
    if strategy == "random_uniform":
        return np.stack([stream(config.seed, first_run + i, strategy).uniform(0.0, config.uniform_hi, size=K) for i in range(n)])
    prev_sum = np.zeros((n, K))
    prev_sum[:, 1:] = np.cumsum(X, axis=1)[:, :-1]
    seen = np.arange(K, dtype=float)
    if strategy == "bayes":
        prec0 = 1.0 / config.prior_sd**2
        theta = (config.theta0 * prec0 + prev_sum) / (prec0 + seen)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            theta = prev_sum / seen
        if config.clamp_mle:
            theta = np.maximum(theta, 0.0)
    theta[:, 0] = config.theta0
    return theta


@dataclass
class TrajectorySet:
    """Per strategy, a ``runs x (K + 1)`` matrix of cumulative log e-values (column 0 is 0)."""

    config: SimConfig
    logs: dict[str, np.ndarray]
    thetas: dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    def raw(self, strategy: str) -> np.ndarray:
        return np.exp(self.logs[strategy])


def _run_chunk(config: SimConfig, lo: int, hi: int):
    X = np.stack([stream(config.seed, r, "data").normal(config.theta_true, 1.0, size=config.K) for r in range(lo, hi)])
    logs, thetas = {}, {}
    for name in config.strategies:
        theta = _thetas(name, X, config, lo)
        inc = theta * X - 0.5 * theta * theta
        path = np.zeros((hi - lo, config.K + 1))
        path[:, 1:] = np.cumsum(inc, axis=1)
        logs[name], thetas[name] = path, theta
    return logs, thetas


def run_experiment(config: SimConfig, threads: int | None = None) -> TrajectorySet:
    parts = ordered_map(lambda lh: _run_chunk(config, *lh), chunks(config.runs, RUN_CHUNK), threads)
    logs = {s: np.concatenate([p[0][s] for p in parts]) for s in config.strategies}
    thetas = {s: np.concatenate([p[1][s] for p in parts]) for s in config.strategies}
    return TrajectorySet(config, logs, thetas)


def aggregate(ts: TrajectorySet) -> dict[str, np.ndarray]:
    """Mean over runs of the log trajectories (not the log of the mean)."""
    return {s: ts.logs[s].mean(axis=0) for s in ts.logs}


def aggregate_se(ts: TrajectorySet) -> dict[str, np.ndarray]:
    n = ts.config.runs
    if n < 2:
        return {s: np.full(ts.config.K + 1, np.inf) for s in ts.logs}
    return {s: ts.logs[s].std(axis=0, ddof=1) / np.sqrt(n) for s in ts.logs}

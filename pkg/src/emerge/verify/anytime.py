"""Monte-Carlo check that a sequence of prefix functions behaves like a test martingale.

A process ``F_1, ..., F_K`` built from sequential e-values is anytime valid and
precise exactly when it is a test martingale.  The checker estimates
``E[F_tau]`` for the supplied stopping rules and ``E[F_k]`` for every fixed
``k``, and flags any estimate that is more than ``n_se`` standard errors from 1.

It also replays the permutation argument: with ``tau_j = j`` if ``tau > j``
and ``j + 1`` otherwise, ``(tau, tau_1, ..., tau_{K-1})`` is a permutation of
``1..K`` on every path, so ``F_tau + sum_j F_{tau_j} = sum_k F_k`` pathwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from emerge.verify.montecarlo import MCEstimate, Model, estimate, sample

PrefixFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class StoppingRule:
    """``stop(prefixes)`` gets an ``(n, k)`` array and returns a boolean per row.

    ``tau`` is the first ``k`` in ``1..K`` at which ``stop`` is true, else ``K``.
    """

    name: str
    stop: Callable[[np.ndarray], np.ndarray]


def fixed_time(k: int) -> StoppingRule:
    return StoppingRule(f"fixed:{k}", lambda pre: np.full(len(pre), pre.shape[1] >= k))


@dataclass(frozen=True)
class TauEstimate:
    name: str
    estimate: MCEstimate
    permutation_sum: MCEstimate
    permutation_max_error: float


@dataclass(frozen=True)
class AnytimeReport:
    K: int
    runs: int
    seed: int
    n_se: float
    fixed: tuple[MCEstimate, ...]
    stopped: tuple[TauEstimate, ...]
    deviations: tuple[str, ...] = field(default=())

    @property
    def anytime_valid(self) -> bool:
        return all(t.estimate.at_most(1.0, self.n_se) for t in self.stopped) and all(
            f.at_most(1.0, self.n_se) for f in self.fixed
        )

    @property
    def precise(self) -> bool:
        return all(f.within(1.0, self.n_se) for f in self.fixed)

    @property
    def consistent(self) -> bool:
        """Every estimate within ``n_se`` standard errors of 1."""
        return not self.deviations


def stopping_index(rule: StoppingRule, E: np.ndarray) -> np.ndarray:
    n, K = E.shape
    tau = np.full(n, K)
    open_ = np.ones(n, dtype=bool)
    for k in range(1, K + 1):
        hit = open_ & np.asarray(rule.stop(E[:, :k]), dtype=bool)
        tau[hit] = k
        open_ &= ~hit
    return tau


def check_anytime(
    Fs: Sequence[PrefixFunction],
    model: Model,
    taus: Sequence[StoppingRule],
    runs: int,
    seed: int,
    *,
    n_se: float = 4.0,
    threads: int | None = None,
) -> AnytimeReport:
    K = len(Fs)
    if model.K != K:
        raise ValueError(f"model generates K={model.K} e-values but {K} prefix functions were given")
    E = sample(model, runs, seed, threads)
    path = np.column_stack([np.asarray(Fs[k](E[:, : k + 1]), dtype=float) for k in range(K)])
    rows = np.arange(runs)
    total = path.sum(axis=1)

    fixed = tuple(estimate(path[:, k]) for k in range(K))
    deviations = [f"F_{k + 1}: {est.mean!r} +- {est.se!r}" for k, est in enumerate(fixed) if not est.within(1.0, n_se)]

    stopped = []
    for rule in taus:
        tau = stopping_index(rule, E)
        perm = path[rows, tau - 1].copy()
        for j in range(1, K):
            perm += path[rows, np.where(tau > j, j, j + 1) - 1]
        est = estimate(path[rows, tau - 1])
        stopped.append(TauEstimate(rule.name, est, estimate(perm), float(np.max(np.abs(perm - total)))))
        if not est.within(1.0, n_se):
            deviations.append(f"tau={rule.name}: {est.mean!r} +- {est.se!r}")
    return AnytimeReport(K, runs, seed, n_se, fixed, tuple(stopped), tuple(deviations))


def running_product(pre: np.ndarray) -> np.ndarray:
    return np.prod(pre, axis=1)


def running_mean_martingale(K: int) -> PrefixFunction:
    """``(e_1 + ... + e_k + K - k) / K`` evaluated on an ``(n, k)`` prefix array."""
    return lambda pre: (pre.sum(axis=1) + K - pre.shape[1]) / K


def from_trajectories(traj: Callable[[np.ndarray], np.ndarray], K: int) -> list[PrefixFunction]:
    """Prefix functions of a test martingale given its batched trajectory map.

    ``traj`` maps ``(n, K)`` inputs to ``(n, K + 1)`` capitals.  ``S_k`` only
    depends on the first ``k`` inputs, so the prefix is padded with ones.
    """

    def at(k):
        def F(pre):
            padded = np.ones((len(pre), K))
            padded[:, :k] = pre
            return np.asarray(traj(padded))[:, k]

        return F

    return [at(k) for k in range(1, K + 1)]

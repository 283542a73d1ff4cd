"""Seeded Monte-Carlo generators of e-values and the empirical e-property check.

Runs are split into fixed-size chunks, each with its own ``SeedSequence``
child of the master seed.  Threads only decide which chunk runs where, so
results are bit-identical for any thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from emerge._parallel import chunks, ordered_map

CHUNK = 8192


@dataclass(frozen=True)
class Model:
    """A generator of ``(n, K)`` e-value arrays with ``E[E_k | past] = 1``.

    ``independent`` marks models whose coordinates are independent.
    """

    name: str
    K: int
    draw: Callable[[np.random.Generator, int], np.ndarray]
    independent: bool = True

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.asarray(self.draw(rng, n), dtype=float)
        assert out.shape == (n, self.K), out.shape
        return out


def two_point(x: float, y: float, K: int) -> Model:
    """iid two-point e-values on ``{x, y}`` with mean exactly 1."""
    if not 0.0 <= x < 1.0 < y:
        raise ValueError(f"need 0 <= x < 1 < y, got {x!r}, {y!r}")
    p = (1.0 - x) / (y - x)

    def draw(rng, n):
        return np.where(rng.random((n, K)) < p, y, x)

    return Model(f"two-point({x!r},{y!r})", K, draw)


def uniform(K: int, hi: float = 2.0) -> Model:
    """iid ``U[0, hi]``; mean 1 when ``hi = 2``."""

    def draw(rng, n):
        return rng.uniform(0.0, hi, size=(n, K))

    return Model(f"uniform({hi!r})", K, draw)


def sequential_two_point(K: int, calm: float = 0.2, wild: float = 0.9) -> Model:
    """Dependent mean-1 e-values: after a gain the next one is ``1 +- wild``, else ``1 +- calm``."""

    def draw(rng, n):
        out = np.empty((n, K))
        spread = np.full(n, calm)
        for k in range(K):
            sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
            out[:, k] = 1.0 + sign * spread
            spread = np.where(out[:, k] > 1.0, wild, calm)
        return out

    return Model(f"sequential-two-point({calm!r},{wild!r})", K, draw, independent=False)


def sample(model: Model, runs: int, seed: int, threads: int | None = None) -> np.ndarray:
    """``(runs, K)`` draws, deterministic in ``seed`` and independent of ``threads``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    spans = chunks(runs, CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(spans))

    def one(i):
        lo, hi = spans[i]
        return model.sample(np.random.default_rng(seeds[i]), hi - lo)

    return np.concatenate(ordered_map(one, range(len(spans)), threads), axis=0)


def rowwise(F: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Lift a merging function on single vectors to ``(n, K)`` batches."""
    return lambda E: np.array([F(tuple(row)) for row in E.tolist()], dtype=float)


class MCEstimate(NamedTuple):
    mean: float
    se: float

    def within(self, target: float = 1.0, n_se: float = 4.0) -> bool:
        return abs(self.mean - target) <= n_se * self.se + 1e-12

    def at_most(self, bound: float = 1.0, n_se: float = 4.0) -> bool:
        return self.mean <= bound + n_se * self.se + 1e-12


def estimate(x: np.ndarray) -> MCEstimate:
    x = np.asarray(x, dtype=float)
    se = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.inf
    return MCEstimate(float(np.mean(x)), se)


def mc_e_property(
    F: Callable,
    model: Model,
    runs: int,
    seed: int,
    *,
    batched: bool = True,
    threads: int | None = None,
) -> MCEstimate:
    """Sample mean and standard error of ``F(E_1, ..., E_K)`` under ``model``.

    ``F`` maps an ``(n, K)`` array to ``n`` values; pass ``batched=False`` for
    a function of one e-value vector.
    """
    E = sample(model, runs, seed, threads)
    G = F if batched else rowwise(F)
    vals = np.concatenate(ordered_map(lambda lh: np.asarray(G(E[lh[0]:lh[1]]), dtype=float), chunks(runs, CHUNK), threads))
    return estimate(vals)

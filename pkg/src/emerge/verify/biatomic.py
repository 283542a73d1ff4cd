"""Brute-force ie-validity check over products of two-point e-variables.

Every e-variable is a mixture of two-point e-variables, so ``E[F] <= 1`` for
all independent two-point inputs is equivalent to ie-validity.  Here the atoms
are restricted to a finite value grid and the probabilities to a finite grid
augmented with the boundary probability that puts the mean exactly at 1.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from emerge._parallel import chunks, ordered_map
from emerge.verify.envelope import BudgetExceeded

MEAN_TOL = 1e-12
TIE_TOL = 1e-12
DEFAULT_COMBO_BUDGET = 10**8


@dataclass(frozen=True)
class BiAtomic:
    """``x`` with probability ``1 - p``, ``y`` with probability ``p``."""

    x: float
    y: float
    p: float

    def __post_init__(self):
        if not 0.0 <= self.x <= self.y:
            raise ValueError(f"need 0 <= x <= y, got x={self.x!r}, y={self.y!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p!r} outside [0, 1]")
        if self.mean > 1.0 + MEAN_TOL:
            raise ValueError(f"mean {self.mean!r} exceeds 1")

    @property
    def mean(self) -> float:
        return (1.0 - self.p) * self.x + self.p * self.y

    def triple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.p)


def enumerate_biatomic(value_grid: Sequence[float], prob_steps: int) -> list[BiAtomic]:
    """All distinct two-point e-variables with atoms on ``value_grid``.

    Point masses come first, then pairs ``x < y`` in grid order with
    probabilities ``k / prob_steps`` plus the boundary ``(1 - x) / (y - x)``.
    """
    vals = sorted(set(float(v) for v in value_grid))
    if not vals or vals[0] != 0.0:
        raise ValueError("value grid must contain 0")
    if prob_steps < 1:
        raise ValueError("prob_steps must be >= 1")
    out = [BiAtomic(v, v, 0.0) for v in vals if v <= 1.0]
    for x, y in itertools.combinations(vals, 2):
        if x > 1.0:
            continue
        ps = {k / prob_steps for k in range(1, prob_steps)}
        boundary = (1.0 - x) / (y - x)
        if 0.0 < boundary < 1.0:
            ps.add(boundary)
        for p in sorted(ps):
            if (1.0 - p) * x + p * y <= 1.0 + MEAN_TOL:
                out.append(BiAtomic(x, y, p))
    return out


def _better(cand, best) -> bool:
    value, mean_sum = cand[0], cand[1]
    if best is None or value > best[0] + TIE_TOL:
        return True
    return abs(value - best[0]) <= TIE_TOL and mean_sum > best[1]


def verify_ie_biatomic(
    F: Callable,
    K: int,
    value_grid: Sequence[float],
    prob_steps: int,
    *,
    budget: int = DEFAULT_COMBO_BUDGET,
    batched: bool = False,
    threads: int | None = None,
) -> tuple[float, tuple[BiAtomic, ...]]:
    """Worst ``E[F(E_1, ..., E_K)]`` over independent two-point inputs on the grid.

    Returns the worst mean and an attaining witness (one law per coordinate).
    Ties within 1e-12 go to the witness whose marginal means sum highest.
    """
    if not 1 <= K <= 3:
        raise BudgetExceeded(f"K={K} unsupported; the bi-atomic search handles K <= 3")
    vals = sorted(set(float(v) for v in value_grid))
    laws = enumerate_biatomic(vals, prob_steps)
    D, V = len(laws), len(vals)
    if D**K > budget:
        raise BudgetExceeded(f"{D}^{K} product laws exceed budget {budget}")

    pos = {v: i for i, v in enumerate(vals)}
    P = np.zeros((D, V))
    for d, law in enumerate(laws):
        P[d, pos[law.x]] += 1.0 - law.p
        P[d, pos[law.y]] += law.p
    means = np.array([law.mean for law in laws])

    if batched:
        mesh = np.stack(np.meshgrid(*([np.array(vals)] * K), indexing="ij"), axis=-1).reshape(-1, K)
        T = np.asarray(F(mesh), dtype=float)
    else:
        T = np.fromiter((F(p) for p in itertools.product(vals, repeat=K)), dtype=float, count=V**K)
    if not np.all(np.isfinite(T)) or np.any(T < 0):
        raise ValueError("merging function returned a negative or non-finite value on the grid")
    T = T.reshape((V,) * K)

    letters = string.ascii_lowercase[:K]
    vidx = string.ascii_lowercase[K:2 * K]
    spec = ",".join(f"{a}{v}" for a, v in zip(letters, vidx)) + f",{vidx}->{letters}"

    def block(lh):
        lo, hi = lh
        E = np.einsum(spec, P[lo:hi], *([P] * (K - 1)), T, optimize=True)
        msum = means[lo:hi].reshape((-1,) + (1,) * (K - 1))
        for axis in range(1, K):
            msum = msum + means.reshape((1,) * axis + (-1,) + (1,) * (K - 1 - axis))
        top = E.max()
        cand = np.where(E >= top - TIE_TOL, msum, -np.inf)
        flat = int(np.argmax(cand))
        idx = np.unravel_index(flat, E.shape)
        return float(E[idx]), float(msum[idx]), (int(idx[0]) + lo,) + tuple(int(i) for i in idx[1:])

    step = max(1, budget // max(1, D ** (K - 1)) // 64) if K > 1 else D
    best = None
    for res in ordered_map(block, chunks(D, min(D, step)), threads):
        if _better(res, best):
            best = res
    return best[0], tuple(laws[i] for i in best[2])

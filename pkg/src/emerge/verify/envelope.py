"""Sequential envelope of a merging function on a dyadic grid.

``F_K = F`` and ``F_k(prefix) = sup E[F_{k+1}(prefix, E)]`` over e-variables
``E`` supported on the grid.  Each one-step sup is a linear program whose dual
is a nonnegative-slope line above the points ``(c_i, f_i)``; it is solved
geometrically with an upper concave hull.  The optimal line through
``(1, value)`` with the smallest slope gives the bet ``s = slope / value``.

The grid is ``{0, 2^-n, ..., M}``.  Truncating at ``M`` can only shrink the
feasible set, so ``f0`` is a lower bound that increases with ``M`` and ``n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from emerge._parallel import chunks, ordered_map
from emerge.core import GamblingSystem, Prefix

DEFAULT_BUDGET = 10**7
# bet used where F_k(prefix) == 0: every s in [0, 1] is dual-optimal there
DEGENERATE_BET = 1.0
CERTIFY_TOL = 1e-9


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    n: int
    M: float
    K: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"resolution n={self.n!r} must be a nonnegative integer")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"dimension K={self.K!r} must be a positive integer")
        scaled = self.M * 2**self.n
        if not self.M > 0 or scaled != int(scaled):
            raise ValueError(f"cap M={self.M!r} must be a positive multiple of 2^-{self.n}")

    @property
    def step(self) -> float:
        return 2.0 ** -self.n

    @property
    def size(self) -> int:
        return int(self.M * 2**self.n) + 1

    @property
    def cells(self) -> int:
        return self.size**self.K

    def values(self) -> np.ndarray:
        return np.arange(self.size, dtype=float) * self.step


def upper_hull(xs: Sequence[float], fs: Sequence[float]) -> list[int]:
    """Indices of the upper concave hull vertices; ``xs`` strictly increasing."""
    hull: list[int] = []
    for i in range(len(xs)):
        xi, fi = xs[i], fs[i]
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            if (xs[a] - xs[o]) * (fi - fs[o]) - (fs[a] - fs[o]) * (xi - xs[o]) >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def _majorant(xs, fs) -> tuple[float, float]:
    hull = upper_hull(xs, fs)
    j = next((j for j, h in enumerate(hull) if xs[h] > 1.0), None)
    if j is None:
        value, slope = max(fs[h] for h in hull), 0.0
    else:
        a, b = hull[j - 1], hull[j]
        slope = (fs[b] - fs[a]) / (xs[b] - xs[a])
        at_one = fs[a] if xs[a] == 1.0 else fs[a] + slope * (1.0 - xs[a])
        value = max([at_one] + [fs[h] for h in hull[:j]])
    if value <= 0.0:
        return 0.0, DEGENERATE_BET
    return value, min(1.0, max(0.0, slope) / value)


def concave_majorant(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Sup of ``sum f_i p_i`` over laws ``p`` on ``{c_i}`` with mean <= 1, and the smallest dual bet.

    Returns ``(value, s)`` with ``f_i <= value * (s c_i + 1 - s)`` for all i.
    """
    if len(points) == 0:
        raise ValueError("no points")
    xs = [float(c) for c, _ in points]
    fs = [float(f) for _, f in points]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("abscissae must be strictly increasing")
    if xs[0] > 1.0:
        raise ValueError("no point with c <= 1: no e-variable is supported here")
    if xs[0] != 0.0:
        raise ValueError("the abscissae must include 0")
    if any(not math.isfinite(f) or f < 0 for f in fs):
        raise ValueError("payoffs must be finite and >= 0")
    return _majorant(xs, fs)


@dataclass
class EnvelopeResult:
    """Backward-induction tables: ``levels[k]`` holds ``F_k`` over the grid, ``bet_levels[k]`` the bets."""

    f0: float
    grid: GridSpec
    levels: list[np.ndarray] = field(repr=False)
    bet_levels: list[np.ndarray] = field(repr=False)

    @property
    def certified(self) -> bool:
        return self.f0 <= 1.0 + CERTIFY_TOL

    @cached_property
    def bets(self) -> dict[Prefix, float]:
        vals = self.grid.values().tolist()
        table = {}
        for k, arr in enumerate(self.bet_levels):
            for idx in itertools.product(range(len(vals)), repeat=k):
                table[tuple(vals[i] for i in idx)] = float(arr[idx])
        return table

    def dominating_system(self) -> GamblingSystem:
        return GamblingSystem.from_table(self.bets)

    def capital_levels(self) -> list[np.ndarray]:
        """Capital of the extracted martingale (started at ``f0``) at every grid prefix."""
        vals = self.grid.values()
        caps = [np.asarray(self.f0, dtype=float)]
        for k in range(self.grid.K):
            S = caps[-1][..., None]
            stake = (caps[-1] * self.bet_levels[k])[..., None]
            caps.append(S + stake * (vals - 1.0))
        return caps

    def domination_gap(self) -> float:
        """``max(F - S_K)`` over the grid; <= 0 means the martingale dominates."""
        return float(np.max(self.levels[-1] - self.capital_levels()[-1]))

    def dual_gap(self) -> float:
        """Worst ``F_{k+1}(p, e) - F_k(p) (s e + 1 - s)`` over all levels and grid points."""
        vals = self.grid.values()
        worst = -math.inf
        for k in range(self.grid.K):
            Fk = self.levels[k][..., None]
            s = self.bet_levels[k][..., None]
            worst = max(worst, float(np.max(self.levels[k + 1] - Fk * (s * vals + 1.0 - s))))
        return worst


def _grid_values_of(F, grid: GridSpec, batched: bool, threads) -> np.ndarray:
    vals = grid.values()
    if batched:
        mesh = np.stack(np.meshgrid(*([vals] * grid.K), indexing="ij"), axis=-1).reshape(-1, grid.K)
        parts = ordered_map(lambda lh: np.asarray(F(mesh[lh[0]:lh[1]]), dtype=float), chunks(len(mesh), 65536), threads)
        out = np.concatenate(parts)
    else:
        lst = vals.tolist()
        out = np.fromiter((F(p) for p in itertools.product(lst, repeat=grid.K)), dtype=float, count=grid.cells)
    if not np.all(np.isfinite(out)) or np.any(out < 0):
        raise ValueError("merging function returned a negative or non-finite value on the grid")
    return out.reshape((grid.size,) * grid.K)


def se_envelope(
    F: Callable,
    grid: GridSpec,
    *,
    budget: int = DEFAULT_BUDGET,
    batched: bool = False,
    threads: int | None = None,
) -> EnvelopeResult:
    """Sequential envelope of ``F`` over ``grid`` by backward induction.

    ``F`` takes a tuple of K e-values (or, with ``batched=True``, an array of
    shape ``(n, K)``).  ``f0 > 1`` exhibits sequential e-values on the grid
    whose merged mean exceeds 1, so ``F`` is not se-merging; ``f0 <= 1``
    yields bets whose martingale dominates ``F`` on every grid point.
    """
    if grid.cells > budget:
        raise BudgetExceeded(f"grid table has {grid.cells} cells, budget is {budget}")
    xs = grid.values().tolist()
    G = grid.size
    levels = [None] * (grid.K + 1)
    bet_levels = [None] * grid.K
    levels[grid.K] = _grid_values_of(F, grid, batched, threads)
    for k in range(grid.K - 1, -1, -1):
        rows = levels[k + 1].reshape(-1, G)

        def solve(lh, rows=rows):
            return [_majorant(xs, rows[r].tolist()) for r in range(*lh)]

        solved = [pair for part in ordered_map(solve, chunks(len(rows), 512), threads) for pair in part]
        levels[k] = np.array([v for v, _ in solved]).reshape((G,) * k)
        bet_levels[k] = np.array([s for _, s in solved]).reshape((G,) * k)
    result = EnvelopeResult(float(levels[0]), grid, levels, bet_levels)
    if result.certified:
        scale = max(1.0, float(np.max(levels[-1])))
        gap = result.domination_gap()
        if gap > CERTIFY_TOL * scale:
            raise RuntimeError(f"extracted martingale fails to dominate F on the grid (gap {gap!r})")
    return result

"""Reading strategies and generalized martingale merging for independent e-values.

A reading strategy picks which e-value to reveal next from the values revealed
so far.  Indices are 1-based throughout, matching the usual ``e_1, ..., e_K``
notation.  Randomised strategies are expressed only as finite mixtures of
deterministic (gambling system, reading strategy) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from emerge.core import (
    WEIGHT_TOL,
    ContractViolation,
    EVector,
    GamblingSystem,
    Prefix,
    Trajectory,
    _check_capital,
)


class InvalidStrategyError(ValueError):
    """A reading strategy proposed an out-of-range or already-read index."""

    def __init__(self, step: int, index, reason: str):
        super().__init__(f"step {step}: index {index!r} {reason}")
        self.step = step
        self.index = index


@dataclass(frozen=True)
class ReadingStrategy:
    """``rule(revealed_values) -> index in 1..K`` of the next e-value to reveal."""

    rule: Callable[[Prefix], int]
    name: str = ""

    def next(self, prefix: Sequence[float]) -> int:
        return int(self.rule(tuple(prefix)))

    @classmethod
    def identity(cls) -> ReadingStrategy:
        return cls(lambda prefix: len(prefix) + 1, name="identity")

    @classmethod
    def fixed(cls, order: Sequence[int]) -> ReadingStrategy:
        order = tuple(int(i) for i in order)
        return cls(lambda prefix: order[len(prefix)], name=f"order{order}")

    @classmethod
    def from_steps(cls, K: int, steps: Sequence[Callable[[Prefix], int] | None]) -> ReadingStrategy:
        """Build from one chooser per step; ``None`` (or a missing step) reads the smallest unread index.

        The set of already-read indices is recovered by replaying the earlier
        steps on the revealed values, so choosers only ever see values.
        """
        steps = list(steps)

        def choose(k, prefix, read):
            step = steps[k] if k < len(steps) else None
            if step is None:
                return min(set(range(1, K + 1)) - set(read))
            return int(step(prefix[:k]))

        def rule(prefix):
            read = []
            for k in range(len(prefix)):
                read.append(choose(k, prefix, read))
            return choose(len(prefix), prefix, read)

        return cls(rule, name="steps")


def apply_reading_strategy(pi: ReadingStrategy, e: EVector | Sequence[float]) -> tuple[EVector, tuple[int, ...]]:
    """Reveal ``e`` in the order chosen by ``pi``; returns (reordered values, indices read)."""
    e = EVector.coerce(e)
    K = len(e)
    order: list[int] = []
    revealed: list[float] = []
    for k in range(K):
        j = pi.next(revealed)
        if not 1 <= j <= K:
            raise InvalidStrategyError(k + 1, j, f"outside 1..{K}")
        if j in order:
            raise InvalidStrategyError(k + 1, j, "was already read")
        order.append(j)
        revealed.append(e[j - 1])
    return EVector(tuple(revealed)), tuple(order)


def evaluate_reordered(s: GamblingSystem, pi: ReadingStrategy, c: float, e: EVector | Sequence[float]) -> Trajectory:
    """Reordered test martingale: bet with ``s`` on the e-value ``pi`` reveals next."""
    e = EVector.coerce(e)
    K = len(e)
    caps = [_check_capital(c)]
    revealed: list[float] = []
    read: set[int] = set()
    for k in range(K):
        prefix = tuple(revealed)
        j = pi.next(prefix)
        if not 1 <= j <= K:
            raise InvalidStrategyError(k + 1, j, f"outside 1..{K}")
        if j in read:
            raise InvalidStrategyError(k + 1, j, "was already read")
        read.add(j)
        x = e[j - 1]
        stake = caps[-1] * s.bet(prefix)
        caps.append(caps[-1] + stake * (x - 1.0))
        revealed.append(x)
    return Trajectory(tuple(caps))


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    s: GamblingSystem
    pi: ReadingStrategy
    c: float = 1.0


def merge_generalized(mix: Sequence[MixtureComponent], e: EVector | Sequence[float]) -> float:
    """Weighted average of the terminal capitals of reordered test martingales."""
    mix = list(mix)
    weights = [m.weight for m in mix]
    if not mix or any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > WEIGHT_TOL:
        raise ValueError(f"mixture weights {weights} are not a probability vector")
    e = EVector.coerce(e)
    acc = 0.0
    for m in mix:
        acc += m.weight * evaluate_reordered(m.s, m.pi, m.c, e).final
    return acc


def mixture_trajectory(mix: Sequence[MixtureComponent], e: EVector | Sequence[float]) -> Trajectory:
    """Weighted sum, step by step, of the components' reordered capital processes."""
    e = EVector.coerce(e)
    trajs = [(m.weight, evaluate_reordered(m.s, m.pi, m.c, e)) for m in mix]
    caps = []
    for k in range(len(e) + 1):
        acc = 0.0
        for w, traj in trajs:
            acc += w * traj[k]
        caps.append(acc)
    return Trajectory(tuple(caps))


def odds(x: float) -> float:
    """``x / (1 + x)``, the second-round bet of the symmetric example."""
    return x / (1.0 + x)


@dataclass(frozen=True)
class TwoDecomposition:
    """Every K=2 generalized martingale merging function, in closed form.

    With probability ``beta`` read e_1 first, bet ``a1`` on it and then
    ``g1(e_1)`` on e_2; otherwise read e_2 first, bet ``a2``, then ``g2(e_2)``.
    """

    beta: float
    a1: float
    a2: float
    g1: Callable[[float], float]
    g2: Callable[[float], float]

    def __post_init__(self):
        for name in ("beta", "a1", "a2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v!r} outside [0, 1]")

    def to_mixture(self) -> list[MixtureComponent]:
        a1, a2, g1, g2 = self.a1, self.a2, self.g1, self.g2
        s1 = GamblingSystem(lambda p: a1 if not p else g1(p[0]), name="decomposed-1")
        s2 = GamblingSystem(lambda p: a2 if not p else g2(p[0]), name="decomposed-2")
        return [
            MixtureComponent(self.beta, s1, ReadingStrategy.fixed((1, 2))),
            MixtureComponent(1.0 - self.beta, s2, ReadingStrategy.fixed((2, 1))),
        ]


def _bet_in_range(g, x, label):
    v = float(g(x))
    if not 0.0 <= v <= 1.0:
        raise ContractViolation(f"{label}({x!r}) = {v!r} outside [0, 1]")
    return v


def merge_two_decomposed(d: TwoDecomposition, e1: float, e2: float) -> float:
    if e1 < 0 or e2 < 0:
        raise ValueError("e-values must be >= 0")
    t1, t2 = e1 - 1.0, e2 - 1.0
    g1 = _bet_in_range(d.g1, e1, "g1")
    g2 = _bet_in_range(d.g2, e2, "g2")
    return d.beta * (1.0 + d.a1 * t1) * (1.0 + g1 * t2) + (1.0 - d.beta) * (1.0 + d.a2 * t2) * (1.0 + g2 * t1)


def merge_symmetric_example(e1: float, e2: float) -> float:
    """``(1/2)(e1/(1+e1) + e2/(1+e2))(1 + e1 e2)``: ie-merging but not se-merging."""
    if e1 < 0 or e2 < 0:
        raise ValueError("e-values must be >= 0")
    return 0.5 * (e1 / (1.0 + e1) + e2 / (1.0 + e2)) * (1.0 + e1 * e2)


def symmetric_example_decomposition() -> TwoDecomposition:
    return TwoDecomposition(0.5, 1.0, 1.0, odds, odds)


def symmetric_example_mixture() -> list[MixtureComponent]:
    """Reveal either e-value with probability 1/2, go all-in, then bet its odds on the other."""
    return symmetric_example_decomposition().to_mixture()


def counterexample_G(c: float, e1: float, e2: float) -> float:
    """1 on ``[0,c)^2``, ``2c-1`` on ``[c,inf)^2``, 0 elsewhere.

    ie-merging, yet not dominated by any generalized martingale merging function.
    """
    if not c > 1:
        raise ValueError(f"c={c!r} must exceed 1")
    if e1 < c and e2 < c:
        return 1.0
    if e1 >= c and e2 >= c:
        return 2.0 * c - 1.0
    return 0.0


def se_envelope_of_symmetric_example(e1: float) -> float:
    """``sup E[F(e1, E2)]`` over e-variables ``E2`` for the symmetric example F.

    In ``x`` the function is affine plus ``(e1 - 1) / (2 (1 + x))``.  For
    ``e1 <= 1`` that term is concave and the sup is ``F(e1, 1) = (3 e1 + 1)/4``;
    for ``e1 > 1`` it is convex and the sup ``e1`` is approached (not attained)
    by the two-point laws on ``{0, x}`` as ``x`` grows.
    """
    if e1 < 0:
        raise ValueError("e-values must be >= 0")
    return max(e1, (3.0 * e1 + 1.0) / 4.0)

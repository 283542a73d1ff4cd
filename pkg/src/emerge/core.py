"""E-value vectors, gambling systems and the martingale merging catalog.

A gambling system ``s`` maps an observed prefix ``(e_1, ..., e_k)`` to the
fraction of current capital staked on ``e_{k+1}``.  Its test martingale is

    S_0 = c,    S_{k+1} = S_k + (S_k * s(e_(k))) * (e_{k+1} - 1)

which is the multiplicative recursion ``S_k * (s e + 1 - s)`` written in the
additive order.  Every evaluator in this package uses exactly that order so the
multiplicative and additive formulations agree bit for bit.

Prefixes are plain tuples of floats; the empty prefix is ``()``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

Prefix = tuple[float, ...]

WEIGHT_TOL = 1e-12


class ContractViolation(ValueError):
    """A user-supplied strategy returned a value outside its allowed range."""


class InfeasibleStakeError(ValueError):
    """An additive-form stake drove the capital below zero."""

    def __init__(self, step: int, capital: float):
        super().__init__(f"capital {capital!r} < 0 at step {step}")
        self.step = step
        self.capital = capital


@dataclass(frozen=True)
class EVector:
    """A finite ordered vector of nonnegative, finite e-values."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("an EVector needs at least one e-value")
        for i, v in enumerate(vals):
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"e-value #{i + 1} is {v!r}; must be finite and >= 0")
        object.__setattr__(self, "values", vals)

    @classmethod
    def coerce(cls, e: EVector | Sequence[float]) -> EVector:
        return e if isinstance(e, EVector) else cls(tuple(e))

    def prefix(self, k: int) -> Prefix:
        return self.values[:k]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class Trajectory:
    """Capitals ``S_0, ..., S_K`` of a test martingale on one input."""

    capitals: tuple[float, ...]

    @property
    def final(self) -> float:
        return self.capitals[-1]

    @property
    def initial(self) -> float:
        return self.capitals[0]

    def __len__(self) -> int:
        return len(self.capitals)

    def __getitem__(self, k):
        return self.capitals[k]


@dataclass(frozen=True)
class GamblingSystem:
    """Bet fraction as a function of the observed prefix.

    ``rule`` is any callable on prefixes.  ``table`` is an optional finite
    form keyed by exact prefix tuples (used by the envelope constructor).
    Bets are range-checked on every call; nothing is clamped.
    """

    rule: Callable[[Prefix], float]
    table: Mapping[Prefix, float] | None = field(default=None, compare=False)
    name: str = ""

    def bet(self, prefix: Sequence[float]) -> float:
        prefix = tuple(prefix)
        s = float(self.rule(prefix))
        if not 0.0 <= s <= 1.0:
            raise ContractViolation(f"bet {s!r} outside [0, 1] at prefix {prefix!r}")
        return s

    __call__ = bet

    @classmethod
    def constant(cls, s: float) -> GamblingSystem:
        s = float(s)
        return cls(lambda prefix: s, name=f"const({s!r})")

    @classmethod
    def from_table(cls, table: Mapping[Prefix, float], default: float | None = None) -> GamblingSystem:
        table = dict(table)

        def rule(prefix):
            try:
                return table[prefix]
            except KeyError:
                if default is None:
                    raise ContractViolation(f"no bet tabulated for prefix {prefix!r}") from None
                return default

        return cls(rule, table=table, name="table")


@dataclass(frozen=True)
class StakeFunction:
    """Absolute stake ``t(e_(k)) >= 0`` for the additive form of a martingale."""

    rule: Callable[[Prefix], float]
    name: str = ""

    def stake(self, prefix: Sequence[float]) -> float:
        prefix = tuple(prefix)
        t = float(self.rule(prefix))
        if not (math.isfinite(t) and t >= 0.0):
            raise ContractViolation(f"stake {t!r} is not a finite nonnegative number at prefix {prefix!r}")
        return t

    __call__ = stake

    @classmethod
    def constant(cls, t: float) -> StakeFunction:
        t = float(t)
        return cls(lambda prefix: t, name=f"const({t!r})")


def _check_capital(c: float) -> float:
    c = float(c)
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"initial capital {c!r} outside [0, 1]")
    return c


def _capitals(s: GamblingSystem, c: float, values: Sequence[float]) -> list[float]:
    caps = [c]
    for k, x in enumerate(values):
        stake = caps[-1] * s.bet(values[:k])
        caps.append(caps[-1] + stake * (x - 1.0))
    return caps


def evaluate_martingale(s: GamblingSystem, c: float, e: EVector | Sequence[float]) -> Trajectory:
    """Capital process of gambling system ``s`` started at ``c`` on ``e``."""
    e = EVector.coerce(e)
    return Trajectory(tuple(_capitals(s, _check_capital(c), e.values)))


def evaluate_additive(t: StakeFunction, c: float, e: EVector | Sequence[float]) -> Trajectory:
    """Capital process ``S_{k+1} = S_k + t(e_(k)) (e_{k+1} - 1)``.

    Raises InfeasibleStakeError at the first step where capital goes negative.
    """
    e = EVector.coerce(e)
    caps = [_check_capital(c)]
    vals = e.values
    for k, x in enumerate(vals):
        nxt = caps[-1] + t.stake(vals[:k]) * (x - 1.0)
        if nxt < 0:
            raise InfeasibleStakeError(k + 1, nxt)
        caps.append(nxt)
    return Trajectory(tuple(caps))


def to_additive(s: GamblingSystem, c: float = 1.0) -> StakeFunction:
    """Stake function ``t = S_k * s`` equivalent to ``s`` started at capital ``c``."""
    c = _check_capital(c)

    def rule(prefix):
        return _capitals(s, c, prefix)[-1] * s.bet(prefix)

    return StakeFunction(rule, name=f"additive({s.name})")


# ---------------------------------------------------------------------------
# merging functions; all accept an EVector, a sequence, or an array whose last
# axis holds the K e-values (batched evaluation)


def _as_array(e) -> np.ndarray:
    arr = np.asarray(e, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] == 0:
        raise ValueError("need at least one e-value")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("e-values must be finite and >= 0")
    return arr


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def merge_product(e):
    return _out(np.prod(_as_array(e), axis=-1))


def merge_mean(e):
    return _out(np.mean(_as_array(e), axis=-1))


def elementary_symmetric(e, n: int):
    """``sum over n-subsets of the product of their entries`` via the usual recursion."""
    arr = _as_array(e)
    K = arr.shape[-1]
    acc = [np.ones(arr.shape[:-1])] + [np.zeros(arr.shape[:-1]) for _ in range(n)]
    for k in range(K):
        x = arr[..., k]
        for j in range(min(n, k + 1), 0, -1):
            acc[j] = acc[j] + x * acc[j - 1]
    return acc[n]


def merge_u_statistic(n: int, e):
    """U-statistic ``U_n``: average of products over all n-subsets."""
    arr = _as_array(e)
    K = arr.shape[-1]
    if not 0 <= n <= K:
        raise ValueError(f"U-statistic order {n} outside 0..{K}")
    return _out(elementary_symmetric(arr, n) / math.comb(K, n))


def _check_breaks(breaks: Sequence[int], K: int) -> tuple[int, ...]:
    breaks = tuple(int(b) for b in breaks)
    prev = 0
    for b in breaks:
        if not prev < b < K:
            raise ValueError(f"block breaks {breaks} must be strictly increasing within 1..{K - 1}")
        prev = b
    return breaks


def _block_edges(breaks, K):
    edges = (0,) + _check_breaks(breaks, K) + (K,)
    return list(zip(edges[:-1], edges[1:]))


def merge_block_product(breaks: Sequence[int], e):
    """Product over blocks ``(K_i, K_{i+1}]`` of within-block arithmetic means."""
    arr = _as_array(e)
    out = np.ones(arr.shape[:-1])
    for lo, hi in _block_edges(breaks, arr.shape[-1]):
        out = out * (arr[..., lo:hi].sum(axis=-1) / (hi - lo))
    return _out(out)


def block_product_trajectory(breaks: Sequence[int], e: EVector | Sequence[float]) -> Trajectory:
    """Running test martingale of the block product, from its closed form."""
    e = EVector.coerce(e)
    K = len(e)
    edges = _block_edges(breaks, K)
    caps = []
    for k in range(K + 1):
        done = 1.0
        value = None
        for lo, hi in edges:
            if k >= hi:
                done *= sum(e.values[lo:hi]) / (hi - lo)
            else:
                value = done * (sum(e.values[lo:k]) + hi - k) / (hi - lo)
                break
        caps.append(done if value is None else value)
    return Trajectory(tuple(caps))


def block_product_stake(breaks: Sequence[int], K: int) -> StakeFunction:
    """Additive stake generating the block product: completed-block product over block length."""
    edges = _block_edges(breaks, K)

    def rule(prefix):
        k = len(prefix)
        done = 1.0
        for lo, hi in edges:
            if k >= hi:
                done *= sum(prefix[lo:hi]) / (hi - lo)
            else:
                return done / (hi - lo)
        raise ContractViolation(f"prefix of length {k} is not shorter than K={K}")

    return StakeFunction(rule, name=f"block{tuple(breaks)}")


def product_system() -> GamblingSystem:
    return GamblingSystem(lambda prefix: 1.0, name="product")


def subset_product_system(subset: Sequence[int]) -> GamblingSystem:
    """All-in on the (1-based) rounds in ``subset``, no bet elsewhere."""
    chosen = frozenset(int(i) for i in subset)
    return GamblingSystem(lambda prefix: 1.0 if len(prefix) + 1 in chosen else 0.0, name=f"subset{sorted(chosen)}")


def _check_weights(weights: Sequence[float]) -> None:
    if any(w < 0 for w in weights) or abs(math.fsum(weights) - 1.0) > WEIGHT_TOL:
        raise ValueError(f"weights {list(weights)} are not a probability vector")


@dataclass(frozen=True)
class MartingaleMixture:
    """Convex combination of test martingales given as (weight, system, capital)."""

    components: tuple[tuple[float, GamblingSystem, float], ...]

    def trajectory(self, e) -> Trajectory:
        e = EVector.coerce(e)
        trajs = [(w, evaluate_martingale(s, c, e)) for w, s, c in self.components]
        caps = []
        for k in range(len(e) + 1):
            acc = 0.0
            for w, traj in trajs:
                acc += w * traj[k]
            caps.append(acc)
        return Trajectory(tuple(caps))

    def __call__(self, e) -> float:
        return self.trajectory(e).final

    @property
    def initial_capital(self) -> float:
        return math.fsum(w * c for w, _, c in self.components)

    def stake_function(self) -> StakeFunction:
        """Additive form of the mixture: the weighted sum of component stakes."""
        stakes = [(w, to_additive(s, c)) for w, s, c in self.components]

        def rule(prefix):
            acc = 0.0
            for w, t in stakes:
                acc += w * t.stake(prefix)
            return acc

        return StakeFunction(rule, name="mixture")


def convex_combine(components: Sequence[tuple[float, GamblingSystem, float]]) -> MartingaleMixture:
    comps = tuple((float(w), s, _check_capital(c)) for w, s, c in components)
    if not comps:
        raise ValueError("need at least one component")
    _check_weights([w for w, _, _ in comps])
    return MartingaleMixture(comps)


def u_statistic_mixture(n: int, K: int) -> MartingaleMixture:
    """``U_n`` as the uniform mixture of the subset-product martingales."""
    subsets = list(itertools.combinations(range(1, K + 1), n))
    w = 1.0 / len(subsets)
    return convex_combine([(w, subset_product_system(sub), 1.0) for sub in subsets])


def exceed_and_stop(base: GamblingSystem, alpha: float, c: float = 1.0) -> GamblingSystem:
    """Follow ``base`` until capital first reaches ``1/alpha``, then bet nothing.

    The running capital is reconstructed from the prefix, so the initial
    capital ``c`` the system will be run with must be supplied.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha {alpha!r} outside (0, 1)")
    c = _check_capital(c)
    target = 1.0 / alpha

    def rule(prefix):
        capital = c
        for k, x in enumerate(prefix):
            if capital >= target:
                return 0.0
            stake = capital * base.bet(prefix[:k])
            capital = capital + stake * (x - 1.0)
        return 0.0 if capital >= target else base.bet(prefix)

    return GamblingSystem(rule, name=f"exceed_and_stop({base.name}, {alpha!r})")

"""Catalog of merging functions addressable by a textual id.

Ids: ``product``, ``mean``, ``ustat:N``, ``block:K1,...,Km``, ``symmetric2``,
``decomposed:FILE``, ``generalized:FILE``, ``counterexampleG:C`` (also
``counterexampleG:c=C``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from emerge import config
from emerge.core import (
    EVector,
    StakeFunction,
    Trajectory,
    block_product_trajectory,
    evaluate_additive,
    evaluate_martingale,
    merge_block_product,
    merge_mean,
    merge_product,
    merge_u_statistic,
    product_system,
    u_statistic_mixture,
)
from emerge.reorder import (
    counterexample_G,
    merge_generalized,
    merge_symmetric_example,
    merge_two_decomposed,
    mixture_trajectory,
    symmetric_example_mixture,
)


class FunctionSpecError(ValueError):
    def __init__(self, text: str, position: int, message: str):
        super().__init__(f"function id {text!r}, position {position}: {message}")
        self.position = position


@dataclass(frozen=True)
class MergingFunction:
    """A parsed catalog entry.

    ``batch`` maps ``(n, K)`` arrays to ``n`` values.  ``trajectory`` is set
    for functions backed by (mixtures of possibly reordered) test
    martingales; ``martingale`` marks plain test martingales, whose running
    capital after k rounds equals ``F`` on the prefix padded with ones.
    """

    id: str
    arity: int | None
    scalar: Callable[[tuple], float]
    batch: Callable[[np.ndarray], np.ndarray]
    trajectory: Callable[[EVector], Trajectory] | None
    martingale: bool

    def check_arity(self, K: int) -> None:
        if self.arity is not None and K != self.arity:
            raise ValueError(f"{self.id} takes {self.arity} e-values, got {K}")


def _rowwise(f):
    return lambda E: np.array([f(tuple(row)) for row in np.asarray(E).tolist()], dtype=float)


def _int(text, pos, token):
    try:
        return int(token)
    except ValueError:
        raise FunctionSpecError(text, pos, f"expected an integer, got {token!r}") from None


def _float(text, pos, token):
    try:
        return float(token)
    except ValueError:
        raise FunctionSpecError(text, pos, f"expected a number, got {token!r}") from None


def parse(text: str) -> MergingFunction:
    name, sep, arg = text.partition(":")
    apos = len(name) + 1

    def need_arg():
        if not sep or not arg:
            raise FunctionSpecError(text, apos, f"{name} needs an argument after ':'")

    def no_arg():
        if sep:
            raise FunctionSpecError(text, len(name), f"{name} takes no argument")

    if name == "product":
        no_arg()
        return MergingFunction(text, None, merge_product, merge_product,
                               lambda e: evaluate_martingale(product_system(), 1.0, e), True)
    if name == "mean":
        no_arg()
        return MergingFunction(text, None, merge_mean, merge_mean,
                               lambda e: evaluate_additive(StakeFunction.constant(1.0 / len(e)), 1.0, e), True)
    if name == "ustat":
        need_arg()
        n = _int(text, apos, arg)
        if n < 0:
            raise FunctionSpecError(text, apos, "order must be >= 0")
        return MergingFunction(text, None, lambda e: merge_u_statistic(n, e), lambda E: merge_u_statistic(n, E),
                               lambda e: u_statistic_mixture(n, len(e)).trajectory(e), True)
    if name == "block":
        need_arg()
        breaks, pos = [], apos
        for token in arg.split(","):
            breaks.append(_int(text, pos, token))
            pos += len(token) + 1
        breaks = tuple(breaks)
        return MergingFunction(text, None, lambda e: merge_block_product(breaks, e),
                               lambda E: merge_block_product(breaks, E),
                               lambda e: block_product_trajectory(breaks, e), True)
    if name == "symmetric2":
        no_arg()
        f = lambda e: merge_symmetric_example(*e)
        mix = symmetric_example_mixture()
        return MergingFunction(text, 2, f, _rowwise(f), lambda e: mixture_trajectory(mix, e), False)
    if name == "counterexampleG":
        need_arg()
        token = arg[2:] if arg.startswith("c=") else arg
        c = _float(text, apos + len(arg) - len(token), token)
        if not c > 1:
            raise FunctionSpecError(text, apos, "c must exceed 1")
        f = lambda e: counterexample_G(c, *e)
        return MergingFunction(text, 2, f, _rowwise(f), None, False)
    if name == "decomposed":
        need_arg()
        d = config.decomposed(config.load(arg, "decomposed"))
        f = lambda e: merge_two_decomposed(d, *e)
        mix = d.to_mixture()
        return MergingFunction(text, 2, f, _rowwise(f), lambda e: mixture_trajectory(mix, e), False)
    if name == "generalized":
        need_arg()
        K, mix = config.generalized(config.load(arg, "generalized"))
        f = lambda e: merge_generalized(mix, e)
        return MergingFunction(text, K, f, _rowwise(f), lambda e: mixture_trajectory(mix, e), False)
    raise FunctionSpecError(text, 0, f"unknown function {name!r}")

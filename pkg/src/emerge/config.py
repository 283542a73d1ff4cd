"""Versioned JSON run-configuration files.

Every document carries ``"version": 1`` and a ``"kind"``; unknown keys are
rejected.  Kinds:

``simulation``
    Any subset of the SimConfig fields (``K``, ``runs``, ``theta_true``,
    ``theta0``, ``prior_sd``, ``uniform_hi``, ``seed``, ``strategies``,
    ``clamp_mle``).

``decomposed``
    ``beta``, ``a1``, ``a2`` and the second-round bet functions ``g1``, ``g2``.

``generalized``
    ``K`` and a list of ``components``, each with ``weight``, optional
    ``capital`` (default 1), a ``reading`` strategy and per-step ``bets``.

A bet function is ``{"kind": "const", "value": v}``, ``{"kind": "odds"}``
(``x / (1 + x)``) or ``{"kind": "pwl", "x": [...], "y": [...]}`` (piecewise
linear, flat outside the knots).  Step ``k`` of ``bets`` is applied to the most
recently revealed value; step 0 must be ``const``.

A reading strategy is ``{"order": [i1, ..., iK]}`` or ``{"steps": [...]}``
where each step is ``{"index": i}``, ``{"threshold": t, "below": i,
"above": j}`` on the most recent value, or ``null`` for the smallest unread
index.
"""

from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path
from typing import Any, Callable

import numpy as np

from emerge.core import GamblingSystem
from emerge.reorder import MixtureComponent, ReadingStrategy, TwoDecomposition, odds
from emerge.sim import SimConfig

VERSION = 1


class ConfigError(ValueError):
    pass


def _keys(doc: dict, where: str, required: set[str], optional: set[str] = frozenset()) -> None:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    missing = required - doc.keys()
    unknown = doc.keys() - required - optional
    if missing:
        raise ConfigError(f"{where}: missing key(s) {sorted(missing)}")
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def load(path: str | Path, kind: str | None = None) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return check_header(doc, kind)


def check_header(doc: Any, kind: str | None = None) -> dict:
    if not isinstance(doc, dict) or "version" not in doc:
        raise ConfigError("config: missing mandatory 'version'")
    if doc["version"] != VERSION:
        raise ConfigError(f"config: unsupported version {doc['version']!r}, expected {VERSION}")
    if kind is not None and doc.get("kind") != kind:
        raise ConfigError(f"config: expected kind {kind!r}, got {doc.get('kind')!r}")
    return doc


def simulation(doc: dict) -> SimConfig:
    names = {f.name for f in fields(SimConfig)}
    _keys(doc, "simulation", {"version", "kind"}, names)
    kwargs = {k: v for k, v in doc.items() if k in names}
    try:
        return SimConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"simulation: {exc}") from None


def bet_function(doc: dict, where: str) -> Callable[[float], float]:
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "const":
        _keys(doc, where, {"kind", "value"})
        v = float(doc["value"])
        return lambda x: v
    if kind == "odds":
        _keys(doc, where, {"kind"})
        return odds
    if kind == "pwl":
        _keys(doc, where, {"kind", "x", "y"})
        xs, ys = np.asarray(doc["x"], dtype=float), np.asarray(doc["y"], dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 1 or np.any(np.diff(xs) <= 0):
            raise ConfigError(f"{where}: pwl knots must be matching, strictly increasing lists")
        if np.any(ys < 0) or np.any(ys > 1):
            raise ConfigError(f"{where}: pwl values must lie in [0, 1]")
        return lambda x: float(np.interp(x, xs, ys))
    raise ConfigError(f"{where}: unknown bet function kind {kind!r}")


def _gambling_system(steps: list, where: str) -> GamblingSystem:
    if not isinstance(steps, list) or not steps:
        raise ConfigError(f"{where}: expected a non-empty list of bet functions")
    if not (isinstance(steps[0], dict) and steps[0].get("kind") == "const"):
        raise ConfigError(f"{where}[0]: the first bet must be const")
    fns = [bet_function(s, f"{where}[{i}]") for i, s in enumerate(steps)]

    def rule(prefix):
        k = len(prefix)
        if k >= len(fns):
            raise ConfigError(f"{where}: no bet configured for step {k}")
        return fns[k](prefix[-1]) if k else fns[0](0.0)

    return GamblingSystem(rule, name=where)


def _reading_step(doc, where):
    if doc is None:
        return None
    if "index" in doc:
        _keys(doc, where, {"index"})
        i = int(doc["index"])
        return lambda prefix: i
    _keys(doc, where, {"threshold", "below", "above"})
    t, lo, hi = float(doc["threshold"]), int(doc["below"]), int(doc["above"])
    return lambda prefix: lo if prefix[-1] < t else hi


def reading_strategy(doc: dict, K: int, where: str) -> ReadingStrategy:
    if isinstance(doc, dict) and "order" in doc:
        _keys(doc, where, {"order"})
        order = [int(i) for i in doc["order"]]
        if sorted(order) != list(range(1, K + 1)):
            raise ConfigError(f"{where}: order must be a permutation of 1..{K}")
        return ReadingStrategy.fixed(order)
    _keys(doc, where, {"steps"})
    steps = doc["steps"]
    if not isinstance(steps, list) or len(steps) > K:
        raise ConfigError(f"{where}: steps must be a list of at most {K} entries")
    if steps and isinstance(steps[0], dict) and "threshold" in steps[0]:
        raise ConfigError(f"{where}[0]: the first read cannot depend on revealed values")
    return ReadingStrategy.from_steps(K, [_reading_step(s, f"{where}.steps[{i}]") for i, s in enumerate(steps)])


def generalized(doc: dict) -> tuple[int, list[MixtureComponent]]:
    _keys(doc, "generalized", {"version", "kind", "K", "components"})
    K = int(doc["K"])
    if K < 1:
        raise ConfigError("generalized: K must be >= 1")
    comps = []
    for i, c in enumerate(doc["components"]):
        where = f"components[{i}]"
        _keys(c, where, {"weight", "reading", "bets"}, {"capital"})
        comps.append(
            MixtureComponent(
                float(c["weight"]),
                _gambling_system(c["bets"], f"{where}.bets"),
                reading_strategy(c["reading"], K, f"{where}.reading"),
                float(c.get("capital", 1.0)),
            )
        )
    if not comps:
        raise ConfigError("generalized: no components")
    return K, comps


def decomposed(doc: dict) -> TwoDecomposition:
    _keys(doc, "decomposed", {"version", "kind", "beta", "a1", "a2", "g1", "g2"})
    try:
        return TwoDecomposition(
            float(doc["beta"]),
            float(doc["a1"]),
            float(doc["a2"]),
            bet_function(doc["g1"], "g1"),
            bet_function(doc["g2"], "g2"),
        )
    except ValueError as exc:
        raise ConfigError(f"decomposed: {exc}") from None

"""Plain-text certification reports.

Layout::

    emerge-report v1
    key: value
    ...

    [section]
    (row, tuple)
    ...

Scalars are written with ``repr`` (strings bare), rows as Python tuple
literals, so ``Report.parse(text).emit() == text`` byte for byte.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field

HEADER = "emerge-report v1"


def _fmt(v) -> str:
    return v if isinstance(v, str) else repr(v)


_SPECIAL = {"inf": math.inf, "nan": math.nan}


def _literal(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (str, int, float, bool)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _SPECIAL:
        return _SPECIAL[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _literal(node.operand)
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Tuple):
        return tuple(_literal(e) for e in node.elts)
    raise ValueError(f"unsupported literal {ast.dump(node)}")


def literal(text: str):
    """``ast.literal_eval`` that also accepts the bare ``inf`` and ``nan`` written by ``repr``."""
    return _literal(ast.parse(text, mode="eval").body)


def _scalar(text: str):
    try:
        v = literal(text)
    except (ValueError, SyntaxError):
        return text
    return v if isinstance(v, (int, float, bool, tuple)) and repr(v) == text else text


@dataclass
class Report:
    fields: dict[str, object] = field(default_factory=dict)
    sections: dict[str, list[tuple]] = field(default_factory=dict)

    def emit(self) -> str:
        lines = [HEADER]
        lines += [f"{k}: {_fmt(v)}" for k, v in self.fields.items()]
        for name, rows in self.sections.items():
            lines += ["", f"[{name}]"]
            lines += [repr(tuple(row)) for row in rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> Report:
        lines = text.split("\n")
        if not lines or lines[0] != HEADER:
            raise ValueError(f"not a report: first line must be {HEADER!r}")
        if lines[-1] != "":
            raise ValueError("report must end with a newline")
        report, section = cls(), None
        for num, line in enumerate(lines[1:-1], start=2):
            if section is None and line and not line.startswith("["):
                key, sep, value = line.partition(": ")
                if not sep:
                    raise ValueError(f"line {num}: expected 'key: value'")
                report.fields[key] = _scalar(value)
            elif line.startswith("[") and line.endswith("]"):
                section = line[1:-1]
                report.sections[section] = []
            elif line == "":
                continue
            else:
                row = literal(line)
                if not isinstance(row, tuple):
                    raise ValueError(f"line {num}: rows must be tuples")
                report.sections[section].append(row)
        return report

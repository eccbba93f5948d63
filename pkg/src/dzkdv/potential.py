"""Reader for model files: ``N = <int>`` and ``F = <expr>``.

Statements are separated by newlines or ``;``; ``#`` starts a comment.
Expressions use rationals, variables ``v1..vN``, ``+ - * / ^`` and
parentheses, with ``^`` binding tightest (and right-associative).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .diffpoly import DiffPoly, v
from .exact import Rational

__all__ = ["PotentialParseError", "ParsedPotential", "parse_potential_text", "parse_expression"]


class PotentialParseError(ValueError):
    def __init__(self, message: str, position: int | None = None, line: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}, "
        if position is not None:
            where += f"column {position + 1}: "
        super().__init__(where + message)
        self.position = position
        self.line = line


@dataclass(frozen=True)
class ParsedPotential:
    N: int
    F: DiffPoly


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>v\d+)|(?P<op>[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise PotentialParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, n_vars: int | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.n_vars = n_vars

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str) -> None:
        kind, val, pos = self.take()
        if val != value:
            raise PotentialParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> DiffPoly:
        out = self.sum()
        kind, val, pos = self.peek()
        if kind != "end":
            raise PotentialParseError(f"unexpected {val!r}", pos)
        return out

    def sum(self) -> DiffPoly:
        out = self.product()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.product()
            out = out + rhs if op == "+" else out - rhs
        return out

    def product(self) -> DiffPoly:
        out = self.unary()
        while self.peek()[1] in ("*", "/"):
            op, pos = self.take()[1:]
            rhs = self.unary()
            if op == "*":
                out = out * rhs
            else:
                if not rhs.is_constant():
                    raise PotentialParseError("division is only allowed by constants", pos)
                if rhs.is_zero():
                    raise PotentialParseError("division by zero", pos)
                out = out.scale(1 / rhs.constant_value())
        return out

    def unary(self) -> DiffPoly:
        if self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            inner = self.unary()
            return -inner if op == "-" else inner
        return self.power()

    def power(self) -> DiffPoly:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            kind, val, pos = self.peek()
            if kind != "num" and val != "(":
                raise PotentialParseError("exponent must be a nonnegative integer", pos)
            exp_poly = self.power()
            if not exp_poly.is_constant() or exp_poly.constant_value().denominator != 1 or exp_poly.constant_value() < 0:
                raise PotentialParseError("exponent must be a nonnegative integer", pos)
            return base ** int(exp_poly.constant_value())
        return base

    def atom(self) -> DiffPoly:
        kind, val, pos = self.take()
        if kind == "num":
            return DiffPoly.const(Rational(int(val)))
        if kind == "var":
            idx = int(val[1:])
            if idx < 1 or (self.n_vars is not None and idx > self.n_vars):
                raise PotentialParseError(f"variable {val} outside v1..v{self.n_vars}", pos)
            return v(idx, 0)
        if val == "(":
            out = self.sum()
            self.expect(")")
            return out
        raise PotentialParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse_expression(text: str, n_vars: int | None = None) -> DiffPoly:
    """Parse a polynomial expression in ``v1..vN`` into a DiffPoly of order-0 jets."""
    return _Parser(text, n_vars).parse()


def parse_potential_text(text: str) -> ParsedPotential:
    statements: list[tuple[int, int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        offset = 0
        for part in line.split(";"):
            if part.strip():
                statements.append((lineno, offset, part))
            offset += len(part) + 1
    n_vars = None
    f_text = None
    for lineno, offset, stmt in statements:
        if "=" not in stmt:
            raise PotentialParseError(f"expected 'name = value', got {stmt.strip()!r}", offset, lineno)
        name, value = stmt.split("=", 1)
        name = name.strip()
        value_offset = offset + len(name) + 1 + (len(stmt.split("=", 1)[0]) - len(name))
        if name == "N":
            if n_vars is not None:
                raise PotentialParseError("N given twice", offset, lineno)
            if not value.strip().isdigit() or int(value) < 1:
                raise PotentialParseError("N must be a positive integer", value_offset, lineno)
            n_vars = int(value)
        elif name == "F":
            if f_text is not None:
                raise PotentialParseError("F given twice", offset, lineno)
            f_text = (lineno, value_offset, value)
        else:
            raise PotentialParseError(f"unknown field {name!r}", offset, lineno)
    if n_vars is None:
        raise PotentialParseError("missing 'N = <int>'")
    if f_text is None:
        raise PotentialParseError("missing 'F = <expr>'")
    lineno, value_offset, value = f_text
    try:
        poly = parse_expression(value, n_vars)
    except PotentialParseError as exc:
        pos = None if exc.position is None else exc.position + value_offset
        raise PotentialParseError(str(exc).split(": ", 1)[-1], pos, lineno) from None
    return ParsedPotential(n_vars, poly)

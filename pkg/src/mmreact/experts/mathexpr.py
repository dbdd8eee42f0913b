"""Exact rational arithmetic for the math expert.

A recursive-descent parser over +, -, *, / (with the unicode multiply and
divide signs as aliases), parentheses, unary minus, and integer/decimal
literals. Evaluation is exact over rationals; only the final rendering
rounds, to at most 10 significant digits with trailing zeros trimmed, so
results are bit-stable across runs and platforms.

Grammar:
    expression := term (("+" | "-") term)*
    term       := unary (("*" | "/") unary)*
    unary      := "-" unary | atom
    atom       := NUMBER | "(" expression ")"
"""

from __future__ import annotations

import re
from decimal import Decimal, localcontext
from fractions import Fraction

from ..errors import DivisionByZeroError, ExpressionParseError

_TOKEN_RE = re.compile(r"\s*(?:(\d+\.\d+|\d+|\.\d+)|([()+\-*/×÷]))")

_ALIASES = {"×": "*", "÷": "/"}

_SIGNIFICANT_DIGITS = 10


def _tokenize(expression: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(expression):
        match = _TOKEN_RE.match(expression, pos)
        if match is None:
            if expression[pos:].strip():
                raise ExpressionParseError(f"unexpected character at position {pos}: {expression[pos:].strip()[0]!r}")
            break
        number, operator = match.groups()
        tokens.append(number if number is not None else _ALIASES.get(operator, operator))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        token = self.peek()
        if token is None:
            raise ExpressionParseError("unexpected end of expression")
        self.pos += 1
        return token

    def expression(self) -> Fraction:
        value = self.term()
        while self.peek() in ("+", "-"):
            if self.take() == "+":
                value += self.term()
            else:
                value -= self.term()
        return value

    def term(self) -> Fraction:
        value = self.unary()
        while self.peek() in ("*", "/"):
            operator = self.take()
            right = self.unary()
            if operator == "*":
                value *= right
            else:
                if right == 0:
                    raise DivisionByZeroError("division by zero")
                value /= right
        return value

    def unary(self) -> Fraction:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        return self.atom()

    def atom(self) -> Fraction:
        token = self.take()
        if token == "(":
            value = self.expression()
            if self.peek() != ")":
                raise ExpressionParseError("missing closing parenthesis")
            self.take()
            return value
        if token[0].isdigit() or token[0] == ".":
            return Fraction(token)
        raise ExpressionParseError(f"unexpected token: {token!r}")


def evaluate(expression: str) -> Fraction:
    """Parse and evaluate to an exact rational."""
    tokens = _tokenize(expression)
    if not tokens:
        raise ExpressionParseError("empty expression")
    parser = _Parser(tokens)
    value = parser.expression()
    if parser.peek() is not None:
        raise ExpressionParseError(f"trailing input at token {parser.pos}: {parser.peek()!r}")
    return value


def render(value: Fraction) -> str:
    """Render a rational as a decimal string, <= 10 significant digits, no trailing zeros."""
    with localcontext() as context:
        context.prec = _SIGNIFICANT_DIGITS
        quotient = (Decimal(value.numerator) / Decimal(value.denominator)).normalize()
    return format(quotient, "f")


def eval_math(expression: str) -> str:
    return render(evaluate(expression))

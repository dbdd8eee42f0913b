import random
from fractions import Fraction

import pytest

from mmreact.errors import DivisionByZeroError, ExpressionParseError
from mmreact.experts import mathexpr


def test_receipt_sum():
    # oracle: exact rational summation, rendered the same way
    oracle = sum(Fraction(x) for x in ("12.05", "23.10", "7.00", "6.35"))
    assert oracle == Fraction("48.5")
    assert mathexpr.eval_math("12.05 + 23.10 + 7.00 + 6.35") == "48.5"


def test_parenthesized():
    assert mathexpr.eval_math("2*(3+4)") == "14"


def test_division_by_zero():
    with pytest.raises(DivisionByZeroError):
        mathexpr.eval_math("1/0")


@pytest.mark.parametrize("bad", ["", "1 +", "(2", "2 + * 3", "abc", "1..2"])
def test_parse_errors(bad):
    with pytest.raises(ExpressionParseError):
        mathexpr.eval_math(bad)


def test_unary_minus_and_unicode_operators():
    assert mathexpr.eval_math("-3 + 5") == "2"
    assert mathexpr.eval_math("6 ÷ 4") == "1.5"
    assert mathexpr.eval_math("3 × -2") == "-6"


def test_precedence():
    assert mathexpr.eval_math("2 + 3 * 4") == "14"
    assert mathexpr.eval_math("2 - 3 - 4") == "-5"
    assert mathexpr.eval_math("12 / 2 / 3") == "2"


def test_significant_digit_rendering():
    assert mathexpr.eval_math("1/3") == "0.3333333333"
    assert mathexpr.eval_math("1.50 + 1.50") == "3"
    assert mathexpr.eval_math("0.1 + 0.2") == "0.3"


# -- randomized comparison against a tree-built oracle ---------------------

def _random_tree(rng, depth):
    """Build (expression string, exact value) pairs without division."""
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            value = rng.randint(0, 999)
            return str(value), Fraction(value)
        whole, frac = rng.randint(0, 99), rng.randint(0, 99)
        literal = f"{whole}.{frac:02d}"
        return literal, Fraction(literal)
    left_s, left_v = _random_tree(rng, depth - 1)
    right_s, right_v = _random_tree(rng, depth - 1)
    op = rng.choice(["+", "-", "*"])
    value = {"+": left_v + right_v, "-": left_v - right_v, "*": left_v * right_v}[op]
    return f"({left_s} {op} {right_s})", value


def test_matches_oracle_without_division():
    rng = random.Random(20240401)
    for _ in range(500):
        expression, expected = _random_tree(rng, 4)
        assert mathexpr.evaluate(expression) == expected

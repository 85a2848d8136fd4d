import math

import numpy as np
import pytest

from measure_lab.domain.exceptions import ExpressionError
from measure_lab.infrastructure.io.expressions import compile_expression


def test_density_expression_evaluates_on_arrays():
    expr = compile_expression("sin(pi*x)*sin(pi*y) + 2^2")
    x = np.array([0.5, 0.25])
    y = np.array([0.5, 0.5])
    assert np.allclose(expr(x, y), [5.0, 4.0 + math.sqrt(0.5)])


def test_constant_expression_broadcasts():
    expr = compile_expression("3")
    values = expr(np.zeros((2, 3)), np.zeros((2, 3)))
    assert values.shape == (2, 3)
    assert np.all(values == 3.0)


def test_nonlinearity_expression_and_derivative():
    expr = compile_expression("-u^3", ("x", "y", "u"))
    assert expr(0.0, 0.0, 2.0) == pytest.approx(-8.0)
    assert expr.derivative("u")(0.0, 0.0, 2.0) == pytest.approx(-12.0)


def test_power_operator_spellings_agree():
    first = compile_expression("x**2 + abs(y)")
    second = compile_expression("x^2 + abs(y)")
    assert first(3.0, -1.0) == second(3.0, -1.0) == 10.0


@pytest.mark.parametrize(
    "text",
    ["", "   ", "z + 1", "__import__('os')", "x; y", "sqrt(x)", "(x + 1", "x + 1)", "x +* 2"],
)
def test_invalid_expressions_are_rejected(text):
    with pytest.raises(ExpressionError):
        compile_expression(text)


def test_u_is_not_in_scope_for_densities():
    with pytest.raises(ExpressionError):
        compile_expression("exp(u)")

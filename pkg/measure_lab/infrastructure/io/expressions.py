"""Expression grammar for densities, shifts and custom nonlinearities.

Grammar: decimal constants, the constant pi, the variables in scope
(x, y and, for nonlinearities, u), the operators + - * / ^ ** and
parentheses, and the functions exp, log, sin, cos, abs. Anything else is
rejected before sympy sees the text.
"""

import re
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np
import sympy
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from ...domain.exceptions import ExpressionError

FUNCTIONS: Dict[str, object] = {
    "exp": sympy.exp,
    "log": sympy.log,
    "sin": sympy.sin,
    "cos": sympy.cos,
    "abs": sympy.Abs,
}
CONSTANTS: Dict[str, object] = {"pi": sympy.pi}

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)


def _check_tokens(text: str, variables: Sequence[str]) -> None:
    allowed = set(variables) | set(FUNCTIONS) | set(CONSTANTS)
    position = 0
    depth = 0
    text = text.rstrip()
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None or match.end() == position:
            bad = text[position:].lstrip()[:1]
            raise ExpressionError(f"unexpected character {bad!r} in {text!r}")
        name = match.group("name")
        if name is not None and name not in allowed:
            raise ExpressionError(f"unknown name {name!r} in {text!r}; allowed: {sorted(allowed)}")
        op = match.group("op")
        if op == "(":
            depth += 1
        elif op == ")":
            depth -= 1
            if depth < 0:
                raise ExpressionError(f"unbalanced parentheses in {text!r}")
        position = match.end()
    if depth != 0:
        raise ExpressionError(f"unbalanced parentheses in {text!r}")


@dataclass(frozen=True)
class CompiledExpression:
    """A parsed expression with a numpy evaluator."""

    text: str
    variables: Tuple[str, ...]
    expression: sympy.Expr
    evaluator: Callable

    def __call__(self, *args: np.ndarray) -> np.ndarray:
        shape = np.broadcast(*args).shape
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            values = np.asarray(self.evaluator(*args), dtype=float)
        return np.broadcast_to(values, shape).astype(float)

    def derivative(self, variable: str) -> "CompiledExpression":
        """Symbolic partial derivative with respect to variable."""
        symbol = _symbols(self.variables)[variable]
        derived = sympy.diff(self.expression, symbol)
        return _compile(f"d({self.text})/d{variable}", self.variables, derived)


def _symbols(variables: Sequence[str]) -> Dict[str, sympy.Symbol]:
    return {name: sympy.Symbol(name, real=True) for name in variables}


def _compile(text: str, variables: Tuple[str, ...], expression: sympy.Expr) -> CompiledExpression:
    symbols = _symbols(variables)
    evaluator = sympy.lambdify([symbols[v] for v in variables], expression, modules="numpy")
    return CompiledExpression(text, variables, expression, evaluator)


def compile_expression(text: str, variables: Sequence[str] = ("x", "y")) -> CompiledExpression:
    """Parse text under the documented grammar.

    Raises:
        ExpressionError: For empty text, unknown names, bad characters or syntax errors
    """
    if not text or not text.strip():
        raise ExpressionError("expression is empty")
    variables = tuple(variables)
    _check_tokens(text, variables)
    local_dict: Dict[str, object] = dict(_symbols(variables))
    local_dict.update(FUNCTIONS)
    local_dict.update(CONSTANTS)
    try:
        expression = parse_expr(
            text.replace("^", "**"),
            local_dict=local_dict,
            transformations=standard_transformations,
        )
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as e:
        raise ExpressionError(f"cannot parse {text!r}: {e}") from e
    if not isinstance(expression, sympy.Expr):
        raise ExpressionError(f"{text!r} is not an arithmetic expression")
    free = {str(s) for s in expression.free_symbols}
    if not free <= set(variables):
        raise ExpressionError(f"{text!r} uses symbols outside {variables}")
    return _compile(text, variables, expression)

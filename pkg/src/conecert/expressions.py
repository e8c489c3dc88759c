"""Tiny arithmetic formula language used by problem files.

Nonlinearity pieces, weights and discontinuity curves are written as small
formulas over named variables, e.g. ``81`` or ``exp(-u) * (1 + t)``, with
region predicates such as ``u >= 1.15 and t < 0.5``.  The grammar is
deliberately minimal: numbers, the declared variable names, ``+ - * / **``,
unary minus, and the functions ``exp``, ``log``, ``abs``, ``min``, ``max``.
Predicates add the comparisons ``< <= > >= ==`` and conjunction (``and`` or
``&``).

Formulas are parsed with the stdlib ``ast`` module and compiled into
closures over numpy primitives, so they evaluate on scalars and arrays
alike.  Nothing is ever passed to ``eval``.
"""

from __future__ import annotations

import ast
import functools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ExpressionError

__all__ = ["Expr", "parse_expression", "parse_predicate"]


def _nary_min(*args):
    return functools.reduce(np.minimum, args)


def _nary_max(*args):
    return functools.reduce(np.maximum, args)


_FUNCTIONS = {
    "exp": (np.exp, 1, 1),
    "log": (np.log, 1, 1),
    "abs": (np.abs, 1, 1),
    "min": (_nary_min, 2, None),
    "max": (_nary_max, 2, None),
}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.true_divide,
    ast.Pow: np.power,
}

_COMPARES = {
    ast.Lt: np.less,
    ast.LtE: np.less_equal,
    ast.Gt: np.greater,
    ast.GtE: np.greater_equal,
    ast.Eq: np.equal,
}


@dataclass(frozen=True)
class Expr:
    """A compiled formula.  Call with keyword arguments, one per variable."""

    text: str
    variables: tuple[str, ...]
    is_predicate: bool
    _fn: Callable = field(repr=False, compare=False)

    def __call__(self, **values):
        missing = [v for v in self.variables if v not in values]
        if missing:
            raise ExpressionError(
                f"formula {self.text!r} needs variables {missing}"
            )
        with np.errstate(all="ignore"):
            return self._fn(values)


def _build(node: ast.AST, variables: tuple[str, ...], text: str):
    """Recursively compile an AST node to ``env -> value``."""
    if isinstance(node, ast.Expression):
        return _build(node.body, variables, text)

    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ExpressionError(f"unsupported constant {node.value!r} in {text!r}")
        value = float(node.value)
        return lambda env: value

    if isinstance(node, ast.Name):
        if node.id not in variables:
            raise ExpressionError(
                f"unknown name {node.id!r} in {text!r}; allowed: {variables}"
            )
        name = node.id
        return lambda env: env[name]

    if isinstance(node, ast.UnaryOp):
        operand = _build(node.operand, variables, text)
        if isinstance(node.op, ast.USub):
            return lambda env: np.negative(operand(env))
        if isinstance(node.op, ast.UAdd):
            return operand
        raise ExpressionError(f"unsupported unary operator in {text!r}")

    if isinstance(node, ast.BinOp):
        op_type = type(node.op)
        left = _build(node.left, variables, text)
        right = _build(node.right, variables, text)
        if op_type in _BINOPS:
            op = _BINOPS[op_type]
            return lambda env: op(left(env), right(env))
        if op_type is ast.BitAnd:
            return lambda env: np.logical_and(left(env), right(env))
        raise ExpressionError(f"unsupported operator in {text!r}")

    if isinstance(node, ast.BoolOp):
        if not isinstance(node.op, ast.And):
            raise ExpressionError(f"only 'and' is supported in {text!r}")
        parts = [_build(v, variables, text) for v in node.values]
        return lambda env: functools.reduce(
            np.logical_and, (p(env) for p in parts)
        )

    if isinstance(node, ast.Compare):
        if len(node.ops) != 1:
            raise ExpressionError(
                f"chained comparisons are not supported in {text!r}; "
                "write explicit conjunctions instead"
            )
        op_type = type(node.ops[0])
        if op_type not in _COMPARES:
            raise ExpressionError(f"unsupported comparison in {text!r}")
        cmp = _COMPARES[op_type]
        left = _build(node.left, variables, text)
        right = _build(node.comparators[0], variables, text)
        return lambda env: cmp(left(env), right(env))

    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ExpressionError(f"unsupported function call in {text!r}")
        if node.keywords:
            raise ExpressionError(f"keyword arguments not supported in {text!r}")
        fn, lo, hi = _FUNCTIONS[node.func.id]
        if len(node.args) < lo or (hi is not None and len(node.args) > hi):
            raise ExpressionError(
                f"{node.func.id} takes {lo}{'+' if hi is None else ''} "
                f"argument(s) in {text!r}"
            )
        args = [_build(a, variables, text) for a in node.args]
        return lambda env: fn(*(a(env) for a in args))

    raise ExpressionError(f"unsupported syntax in {text!r}")


def _contains_predicate(node: ast.AST) -> bool:
    return any(
        isinstance(n, (ast.Compare, ast.BoolOp))
        or (isinstance(n, ast.BinOp) and isinstance(n.op, ast.BitAnd))
        for n in ast.walk(node)
    )


def _parse(text: str, variables: tuple[str, ...]) -> tuple[Callable, bool]:
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    return _build(tree, variables, text), _contains_predicate(tree)


def parse_expression(text: str, variables: tuple[str, ...] = ("t", "u")) -> Expr:
    """Compile a numeric formula; rejects predicates."""
    fn, is_pred = _parse(text, variables)
    if is_pred:
        raise ExpressionError(f"{text!r} is a predicate, expected a numeric formula")
    return Expr(text=text, variables=variables, is_predicate=False, _fn=fn)


def parse_predicate(text: str, variables: tuple[str, ...] = ("t", "u")) -> Expr:
    """Compile a boolean region predicate; rejects bare numeric formulas."""
    fn, is_pred = _parse(text, variables)
    if not is_pred:
        raise ExpressionError(f"{text!r} is not a predicate (no comparison found)")
    return Expr(text=text, variables=variables, is_predicate=True, _fn=fn)

"""Tiny whitelisted arithmetic-expression evaluator for user potentials.

Expressions are parsed with `ast`, checked against a whitelist of node
types, names and functions, then compiled and evaluated with numpy
semantics.  Available variables: t, u1..uN, r (= |u|), plus pi, e and
the period symbol T.
"""

from __future__ import annotations

import ast

import numpy as np

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "exp": np.exp,
    "log": np.log,
    "log1p": np.log1p,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "atan": np.arctan,
    "sign": np.sign,
}

_CONSTANTS = {"pi": np.pi, "e": np.e}

_ALLOWED_NODES = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.Mod,
    ast.USub,
    ast.UAdd,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
)


class ExpressionError(ValueError):
    pass


def compile_expression(text: str, variables: tuple[str, ...]):
    """Compile `text` to a callable taking keyword arrays for `variables`."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression {text!r}: {exc.msg}") from None
    names = set(variables) | set(_CONSTANTS)
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ExpressionError(
                f"disallowed syntax {type(node).__name__!r} in expression {text!r}"
            )
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
                raise ExpressionError(f"disallowed function call in expression {text!r}")
            if node.keywords:
                raise ExpressionError("keyword arguments are not allowed in expressions")
        if isinstance(node, ast.Name) and node.id not in names and node.id not in _FUNCTIONS:
            raise ExpressionError(f"unknown name {node.id!r} in expression {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ExpressionError(f"non-numeric constant in expression {text!r}")
    code = compile(tree, "<expression>", "eval")

    def evaluate(**env):
        scope = dict(_CONSTANTS)
        scope.update(_FUNCTIONS)
        scope.update(env)
        return eval(code, {"__builtins__": {}}, scope)  # noqa: S307 - AST whitelisted

    return evaluate


def potential_environment(t: np.ndarray, u: np.ndarray, period: float) -> dict:
    u = np.atleast_2d(u)
    env = {"t": np.asarray(t, dtype=float), "T": period, "r": np.linalg.norm(u, axis=1)}
    for comp in range(u.shape[1]):
        env[f"u{comp + 1}"] = u[:, comp]
    return env


def expression_variables(dim: int) -> tuple[str, ...]:
    return ("t", "T", "r") + tuple(f"u{i + 1}" for i in range(dim))

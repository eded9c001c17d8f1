"""Safe arithmetic expressions in x1, x2 (and E for closed-form densities).

Configs carry boundary data and weights as plain text like ``7.12 * x1`` or
``sin(x1) * cos(x2)``.  Only arithmetic, powers and a small function whitelist
are accepted; anything else is rejected at parse time.
"""

from __future__ import annotations

import ast

import numpy as np

from .errors import ConfigError

_FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
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
    ast.USub,
    ast.UAdd,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
)


class Expr:
    """Compiled expression; evaluates vectorized over numpy arrays."""

    def __init__(self, text: str, variables: tuple[str, ...] = ("x1", "x2")):
        self.text = str(text)
        self.variables = tuple(variables)
        tree = ast.parse(self.text, mode="eval")
        for node in ast.walk(tree):
            if not isinstance(node, _ALLOWED_NODES):
                raise ConfigError(
                    [f"expression {self.text!r}: disallowed syntax {type(node).__name__}"]
                )
            if isinstance(node, ast.Call):
                if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
                    raise ConfigError(
                        [f"expression {self.text!r}: only {sorted(_FUNCTIONS)} may be called"]
                    )
            if isinstance(node, ast.Name):
                if node.id not in self.variables and node.id not in _FUNCTIONS and node.id not in _CONSTANTS:
                    raise ConfigError(
                        [f"expression {self.text!r}: unknown name {node.id!r}"]
                    )
            if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
                raise ConfigError(
                    [f"expression {self.text!r}: non-numeric constant {node.value!r}"]
                )
        self._code = compile(tree, "<plimit-expr>", "eval")

    def __call__(self, **kwargs):
        namespace = dict(_FUNCTIONS)
        namespace.update(_CONSTANTS)
        for name in self.variables:
            if name not in kwargs:
                raise ConfigError([f"expression {self.text!r}: missing variable {name!r}"])
            namespace[name] = kwargs[name]
        out = eval(self._code, {"__builtins__": {}}, namespace)
        return np.asarray(out, dtype=float)

    def __repr__(self):
        return f"Expr({self.text!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and other.text == self.text and other.variables == self.variables


def as_point_function(spec, variables=("x1", "x2")):
    """Turn a constant, expression text, Expr or callable into f(points) -> array.

    ``points`` is an (n, 2) array; the result has shape (n,).
    """
    if callable(spec) and not isinstance(spec, Expr):
        return lambda pts: np.broadcast_to(
            np.asarray(spec(pts), dtype=float), (np.asarray(pts).shape[0],)
        ).copy()
    if isinstance(spec, (int, float)):
        value = float(spec)
        return lambda pts: np.full(np.asarray(pts).shape[0], value)
    expr = spec if isinstance(spec, Expr) else Expr(str(spec), variables)
    return lambda pts: np.broadcast_to(
        expr(x1=np.asarray(pts)[:, 0], x2=np.asarray(pts)[:, 1]),
        (np.asarray(pts).shape[0],),
    ).copy()

"""Safe arithmetic expressions in one variable, compiled to numpy callables."""

from __future__ import annotations

import ast
import operator

import numpy as np

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "abs": np.abs, "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh, "arctan": np.arctan,
    "arcsin": np.arcsin, "arccos": np.arccos,
}
_CONSTS = {"pi": np.pi, "e": np.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}


def compile_expression(text: str, variable: str = "theta"):
    """Compile ``text`` into ``f(x)`` where ``x`` is bound to ``variable``.

    Only numbers, ``pi``, ``e``, the variable, ``+ - * / **`` and a fixed set
    of numpy functions are allowed; anything else raises ``ValueError``.
    """
    if isinstance(text, (int, float)):
        text = repr(float(text))
    try:
        tree = ast.parse(str(text), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {text!r}: {exc.msg}") from None

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            c = float(node.value)
            return lambda x: c + 0.0 * x
        if isinstance(node, ast.Name):
            if node.id == variable:
                return lambda x: x
            if node.id in _CONSTS:
                c = _CONSTS[node.id]
                return lambda x: c + 0.0 * x
            raise ValueError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op, l, r = _BINOPS[type(node.op)], build(node.left), build(node.right)
            return lambda x: op(l(x), r(x))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            op, a = _UNOPS[type(node.op)], build(node.operand)
            return lambda x: op(a(x))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
            if len(node.args) != 1 or node.keywords:
                raise ValueError(f"{node.func.id} takes one argument")
            fn, a = _FUNCS[node.func.id], build(node.args[0])
            return lambda x: fn(a(x))
        raise ValueError(f"unsupported syntax in {text!r}")

    body = build(tree)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        out = body(x)
        return float(out) if out.ndim == 0 else out

    evaluate.source = str(text)
    return evaluate

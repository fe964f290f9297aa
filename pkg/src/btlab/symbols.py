"""Symbol catalog and a small safe expression language over z, zb.

Expressions evaluate on numpy arrays and on ``numkit.Jet`` alike, so the same
symbol feeds quadrature, kernels and Taylor jets.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numkit as nk


class SymbolError(Exception):
    pass


CATALOG = {
    "1": "1",
    "x1": "(z + zb) / (1 + z*zb)",
    "x2": "-1j*(z - zb) / (1 + z*zb)",
    "x3": "(1 - z*zb) / (1 + z*zb)",
}

_FUNCS = {"log": nk.log, "exp": nk.exp, "sqrt": nk.sqrt, "sin": nk.sin, "cos": nk.cos}
_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b,
           ast.Mult: lambda a, b: a * b, ast.Div: lambda a, b: a / b,
           ast.Pow: lambda a, b: a ** b}


def _check(node, allowed_names):
    for sub in ast.walk(node):
        if isinstance(sub, ast.Name) and sub.id not in allowed_names and sub.id not in _FUNCS:
            raise SymbolError(f"unknown name {sub.id!r} in symbol expression")
        if isinstance(sub, (ast.Attribute, ast.Subscript, ast.Lambda, ast.Dict, ast.List)):
            raise SymbolError(f"construct {type(sub).__name__} not allowed in symbol expression")


def _eval(node, env):
    if isinstance(node, ast.Expression):
        return _eval(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left, right = _eval(node.left, env), _eval(node.right, env)
        if isinstance(node.op, ast.Pow) and isinstance(right, float) and right.is_integer():
            right = int(right)
        return _BINOPS[type(node.op)](left, right)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise SymbolError(f"{node.func.id} takes one argument")
        return _FUNCS[node.func.id](_eval(node.args[0], env))
    raise SymbolError(f"unsupported expression element {ast.dump(node)[:40]}")


@dataclass(frozen=True)
class Symbol:
    name: str
    expr: str
    fn: Callable
    real: bool

    def __call__(self, z, zb):
        return self.fn(z, zb)

    def on_grid(self, nodes):
        nodes = np.asarray(nodes, dtype=complex)
        v = self.fn(nodes, np.conj(nodes))
        v = np.broadcast_to(np.asarray(v, dtype=complex), nodes.shape)
        return v.real.copy() if self.real else v.copy()


def compile_expr(expr, name=None):
    """Compile an expression in z, zb, x1, x2, x3 (``^`` accepted as power)."""
    text = str(expr).replace("^", "**")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise SymbolError(f"cannot parse symbol expression {expr!r}: {exc.msg}") from None
    _check(tree, {"z", "zb", "x1", "x2", "x3", "i", "I"})
    base = {key: ast.parse(CATALOG[key], mode="eval") for key in ("x1", "x2", "x3")}

    def fn(z, zb):
        env = {"z": z, "zb": zb, "i": 1j, "I": 1j}
        for key, t in base.items():
            env[key] = _eval(t, env)
        out = _eval(tree, env)
        # constants still need the argument's shape or jet structure
        return out + 0 * z if not isinstance(out, (nk.Jet, nk.GridDual)) else out

    rng = np.random.default_rng(12345)
    pts = rng.normal(size=8) + 1j * rng.normal(size=8)
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(pts, np.conj(pts)), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise SymbolError(f"symbol {expr!r} is not finite at generic points")
    real = bool(np.max(np.abs(vals.imag)) <= 1e-12 * max(1.0, np.max(np.abs(vals))))
    return Symbol(name or str(expr), str(expr), fn, real)


def get_symbol(spec):
    """Resolve a catalog name or an expression into a Symbol."""
    if isinstance(spec, Symbol):
        return spec
    key = str(spec).strip()
    if key in CATALOG:
        return compile_expr(CATALOG[key], key)
    return compile_expr(key, key)


def catalog_lines():
    return [f"{name}: {CATALOG[name]}" for name in sorted(CATALOG)]

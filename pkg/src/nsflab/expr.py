"""Load-time parser for molecular pressure laws P(Z).

Custom gas models supply P as a short arithmetic expression in the single
variable Z: `+`, `-`, `*`, `/`, powers (`**` or `^`) and rational constants.
The string is parsed once, restricted to that grammar, differentiated
symbolically, and compiled to vectorized numpy callables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy
from sympy.parsing.sympy_parser import parse_expr


class ExpressionError(ValueError):
    """The pressure-law expression falls outside the supported grammar."""


_Z = sympy.Symbol("Z", positive=True)

# Node types reachable from +, -, *, /, powers and rational constants.
_ALLOWED_NODES = (
    sympy.Symbol,
    sympy.Add,
    sympy.Mul,
    sympy.Pow,
    sympy.Integer,
    sympy.Rational,
    sympy.Float,
)

_ALLOWED_CHARS = set("0123456789.+-*/^() Z\t")

# parse_expr compiles to calls of these constructors; the character whitelist
# already guarantees no other names can appear in the source
_PARSE_GLOBALS = {
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
}


def _validate_tree(expr: sympy.Expr, text: str) -> None:
    for node in sympy.preorder_traversal(expr):
        if not isinstance(node, _ALLOWED_NODES):
            raise ExpressionError(
                f"disallowed construct {type(node).__name__} in pressure law {text!r}"
            )
        if isinstance(node, sympy.Symbol) and node != _Z:
            raise ExpressionError(f"unknown identifier {node} in pressure law {text!r}")


def _compile(expr: sympy.Expr) -> Callable[[np.ndarray], np.ndarray]:
    fn = sympy.lambdify(_Z, expr, modules="numpy")

    def wrapped(z):
        z = np.asarray(z, dtype=float)
        out = fn(z)
        # constants lambdify to scalars regardless of input shape
        return np.broadcast_to(np.asarray(out, dtype=float), z.shape).copy() if np.shape(out) != z.shape else np.asarray(out, dtype=float)

    return wrapped


@dataclass(frozen=True)
class PressureLaw:
    """A parsed P(Z): callables for P and P' plus the source text."""

    text: str
    P: Callable[[np.ndarray], np.ndarray]
    dP: Callable[[np.ndarray], np.ndarray]
    sym: sympy.Expr

    def __repr__(self) -> str:  # keep model reprs readable in reports
        return f"PressureLaw({self.text!r})"


def parse_pressure_law(text: str) -> PressureLaw:
    """Parse an expression in Z into (P, dP) numpy callables.

    Raises ExpressionError for anything outside the grammar: unknown names,
    function calls, non-rational syntax.
    """
    bad = set(text) - _ALLOWED_CHARS
    if bad:
        raise ExpressionError(f"disallowed characters {sorted(bad)} in pressure law {text!r}")
    source = text.replace("^", "**")
    try:
        expr = parse_expr(source, local_dict={"Z": _Z}, global_dict=dict(_PARSE_GLOBALS), evaluate=True)
    except Exception as err:
        raise ExpressionError(f"cannot parse pressure law {text!r}: {err}") from err
    if not isinstance(expr, sympy.Expr):
        raise ExpressionError(f"pressure law {text!r} is not a scalar expression")
    _validate_tree(expr, text)
    dexpr = sympy.diff(expr, _Z)
    return PressureLaw(text=text, P=_compile(expr), dP=_compile(dexpr), sym=expr)

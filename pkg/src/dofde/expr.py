"""Small arithmetic expression language for problem files.

Supports numbers, ``+ - * / **`` (``^`` is accepted for powers), unary
minus, the constants ``pi`` and ``e``, and the functions ``exp``, ``ln``
(alias ``log``), ``sqrt`` and ``gamma``. Anything else is rejected before
compilation.
"""

from __future__ import annotations

import ast
import math

from .special import gamma

FUNCTIONS = {"exp": math.exp, "ln": math.log, "log": math.log, "sqrt": math.sqrt, "gamma": gamma}
CONSTANTS = {"pi": math.pi, "e": math.e}

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


class ExpressionError(ValueError):
    pass


class _Check(ast.NodeTransformer):
    def __init__(self, variables):
        self.variables = set(variables)

    def visit_BinOp(self, node):
        node.left = self.visit(node.left)
        node.right = self.visit(node.right)
        if not isinstance(node.op, _BINOPS):
            raise ExpressionError(f"operator {type(node.op).__name__} is not allowed")
        return node

    def visit_UnaryOp(self, node):
        node.operand = self.visit(node.operand)
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ExpressionError(f"operator {type(node.op).__name__} is not allowed")
        return node

    def visit_Call(self, node):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            raise ExpressionError(f"unknown function in {ast.unparse(node)!r}")
        if node.keywords or len(node.args) != 1:
            raise ExpressionError(f"{node.func.id} takes exactly one argument")
        node.args = [self.visit(a) for a in node.args]
        return node

    def visit_Name(self, node):
        if node.id not in self.variables and node.id not in CONSTANTS:
            allowed = ", ".join(sorted(self.variables)) or "none"
            raise ExpressionError(f"unknown name {node.id!r} (variables here: {allowed})")
        return node

    def visit_Constant(self, node):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ExpressionError(f"constant {node.value!r} is not a number")
        return node

    def visit_Expression(self, node):
        node.body = self.visit(node.body)
        return node

    def generic_visit(self, node):
        raise ExpressionError(f"syntax element {type(node).__name__} is not allowed")


def compile_expression(text: str, variables=("t",)):
    """Compile ``text`` into a function of ``variables`` (positional, in order)."""
    try:
        # rewrite ^ before parsing so it gets the precedence of **
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    tree = ast.fix_missing_locations(_Check(variables).visit(tree))
    code = compile(tree, "<expression>", "eval")
    scope = {"__builtins__": {}, **FUNCTIONS, **CONSTANTS}
    names = tuple(variables)

    def fn(*args):
        if len(args) != len(names):
            raise TypeError(f"expression expects {len(names)} arguments ({', '.join(names)})")
        return float(eval(code, scope, dict(zip(names, args))))

    fn.source = text
    return fn

"""Scalar coefficient expressions in ``t`` and ``zeta``.

Expressions define the Hamiltonian density, the perturbation and the initial
data of a system. The grammar, loosest binding first::

    sum        :: product [ ('+' | '-') product ]*
    product    :: negation [ ('*' | '/') negation ]*
    negation   :: '-' negation | power
    power      :: atom [ '^' atom ]*
    atom       :: number | 't' | 'zeta' | 'pi' | call | piecewise | '(' sum ')'
    call       :: name '(' sum [ ',' sum ]* ')'
    piecewise  :: 'piecewise' '(' branch [ ';' branch ]* ';' sum ')'
    branch     :: sum ('<' | '<=' | '>' | '>=' | '==' | '!=') sum ':' sum

All binary operators are left associative, ``^`` included. Piecewise branches
are tried left to right and the first matching condition wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Tuple, Union
import math

import numpy as np
import pyparsing as pp

pp.ParserElement.enable_packrat()

VARIABLES = ("t", "zeta")

CONSTANTS = {"pi": math.pi}

# name -> (arity, vectorised implementation)
FUNCTIONS = {
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "exp": (1, np.exp),
    "sqrt": (1, np.sqrt),
    "abs": (1, np.abs),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}

_COMPARISONS = {
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
    "==": np.equal,
    "!=": np.not_equal,
}


class ExpressionSyntaxError(ValueError):
    """Raised for malformed sources, unknown names and arity mismatches."""

    def __init__(self, reason: str, offset: int = 0, expected: str = None):
        self.reason = reason
        self.offset = offset
        self.expected = expected
        message = "%s at byte %d" % (reason, offset)
        if expected:
            message = "%s (%s)" % (message, expected)
        super().__init__(message)


class ExpressionEvaluationError(ArithmeticError):
    def __init__(self, reason: str, node: "Node"):
        self.reason = reason
        self.subexpression = node.to_source()
        super().__init__("%s in '%s'" % (reason, self.subexpression))


class Node:
    __slots__ = ()

    def children(self) -> Tuple["Node", ...]:
        return ()

    def to_source(self) -> str:
        raise NotImplementedError

    def _eval(self, t: np.ndarray, zeta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, t, zeta):
        return evaluate(self, t, zeta)

    def __str__(self) -> str:
        return self.to_source()


def _finite(node: Node, values: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise ExpressionEvaluationError("non-finite result", node)
    return values


@dataclass(frozen=True)
class Constant(Node):
    value: float

    def to_source(self) -> str:
        if math.isinf(self.value):
            return "(1e999)" if self.value > 0 else "(-1e999)"
        text = repr(float(self.value))
        return "(%s)" % text if self.value < 0 else text

    def _eval(self, t, zeta):
        return _finite(self, np.full(t.shape, self.value, dtype=float))


@dataclass(frozen=True)
class Var(Node):
    name: str

    def to_source(self) -> str:
        return self.name

    def _eval(self, t, zeta):
        return t if self.name == "t" else zeta


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: Node

    def children(self):
        return (self.operand,)

    def to_source(self) -> str:
        return "(%s%s)" % (self.op, self.operand.to_source())

    def _eval(self, t, zeta):
        return -self.operand._eval(t, zeta)


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)

    def to_source(self) -> str:
        return "(%s %s %s)" % (self.left.to_source(), self.op, self.right.to_source())

    def _eval(self, t, zeta):
        left = self.left._eval(t, zeta)
        right = self.right._eval(t, zeta)
        with np.errstate(all="ignore"):
            if self.op == "+":
                values = left + right
            elif self.op == "-":
                values = left - right
            elif self.op == "*":
                values = left * right
            elif self.op == "/":
                if np.any(right == 0.0):
                    raise ExpressionEvaluationError("division by zero", self)
                values = left / right
            else:
                values = np.power(left, right)
        return _finite(self, values)


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: Tuple[Node, ...]

    def children(self):
        return self.args

    def to_source(self) -> str:
        return "%s(%s)" % (self.name, ", ".join(arg.to_source() for arg in self.args))

    def _eval(self, t, zeta):
        values = [arg._eval(t, zeta) for arg in self.args]
        if self.name == "sqrt" and np.any(values[0] < 0.0):
            raise ExpressionEvaluationError("square root of a negative value", self)
        with np.errstate(all="ignore"):
            result = FUNCTIONS[self.name][1](*values)
        return _finite(self, np.asarray(result, dtype=float))


@dataclass(frozen=True)
class Comparison(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return (self.left, self.right)

    def to_source(self) -> str:
        return "%s %s %s" % (self.left.to_source(), self.op, self.right.to_source())

    def _eval(self, t, zeta):
        return _COMPARISONS[self.op](self.left._eval(t, zeta), self.right._eval(t, zeta))


@dataclass(frozen=True)
class Piecewise(Node):
    branches: Tuple[Tuple[Comparison, Node], ...]
    default: Node

    def children(self):
        nodes = []
        for condition, value in self.branches:
            nodes.extend((condition, value))
        nodes.append(self.default)
        return tuple(nodes)

    def to_source(self) -> str:
        parts = [
            "%s : %s" % (condition.to_source(), value.to_source())
            for condition, value in self.branches
        ]
        parts.append(self.default.to_source())
        return "piecewise(%s)" % " ; ".join(parts)

    def _eval(self, t, zeta):
        values = np.empty(t.shape, dtype=float)
        pending = np.ones(t.shape, dtype=bool)
        # a branch value is only evaluated where it is selected
        for condition, value in self.branches:
            if not pending.any():
                break
            candidates = np.flatnonzero(pending)
            chosen = candidates[condition._eval(t[candidates], zeta[candidates])]
            if chosen.size:
                values[chosen] = value._eval(t[chosen], zeta[chosen])
                pending[chosen] = False
        if pending.any():
            rest = np.flatnonzero(pending)
            values[rest] = self.default._eval(t[rest], zeta[rest])
        return values


ExprAst = Node


def evaluate(ast: Node, t, zeta):
    """Evaluate ``ast`` at ``(t, zeta)``; arrays broadcast against each other.

    Scalar inputs give a float, array inputs an array of the broadcast shape.
    """
    t_values, zeta_values = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(zeta, dtype=float)
    )
    shape = t_values.shape
    values = ast._eval(np.ravel(t_values), np.ravel(zeta_values))
    if shape == ():
        return float(values[0])
    return np.asarray(values, dtype=float).reshape(shape)


def to_source(ast: Node) -> str:
    return ast.to_source()


def free_variables(ast: Node) -> FrozenSet[str]:
    found = set()
    stack = [ast]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            found.add(node.name)
        stack.extend(node.children())
    return frozenset(found)


def depends_on(ast: Node, variable: str) -> bool:
    return variable in free_variables(ast)


def _byte_offset(source: str, loc: int) -> int:
    return len(source[:loc].encode("utf-8", errors="surrogatepass"))


def _make_name(source, loc, tokens):
    name = tokens[0]
    if name in VARIABLES:
        return Var(name)
    if name in CONSTANTS:
        return Constant(CONSTANTS[name])
    raise ExpressionSyntaxError(
        "unknown identifier '%s'" % name,
        _byte_offset(source, loc),
        "expected one of %s" % ", ".join(VARIABLES + tuple(CONSTANTS)),
    )


def _make_call(source, loc, tokens):
    name = tokens[0]
    args = tuple(tokens[1])
    if name not in FUNCTIONS:
        raise ExpressionSyntaxError(
            "unknown function '%s'" % name,
            _byte_offset(source, loc),
            "expected one of %s" % ", ".join(sorted(FUNCTIONS)),
        )
    arity = FUNCTIONS[name][0]
    if len(args) != arity:
        raise ExpressionSyntaxError(
            "function '%s' takes %d argument(s), got %d" % (name, arity, len(args)),
            _byte_offset(source, loc),
        )
    return Call(name, args)


def _make_comparison(tokens):
    return Comparison(tokens[1], tokens[0], tokens[2])


def _make_piecewise(tokens):
    items = list(tokens)
    branches = tuple((branch[0], branch[1]) for branch in items[:-1])
    return Piecewise(branches, items[-1])


def _fold_binary(tokens):
    items = tokens[0]
    node = items[0]
    for index in range(1, len(items), 2):
        node = Binary(items[index], node, items[index + 1])
    return node


def _make_negation(tokens):
    op, operand = tokens[0]
    return Unary(op, operand)


def _build_grammar() -> pp.ParserElement:
    expr = pp.Forward()
    lpar, rpar, comma, colon, semi = map(pp.Suppress, "(),:;")

    number = pp.Regex(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
    number.set_parse_action(lambda tokens: Constant(float(tokens[0])))
    name = pp.Word(pp.alphas + "_", pp.alphanums + "_")

    call = name + lpar + pp.Group(pp.Optional(expr + pp.ZeroOrMore(comma + expr))) + rpar
    call.set_parse_action(_make_call)

    comparison = expr + pp.one_of(list(_COMPARISONS)) + expr
    comparison.set_parse_action(_make_comparison)
    branch = pp.Group(comparison + colon + expr)
    piecewise = (
        pp.Keyword("piecewise").suppress()
        + lpar
        + branch
        + pp.ZeroOrMore(semi + branch)
        + semi
        + expr
        + rpar
    )
    piecewise.set_parse_action(_make_piecewise)

    identifier = name.copy().set_parse_action(_make_name)
    atom = piecewise | call | number | identifier

    expr <<= pp.infix_notation(
        atom,
        [
            ("^", 2, pp.OpAssoc.LEFT, _fold_binary),
            ("-", 1, pp.OpAssoc.RIGHT, _make_negation),
            (pp.one_of("* /"), 2, pp.OpAssoc.LEFT, _fold_binary),
            (pp.one_of("+ -"), 2, pp.OpAssoc.LEFT, _fold_binary),
        ],
    )
    return expr.copy().parse_with_tabs()


_GRAMMAR = _build_grammar()


def parse(source: Union[str, bytes]) -> Node:
    """Parse ``source`` into an immutable expression tree."""
    if isinstance(source, (bytes, bytearray)):
        try:
            source = bytes(source).decode("utf-8")
        except UnicodeDecodeError as err:
            raise ExpressionSyntaxError("source is not valid UTF-8", err.start) from None
    if not isinstance(source, str):
        raise TypeError("expression source must be text, got %s" % type(source).__name__)
    if not source.strip():
        raise ExpressionSyntaxError("empty expression", 0, "expected an expression")
    try:
        result = _GRAMMAR.parse_string(source, parse_all=True)
    except pp.ParseBaseException as err:
        raise ExpressionSyntaxError(
            "syntax error", _byte_offset(source, err.loc), err.msg
        ) from None
    except RecursionError:
        raise ExpressionSyntaxError("expression nested too deeply", 0) from None
    return result[0]


def parse_or_constant(value) -> Node:
    """Accept a number or an expression source, as config values do."""
    if isinstance(value, bool):
        raise TypeError("boolean is not a coefficient")
    if isinstance(value, (int, float)):
        return Constant(float(value))
    return parse(value)

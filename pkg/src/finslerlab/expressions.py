"""Polarized expression trees for complex Finsler metrics.

A metric G(z, zbar, v, vbar) is written over the 4n *independent* complex
variables z, zbar, v, vbar ("polarized form").  Conjugation is not an
expression node; consistency (zbar = conj(z), vbar = conj(v)) is a property
of evaluation points, never of the tree.  This makes every Wirtinger
derivative an ordinary partial derivative of the tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number

import numpy as np

from .errors import EvaluationDomainError, ExpressionError

SLOTS = ("z", "zbar", "v", "vbar")
CONJUGATE_SLOT = {"z": "zbar", "zbar": "z", "v": "vbar", "vbar": "v"}

#: magnitudes below this trip the division / log / fractional-power guard
DOMAIN_GUARD = 1e-13


@dataclass(frozen=True, eq=False)
class Node:
    """Base expression node.  Nodes are immutable and shareable."""

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(other, neg(self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __pow__(self, p):
        return power(self, p)

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True, eq=False)
class Var(Node):
    slot: str
    index: int  # 0-based

    def __post_init__(self):
        if self.slot not in SLOTS:
            raise ExpressionError(f"unknown slot {self.slot!r}")
        if self.index < 0:
            raise ExpressionError("variable index must be >= 0")


@dataclass(frozen=True, eq=False)
class Const(Node):
    value: complex


@dataclass(frozen=True, eq=False)
class Add(Node):
    args: tuple


@dataclass(frozen=True, eq=False)
class Mul(Node):
    args: tuple


@dataclass(frozen=True, eq=False)
class Div(Node):
    num: Node
    den: Node


@dataclass(frozen=True, eq=False)
class Pow(Node):
    """base ** (num/den) with an exact rational exponent."""

    base: Node
    num: int
    den: int

    def __post_init__(self):
        if self.den <= 0:
            raise ExpressionError("power denominator must be positive")

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.num, self.den)


@dataclass(frozen=True, eq=False)
class Sqrt(Node):
    arg: Node


@dataclass(frozen=True, eq=False)
class Exp(Node):
    arg: Node


@dataclass(frozen=True, eq=False)
class Log(Node):
    arg: Node


@dataclass(frozen=True, eq=False)
class Neg(Node):
    arg: Node


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def as_node(x) -> Node:
    if isinstance(x, Node):
        return x
    if isinstance(x, Number):
        return Const(complex(x))
    raise ExpressionError(f"cannot coerce {type(x).__name__} to an expression node")


def zvar(i: int) -> Var:
    return Var("z", i)


def zbvar(i: int) -> Var:
    return Var("zbar", i)


def vvar(i: int) -> Var:
    return Var("v", i)


def vbvar(i: int) -> Var:
    return Var("vbar", i)


def const(c) -> Const:
    return Const(complex(c))


def add(*xs) -> Node:
    flat = []
    for x in xs:
        x = as_node(x)
        if isinstance(x, Add):
            flat.extend(x.args)
        elif not (isinstance(x, Const) and x.value == 0):
            flat.append(x)
    if not flat:
        return Const(0j)
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*xs) -> Node:
    flat = []
    for x in xs:
        x = as_node(x)
        if isinstance(x, Mul):
            flat.extend(x.args)
        elif isinstance(x, Const) and x.value == 1:
            continue
        else:
            flat.append(x)
    if not flat:
        return Const(1 + 0j)
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def div(a, b) -> Node:
    return Div(as_node(a), as_node(b))


def power(x, p) -> Node:
    """x**p with integer or rational p (floats accepted when exactly rational)."""
    x = as_node(x)
    if isinstance(p, float):
        p = Fraction(p)  # exact: binary floats are rationals
    elif isinstance(p, int):
        p = Fraction(p)
    elif not isinstance(p, Fraction):
        raise ExpressionError(f"exponent must be int/float/Fraction, got {type(p).__name__}")
    if p == 1:
        return x
    if p == 0:
        return Const(1 + 0j)
    return Pow(x, p.numerator, p.denominator)


def sqrt(x) -> Node:
    return Sqrt(as_node(x))


def exp(x) -> Node:
    return Exp(as_node(x))


def log(x) -> Node:
    return Log(as_node(x))


def neg(x) -> Node:
    x = as_node(x)
    if isinstance(x, Neg):
        return x.arg
    if isinstance(x, Const):
        return Const(-x.value)
    return Neg(x)


# ---------------------------------------------------------------------------
# structural utilities
# ---------------------------------------------------------------------------

def children(node: Node) -> tuple:
    if isinstance(node, (Var, Const)):
        return ()
    if isinstance(node, (Add, Mul)):
        return node.args
    if isinstance(node, Div):
        return (node.num, node.den)
    if isinstance(node, Pow):
        return (node.base,)
    return (node.arg,)


def count_nodes(node: Node) -> int:
    """Number of distinct nodes in the DAG (shared subtrees counted once)."""
    seen = set()

    def walk(x):
        if id(x) in seen:
            return
        seen.add(id(x))
        for c in children(x):
            walk(c)

    walk(node)
    return len(seen)


def free_slots(node: Node) -> frozenset:
    slots = set()
    seen = set()

    def walk(x):
        if id(x) in seen:
            return
        seen.add(id(x))
        if isinstance(x, Var):
            slots.add(x.slot)
        for c in children(x):
            walk(c)

    walk(node)
    return frozenset(slots)


def max_index(node: Node) -> int:
    """Largest 0-based variable index appearing in the tree, or -1."""
    top = -1
    seen = set()

    def walk(x):
        nonlocal top
        if id(x) in seen:
            return
        seen.add(id(x))
        if isinstance(x, Var):
            top = max(top, x.index)
        for c in children(x):
            walk(c)

    walk(node)
    return top


def polarized_conjugate(node: Node) -> Node:
    """Structural conjugate: swap z<->zbar, v<->vbar, conjugate constants.

    At consistent points the result evaluates to the complex conjugate of the
    original expression.  Shared subtrees stay shared.
    """
    memo = {}

    def walk(x):
        out = memo.get(id(x))
        if out is not None:
            return out
        if isinstance(x, Var):
            out = Var(CONJUGATE_SLOT[x.slot], x.index)
        elif isinstance(x, Const):
            out = Const(x.value.conjugate())
        elif isinstance(x, Add):
            out = Add(tuple(walk(a) for a in x.args))
        elif isinstance(x, Mul):
            out = Mul(tuple(walk(a) for a in x.args))
        elif isinstance(x, Div):
            out = Div(walk(x.num), walk(x.den))
        elif isinstance(x, Pow):
            out = Pow(walk(x.base), x.num, x.den)
        elif isinstance(x, Sqrt):
            out = Sqrt(walk(x.arg))
        elif isinstance(x, Exp):
            out = Exp(walk(x.arg))
        elif isinstance(x, Log):
            out = Log(walk(x.arg))
        elif isinstance(x, Neg):
            out = Neg(walk(x.arg))
        else:
            raise ExpressionError(f"unknown node type {type(x).__name__}")
        memo[id(x)] = out
        return out

    return walk(node)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _guard(name, vals):
    bad = np.abs(vals) < DOMAIN_GUARD
    if np.any(bad):
        raise EvaluationDomainError(
            f"{name} near zero at {int(np.count_nonzero(bad))} evaluation point(s)"
        )


def evaluate(node: Node, z, zbar, v, vbar):
    """Evaluate a polarized expression on arrays of shape (..., n).

    The four coordinate blocks are independent; nothing assumes consistency.
    Returns an array of shape (...,) (or a scalar for 1-D inputs).
    """
    z = np.asarray(z, dtype=complex)
    zbar = np.asarray(zbar, dtype=complex)
    v = np.asarray(v, dtype=complex)
    vbar = np.asarray(vbar, dtype=complex)
    scalar = z.ndim == 1
    arrays = {"z": z, "zbar": zbar, "v": v, "vbar": vbar}
    memo = {}

    def ev(x):
        out = memo.get(id(x))
        if out is not None:
            return out
        if isinstance(x, Var):
            out = arrays[x.slot][..., x.index]
        elif isinstance(x, Const):
            out = np.full(z.shape[:-1], x.value)
        elif isinstance(x, Add):
            out = ev(x.args[0]).copy()
            for a in x.args[1:]:
                out = out + ev(a)
        elif isinstance(x, Mul):
            out = ev(x.args[0]).copy()
            for a in x.args[1:]:
                out = out * ev(a)
        elif isinstance(x, Div):
            den = ev(x.den)
            _guard("division", den)
            out = ev(x.num) / den
        elif isinstance(x, Pow):
            base = ev(x.base)
            p = x.exponent
            if p.denominator == 1 and p.numerator > 0:
                out = base ** p.numerator
            else:
                if p < 0:
                    _guard("negative power", base)
                out = np.power(base, float(p))
        elif isinstance(x, Sqrt):
            out = np.sqrt(ev(x.arg).astype(complex))
        elif isinstance(x, Exp):
            out = np.exp(ev(x.arg))
        elif isinstance(x, Log):
            arg = ev(x.arg)
            _guard("log", arg)
            out = np.log(arg.astype(complex))
        elif isinstance(x, Neg):
            out = -ev(x.arg)
        else:
            raise ExpressionError(f"unknown node type {type(x).__name__}")
        memo[id(x)] = out
        return out

    out = ev(node)
    out = np.asarray(out, dtype=complex)
    if scalar:
        return complex(out)
    return out


# ---------------------------------------------------------------------------
# metric container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricExpr:
    """A complex Finsler metric G = F^2 as a polarized expression tree.

    ``singular`` lists scalar predicate expressions; a point is too close to
    the singular locus when any predicate magnitude falls below the sampler's
    clearance.
    """

    root: Node
    n: int
    name: str = ""
    singular: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 1:
            raise ExpressionError("dimension must be a positive integer")
        top = max(max_index(self.root), *(max_index(p) for p in self.singular)) \
            if self.singular else max_index(self.root)
        if top >= self.n:
            raise ExpressionError(
                f"expression references index {top + 1} but dimension is {self.n}"
            )

    def value(self, point) -> complex:
        zb = np.conj(point.z)
        vb = np.conj(point.v)
        return evaluate(self.root, point.z, zb, point.v, vb)

    def finsler_norm(self, point) -> float:
        g = self.value(point)
        return float(np.sqrt(abs(g)))

    def singular_clearance(self, point) -> float:
        """Smallest predicate magnitude at the point (inf when no predicates)."""
        if not self.singular:
            return float("inf")
        zb = np.conj(point.z)
        vb = np.conj(point.v)
        return min(
            abs(evaluate(p, point.z, zb, point.v, vb)) for p in self.singular
        )


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------
# Node vocabulary: var, const, add, mul, div, pow, sqrt, exp, log, neg.
# Variable indices are 1-based on the wire.

def node_to_dict(node: Node) -> dict:
    if isinstance(node, Var):
        return {"op": "var", "slot": node.slot, "index": node.index + 1}
    if isinstance(node, Const):
        return {"op": "const", "re": node.value.real, "im": node.value.imag}
    if isinstance(node, Add):
        return {"op": "add", "args": [node_to_dict(a) for a in node.args]}
    if isinstance(node, Mul):
        return {"op": "mul", "args": [node_to_dict(a) for a in node.args]}
    if isinstance(node, Div):
        return {"op": "div", "args": [node_to_dict(node.num), node_to_dict(node.den)]}
    if isinstance(node, Pow):
        return {"op": "pow", "num": node.num, "den": node.den,
                "args": [node_to_dict(node.base)]}
    if isinstance(node, Sqrt):
        return {"op": "sqrt", "args": [node_to_dict(node.arg)]}
    if isinstance(node, Exp):
        return {"op": "exp", "args": [node_to_dict(node.arg)]}
    if isinstance(node, Log):
        return {"op": "log", "args": [node_to_dict(node.arg)]}
    if isinstance(node, Neg):
        return {"op": "neg", "args": [node_to_dict(node.arg)]}
    raise ExpressionError(f"unknown node type {type(node).__name__}")


def node_from_dict(d: dict) -> Node:
    try:
        op = d["op"]
    except (KeyError, TypeError):
        raise ExpressionError("node object missing 'op' field") from None
    if op == "var":
        return Var(d["slot"], int(d["index"]) - 1)
    if op == "const":
        return Const(complex(d.get("re", 0.0), d.get("im", 0.0)))
    args = [node_from_dict(a) for a in d.get("args", [])]
    if op == "add":
        return Add(tuple(args))
    if op == "mul":
        return Mul(tuple(args))
    if op == "div":
        if len(args) != 2:
            raise ExpressionError("div expects exactly two arguments")
        return Div(args[0], args[1])
    if op == "pow":
        if len(args) != 1:
            raise ExpressionError("pow expects exactly one argument")
        return Pow(args[0], int(d["num"]), int(d.get("den", 1)))
    unary = {"sqrt": Sqrt, "exp": Exp, "log": Log, "neg": Neg}
    if op in unary:
        if len(args) != 1:
            raise ExpressionError(f"{op} expects exactly one argument")
        return unary[op](args[0])
    raise ExpressionError(f"unknown op {op!r}")


def metric_to_dict(metric: MetricExpr) -> dict:
    return {
        "n": metric.n,
        "name": metric.name,
        "expr": node_to_dict(metric.root),
        "singular": [node_to_dict(p) for p in metric.singular],
    }


def metric_from_dict(d: dict) -> MetricExpr:
    return MetricExpr(
        root=node_from_dict(d["expr"]),
        n=int(d["n"]),
        name=d.get("name", ""),
        singular=tuple(node_from_dict(p) for p in d.get("singular", [])),
    )


def metric_to_json(metric: MetricExpr) -> str:
    return json.dumps(metric_to_dict(metric), sort_keys=True)


def metric_from_json(text: str) -> MetricExpr:
    return metric_from_dict(json.loads(text))

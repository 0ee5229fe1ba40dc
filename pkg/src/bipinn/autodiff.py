"""Scalar reverse-mode tape and second-order forward jets.

Parameter gradients are taken by reverse sweeps over a :class:`Tape`; input
derivatives ride along as :class:`Jet` triples whose components are
themselves tape scalars, so a loss built from ``du`` and ``ddu`` can still be
differentiated with respect to the network parameters.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _sign(x: float) -> float:
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


class Tape:
    """Append-only record of scalar operations.

    Nodes are stored in construction order, which is already a topological
    order: every node's parents were created before it.
    """

    def __init__(self):
        self.values: list[float] = []
        self.parents: list[tuple[int, ...]] = []
        self.partials: list[tuple[float, ...]] = []
        self.kinds: list[str] = []

    def __len__(self):
        return len(self.values)

    def _push(self, kind: str, value: float, parents=(), partials=()) -> "Scalar":
        self.values.append(value)
        self.parents.append(parents)
        self.partials.append(partials)
        self.kinds.append(kind)
        return Scalar(self, len(self.values) - 1)

    def variable(self, value: float) -> "Scalar":
        return self._push("var", float(value))

    def constant(self, value: float) -> "Scalar":
        return self._push("const", float(value))

    def lift(self, x) -> "Scalar":
        if isinstance(x, Scalar):
            if x.tape is not self:
                raise ValueError("scalar belongs to a different tape")
            return x
        return self.constant(x)

    def binary(self, kind: str, a: "Scalar", b: "Scalar") -> "Scalar":
        a, b = self.lift(a), self.lift(b)
        x, y = a.value, b.value
        if kind == "add":
            return self._push(kind, x + y, (a.id, b.id), (1.0, 1.0))
        if kind == "sub":
            return self._push(kind, x - y, (a.id, b.id), (1.0, -1.0))
        if kind == "mul":
            return self._push(kind, x * y, (a.id, b.id), (y, x))
        if kind == "div":
            if y == 0.0:
                raise ZeroDivisionError("division by a zero-valued scalar")
            q = x / y
            return self._push(kind, q, (a.id, b.id), (1.0 / y, -q / y))
        raise ValueError(f"unknown binary op {kind!r}")

    def unary(self, kind: str, a: "Scalar") -> "Scalar":
        a = self.lift(a)
        x = a.value
        if kind == "neg":
            v, d = -x, -1.0
        elif kind == "sin":
            v, d = math.sin(x), math.cos(x)
        elif kind == "cos":
            v, d = math.cos(x), -math.sin(x)
        elif kind == "exp":
            v = math.exp(x)
            d = v
        elif kind == "square":
            v, d = x * x, 2.0 * x
        elif kind == "sigmoid":
            v = _sigmoid(x)
            d = v * (1.0 - v)
        elif kind == "abs":
            # subgradient sign(0) = 0 keeps zeroed weights at rest
            v, d = abs(x), _sign(x)
        else:
            raise ValueError(f"unknown unary op {kind!r}")
        return self._push(kind, v, (a.id,), (d,))

    def sum(self, terms: Iterable["Scalar"]) -> "Scalar":
        """n-ary sum as a single node, summed left to right."""
        ids, total = [], 0.0
        for s in terms:
            s = self.lift(s)
            ids.append(s.id)
            total += s.value
        return self._push("sum", total, tuple(ids), (1.0,) * len(ids))

    def backward(self, root: "Scalar") -> "Gradients":
        adj = [0.0] * (root.id + 1)
        adj[root.id] = 1.0
        parents, partials = self.parents, self.partials
        for i in range(root.id, -1, -1):
            g = adj[i]
            if g == 0.0:
                continue
            for p, d in zip(parents[i], partials[i]):
                adj[p] += g * d
        return Gradients(self, adj)


class Scalar:
    """Handle to one node of a tape."""

    __slots__ = ("tape", "id")

    def __init__(self, tape: Tape, node_id: int):
        self.tape = tape
        self.id = node_id

    @property
    def value(self) -> float:
        return self.tape.values[self.id]

    def __repr__(self):
        return f"Scalar({self.value!r}, id={self.id})"

    def __float__(self):
        return self.value

    def __add__(self, o):
        return self.tape.binary("add", self, o)

    def __radd__(self, o):
        return self.tape.binary("add", o, self)

    def __sub__(self, o):
        return self.tape.binary("sub", self, o)

    def __rsub__(self, o):
        return self.tape.binary("sub", o, self)

    def __mul__(self, o):
        return self.tape.binary("mul", self, o)

    def __rmul__(self, o):
        return self.tape.binary("mul", o, self)

    def __truediv__(self, o):
        return self.tape.binary("div", self, o)

    def __rtruediv__(self, o):
        return self.tape.binary("div", o, self)

    def __neg__(self):
        return self.tape.unary("neg", self)

    def sin(self):
        return self.tape.unary("sin", self)

    def cos(self):
        return self.tape.unary("cos", self)

    def exp(self):
        return self.tape.unary("exp", self)

    def square(self):
        return self.tape.unary("square", self)

    def sigmoid(self):
        return self.tape.unary("sigmoid", self)

    def abs(self):
        return self.tape.unary("abs", self)

    __abs__ = abs


class Gradients:
    """Adjoints from one backward sweep, looked up by scalar or node id."""

    def __init__(self, tape: Tape, adjoints: list[float]):
        self._tape = tape
        self._adj = adjoints

    def __getitem__(self, key) -> float:
        i = key.id if isinstance(key, Scalar) else int(key)
        if i < len(self._adj):
            return self._adj[i]
        return 0.0

    def leaves(self) -> dict[int, float]:
        kinds = self._tape.kinds
        return {i: self[i] for i in range(len(kinds)) if kinds[i] == "var"}


# Module-level conveniences mirroring the tape methods.


def variable(value: float, tape: Tape) -> Scalar:
    return tape.variable(value)


def binary(kind: str, a: Scalar, b: Scalar) -> Scalar:
    tape = a.tape if isinstance(a, Scalar) else b.tape
    return tape.binary(kind, a, b)


def unary(kind: str, a: Scalar) -> Scalar:
    return a.tape.unary(kind, a)


def backward(root: Scalar) -> Gradients:
    return root.tape.backward(root)


class Jet(NamedTuple):
    """Value with first and second derivatives in the input coordinate."""

    u: Scalar
    du: Scalar
    ddu: Scalar

    def values(self) -> tuple[float, float, float]:
        return (self.u.value, self.du.value, self.ddu.value)

    def __add__(self, other: "Jet") -> "Jet":
        return Jet(self.u + other.u, self.du + other.du, self.ddu + other.ddu)


def jet_seed(t: float, tape: Tape | None = None) -> Jet:
    """Identity jet ``(t, 1, 0)`` at input coordinate ``t``."""
    if tape is None:
        tape = Tape()
    return Jet(tape.constant(t), tape.constant(1.0), tape.constant(0.0))


def jet_chain(a_triple, z: Jet) -> Jet:
    """Push ``z`` through a scalar function given ``(a, a', a'')`` at ``z.u``."""
    a0, a1, a2 = a_triple
    return Jet(a0, a1 * z.du, a2 * z.du.square() + a1 * z.ddu)


def jet_affine(weights, bias, inputs: list[Jet]) -> Jet:
    """``sum_j w_j * z_j + b``: u picks up the bias, du and ddu do not."""
    tape = inputs[0].u.tape
    u = tape.sum([w * z.u for w, z in zip(weights, inputs)] + [bias])
    du = tape.sum([w * z.du for w, z in zip(weights, inputs)])
    ddu = tape.sum([w * z.ddu for w, z in zip(weights, inputs)])
    return Jet(u, du, ddu)


"""Activation functions with closed-form derivatives.

Each kind supplies ``(a, a', a'')`` on tape scalars for jet propagation, and
``(a, a', a'', a''')`` on numpy arrays for the batched trainer, which needs
the third derivative to back-propagate through ``a''``.

sinLU is ``a(x) = x sin(x) sigmoid(x)``.  Writing ``g = x sin x`` and ``s``
for the sigmoid, with ``s' = s(1-s)``, ``s'' = s'(1-2s)`` and
``s''' = s'(1-6s+6s^2)``::

    g' = sin x + x cos x      g'' = 2 cos x - x sin x     g''' = -3 sin x - x cos x
    a'   = g' s + g s'
    a''  = g'' s + 2 g' s' + g s''
    a''' = g''' s + 3 g'' s' + 3 g' s'' + g s'''
"""

from __future__ import annotations

import enum

import numpy as np

from .autodiff import Scalar


class ActivationKind(str, enum.Enum):
    SINLU = "sinlu"
    TANH = "tanh"
    IDENTITY = "identity"

    @classmethod
    def parse(cls, name) -> "ActivationKind":
        if isinstance(name, cls):
            return name
        return cls(str(name).lower())


def eval2(kind, x: Scalar) -> tuple[Scalar, Scalar, Scalar]:
    """``(a(x), a'(x), a''(x))`` recorded on ``x``'s tape."""
    kind = ActivationKind.parse(kind)
    tape = x.tape
    if kind is ActivationKind.IDENTITY:
        return x, tape.constant(1.0), tape.constant(0.0)
    if kind is ActivationKind.TANH:
        # tanh x = 2 sigmoid(2x) - 1
        t = 2.0 * (2.0 * x).sigmoid() - 1.0
        d1 = 1.0 - t.square()
        return t, d1, -2.0 * t * d1
    sn, cs, s = x.sin(), x.cos(), x.sigmoid()
    s1 = s * (1.0 - s)
    s2 = s1 * (1.0 - 2.0 * s)
    g = x * sn
    g1 = sn + x * cs
    g2 = 2.0 * cs - x * sn
    a = g * s
    a1 = g1 * s + g * s1
    a2 = g2 * s + 2.0 * g1 * s1 + g * s2
    return a, a1, a2


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def derivatives(kind, x) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(a, a', a'', a''')`` evaluated elementwise on an array."""
    kind = ActivationKind.parse(kind)
    x = np.asarray(x, dtype=np.float64)
    if kind is ActivationKind.IDENTITY:
        one = np.ones_like(x)
        zero = np.zeros_like(x)
        return x.copy(), one, zero, zero.copy()
    if kind is ActivationKind.TANH:
        t = np.tanh(x)
        d1 = 1.0 - t * t
        return t, d1, -2.0 * t * d1, -2.0 * d1 * (1.0 - 3.0 * t * t)
    sn, cs = np.sin(x), np.cos(x)
    s = sigmoid(x)
    s1 = s * (1.0 - s)
    s2 = s1 * (1.0 - 2.0 * s)
    s3 = s1 * (1.0 - 6.0 * s + 6.0 * s * s)
    xs, xc = x * sn, x * cs
    g1 = sn + xc
    g2 = 2.0 * cs - xs
    g3 = -3.0 * sn - xc
    a = xs * s
    a1 = g1 * s + xs * s1
    a2 = g2 * s + 2.0 * g1 * s1 + xs * s2
    a3 = g3 * s + 3.0 * g2 * s1 + 3.0 * g1 * s2 + xs * s3
    return a, a1, a2, a3


def value(kind, x):
    kind = ActivationKind.parse(kind)
    x = np.asarray(x, dtype=np.float64)
    if kind is ActivationKind.IDENTITY:
        return x.copy()
    if kind is ActivationKind.TANH:
        return np.tanh(x)
    return x * np.sin(x) * sigmoid(x)

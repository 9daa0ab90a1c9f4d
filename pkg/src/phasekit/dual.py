"""First-order dual numbers, nestable for exact mixed second derivatives.

A :class:`Dual` carries a value and one directional derivative. Nesting a
``Dual`` inside another (``Dual(Dual(v, 1.0), Dual(0.0, 0.0))``) propagates a
second direction, so one evaluation of a model right-hand side yields an exact
mixed partial d^2 f / (ds dt) in ``result.eps.eps``.

Model right-hand sides must be written with the arithmetic operators plus the
`exp`, `log`, `sin`, `cos`, `sqrt`, `tanh` functions from this module, which
accept plain floats and duals alike.
"""

from __future__ import annotations

import math


class Dual:
    """Value plus one derivative carrier; components may themselves be duals."""

    __slots__ = ("val", "eps")

    def __init__(self, val, eps=0.0):
        self.val = val
        self.eps = eps

    def __repr__(self):
        return f"Dual({self.val!r}, {self.eps!r})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.eps + other.eps)
        return Dual(self.val + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.eps - other.eps)
        return Dual(self.val - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.eps)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val,
                        self.val * other.eps + self.eps * other.val)
        return Dual(self.val * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.val
            q = self.val * inv
            return Dual(q, (self.eps - q * other.eps) * inv)
        inv = 1.0 / other
        return Dual(self.val * inv, self.eps * inv)

    def __rtruediv__(self, other):
        inv = 1.0 / self.val
        q = other * inv
        return Dual(q, -q * self.eps * inv)

    def __neg__(self):
        return Dual(-self.val, -self.eps)

    def __pos__(self):
        return self

    def __pow__(self, other):
        if isinstance(other, Dual):
            # general base**exponent needs base > 0
            return exp(other * log(self))
        v = self.val ** other
        return Dual(v, self.eps * other * self.val ** (other - 1))

    def __rpow__(self, other):
        return exp(self * math.log(other))


def value(u):
    """Strip all derivative carriers, returning the underlying float."""
    while isinstance(u, Dual):
        u = u.val
    return u


def exp(u):
    if isinstance(u, Dual):
        e = exp(u.val)
        return Dual(e, u.eps * e)
    return math.exp(u)


def log(u):
    if isinstance(u, Dual):
        return Dual(log(u.val), u.eps / u.val)
    return math.log(u)


def sin(u):
    if isinstance(u, Dual):
        return Dual(sin(u.val), u.eps * cos(u.val))
    return math.sin(u)


def cos(u):
    if isinstance(u, Dual):
        return Dual(cos(u.val), -u.eps * sin(u.val))
    return math.cos(u)


def sqrt(u):
    if isinstance(u, Dual):
        s = sqrt(u.val)
        return Dual(s, u.eps * 0.5 / s)
    return math.sqrt(u)


def tanh(u):
    if isinstance(u, Dual):
        t = tanh(u.val)
        return Dual(t, u.eps * (1.0 - t * t))
    return math.tanh(u)


def first_derivative(f, x0):
    """d f / d x at x0 for a scalar function written in dual-friendly form."""
    y = f(Dual(float(x0), 1.0))
    return y.eps if isinstance(y, Dual) else 0.0

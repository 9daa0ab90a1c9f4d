"""Dual-number arithmetic against hand derivatives and finite differences."""

import math

import numpy as np
import pytest

from phasekit import dual
from phasekit.dual import Dual


def test_polynomial_first_derivative():
    # f(x) = 3x^3 - 2x + 5, f'(2) = 9*4 - 2 = 34
    x = Dual(2.0, 1.0)
    y = 3.0 * x ** 3 - 2.0 * x + 5.0
    assert y.val == pytest.approx(25.0)
    assert y.eps == pytest.approx(34.0)


def test_quotient_rule():
    x = Dual(1.5, 1.0)
    y = (x * x + 1.0) / (x - 0.5)
    # d/dx [(x^2+1)/(x-0.5)] = (2x(x-0.5) - (x^2+1)) / (x-0.5)^2
    want = (2 * 1.5 * 1.0 - (1.5 ** 2 + 1.0)) / 1.0 ** 2
    assert y.eps == pytest.approx(want, rel=1e-14)


def test_transcendentals():
    x = Dual(0.7, 1.0)
    assert dual.exp(x).eps == pytest.approx(math.exp(0.7), rel=1e-14)
    assert dual.log(x).eps == pytest.approx(1 / 0.7, rel=1e-14)
    assert dual.sin(x).eps == pytest.approx(math.cos(0.7), rel=1e-14)
    assert dual.cos(x).eps == pytest.approx(-math.sin(0.7), rel=1e-14)
    assert dual.sqrt(x).eps == pytest.approx(0.5 / math.sqrt(0.7), rel=1e-14)
    assert dual.tanh(x).eps == pytest.approx(1 - math.tanh(0.7) ** 2, rel=1e-14)


def test_dual_exponent_power():
    # d/dn [z^n] = z^n log z
    z, n = 1.3, 2.7
    y = z ** Dual(n, 1.0)
    assert y.val == pytest.approx(z ** n, rel=1e-14)
    assert y.eps == pytest.approx(z ** n * math.log(z), rel=1e-14)
    # d/dz [z^n] with dual base and dual-free exponent
    y2 = Dual(z, 1.0) ** n
    assert y2.eps == pytest.approx(n * z ** (n - 1), rel=1e-14)


def test_nested_second_derivative():
    # f(x) = x^4: f''(1.2) = 12 x^2 = 17.28
    x = Dual(Dual(1.2, 1.0), Dual(1.0, 0.0))
    y = x ** 4
    assert y.eps.eps == pytest.approx(12 * 1.2 ** 2, rel=1e-13)


def test_nested_mixed_partial():
    # f(u, v) = exp(u * v): d2f/dudv at (0.3, -0.4) = exp(uv)(1 + uv)
    u0, v0 = 0.3, -0.4
    u = Dual(Dual(u0, 1.0), Dual(0.0, 0.0))
    v = Dual(Dual(v0, 0.0), Dual(1.0, 0.0))
    y = dual.exp(u * v)
    want = math.exp(u0 * v0) * (1 + u0 * v0)
    assert y.eps.eps == pytest.approx(want, rel=1e-13)


def test_mixed_partial_matches_finite_difference(rng):
    def f(u, v):
        return dual.exp(u * v) + u ** 3 / (v + 2.0) - dual.sin(u - v)

    for _ in range(25):
        u0, v0 = rng.uniform(-1, 1, size=2)
        u = Dual(Dual(u0, 1.0), Dual(0.0, 0.0))
        v = Dual(Dual(v0, 0.0), Dual(1.0, 0.0))
        exact = f(u, v).eps.eps
        h = 1e-4
        fd = (f(u0 + h, v0 + h) - f(u0 + h, v0 - h)
              - f(u0 - h, v0 + h) + f(u0 - h, v0 - h)) / (4 * h * h)
        assert exact == pytest.approx(fd, rel=2e-6, abs=2e-7)


def test_value_strips_nesting():
    assert dual.value(Dual(Dual(3.5, 1.0), Dual(0.0, 2.0))) == 3.5
    assert dual.value(4.25) == 4.25

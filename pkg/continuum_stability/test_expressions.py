"""test_expressions.py - the closed-form grammar"""

import numpy as np
import pytest

from continuum_stability.errors import ConfigError
from continuum_stability.expressions import parse_expression


def test_coupling_expression_values():
    f2 = parse_expression("0.4*x*exp(-0.25*x^2)")
    assert f2(2.0) == pytest.approx(0.8 * np.exp(-1.0))
    x = np.linspace(0, 5, 11)
    assert np.allclose(f2(x), 0.4 * x * np.exp(-0.25 * x * x))


def test_precedence_and_unary_minus():
    assert parse_expression("-p^2")(3.0) == pytest.approx(-9.0)
    assert parse_expression("2^3^2")(0.0) == pytest.approx(512.0)
    assert parse_expression("1 - 2 - 3")(0.0) == pytest.approx(-4.0)
    assert parse_expression("8 / 4 / 2")(0.0) == pytest.approx(1.0)
    assert parse_expression("(p - 3) / 0.5")(4.0) == pytest.approx(2.0)


def test_symbolic_derivatives():
    g = parse_expression("exp(-p^2) + 0.05*exp(-((p-3)/0.5)^2)")
    d1 = g.derivative()
    d2 = d1.derivative()
    p = np.linspace(-4, 5, 37)
    exact1 = -2 * p * np.exp(-p * p) - 0.05 * 8 * (p - 3) * np.exp(-4 * (p - 3) ** 2)
    exact2 = (4 * p * p - 2) * np.exp(-p * p) + 0.05 * (64 * (p - 3) ** 2 - 8) * np.exp(-4 * (p - 3) ** 2)
    assert np.allclose(d1(p), exact1, atol=1e-12)
    assert np.allclose(d2(p), exact2, atol=1e-12)


def test_constant_expression_broadcasts():
    zero = parse_expression("0", variables=("x",))
    assert zero(1.5) == 0.0
    assert zero(np.arange(4)).shape == (4,)


@pytest.mark.parametrize("text", ["", "2*(x", "import os", "x @ 2", "sin(x)", "y + 1", "exp x"])
def test_rejected_expressions(text):
    with pytest.raises(ConfigError):
        parse_expression(text, variables=("x",))

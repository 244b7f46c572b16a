from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from willis_homog._piecewise import PiecewisePoly, gauss_nodes_weights, piecewise_constant
from willis_homog.material import bilaminate


def quadratic_example() -> PiecewisePoly:
    # x^2 on (0, 0.5), 1 - x on (0.5, 1), in local coordinates
    return PiecewisePoly(
        breaks=(0.0, 0.5, 1.0),
        polys=(np.polynomial.Polynomial([0.0, 0.0, 1.0]), np.polynomial.Polynomial([0.5, -1.0])),
    )


def test_call_matches_local_polynomials() -> None:
    f = quadratic_example()
    x = np.array([0.1, 0.3, 0.6, 0.9])
    assert_allclose(f(x), [0.01, 0.09, 1 - 0.6, 1 - 0.9], atol=1e-15)


def test_call_is_periodic() -> None:
    f = quadratic_example()
    assert_allclose(f(0.3 + 1.0), f(0.3), atol=1e-15)
    assert_allclose(f(-0.7), f(0.3), atol=1e-15)


def test_mean_is_exact() -> None:
    f = quadratic_example()
    # int_0^.5 x^2 + int_.5^1 (1-x) = 1/24 + 1/8
    assert_allclose(f.mean(), 1 / 24 + 1 / 8, rtol=1e-15)


def test_antiderivative_is_continuous_and_starts_at_zero() -> None:
    f = quadratic_example()
    F = f.antiderivative(0.0)
    assert F(0.0) == pytest.approx(0.0, abs=1e-15)
    # probe away from the interface and the periodic wrap
    x = np.concatenate([np.linspace(0.05, 0.45, 5), np.linspace(0.55, 0.95, 5)])
    h = 1e-7
    assert_allclose((F(x + h) - F(x - h)) / (2 * h), f(x), atol=1e-6)
    for b in F.breaks[1:-1]:
        assert abs(F(b - 1e-13) - F(b + 1e-13)) < 1e-11


def test_derivative_of_antiderivative_roundtrip() -> None:
    f = quadratic_example()
    g = f.antiderivative(0.0).derivative()
    x = np.linspace(0.01, 0.99, 23)
    assert_allclose(g(x), f(x), atol=1e-13)


def test_arithmetic_with_scalars_and_fields() -> None:
    f = quadratic_example()
    x = np.array([0.2, 0.7])
    assert_allclose((f + 2.0)(x), f(x) + 2.0, atol=1e-15)
    assert_allclose((f * 3.0)(x), 3.0 * f(x), atol=1e-15)
    assert_allclose((f - f)(x), 0.0, atol=1e-15)
    assert_allclose((f * f)(x), f(x) ** 2, atol=1e-15)


def test_zero_mean_shifts_the_mean_only() -> None:
    f = quadratic_example()
    g = f.zero_mean()
    assert abs(g.mean()) < 1e-16
    x = np.linspace(0, 1, 11)
    assert_allclose(f(x) - g(x), f.mean(), atol=1e-14)


def test_periodicity_defect_detects_jump() -> None:
    f = quadratic_example()
    # f(0) = 0 but f(1-) = 0, so the example is periodic; x^2 alone is not
    assert f.periodicity_defect() < 1e-15
    g = PiecewisePoly(breaks=(0.0, 1.0), polys=(np.polynomial.Polynomial([0.0, 1.0]),))
    assert g.periodicity_defect() == pytest.approx(1.0)


def test_piecewise_constant_from_cell() -> None:
    cell = bilaminate(0.1, 0.1)
    g = piecewise_constant(cell, cell.values("G"))
    assert_allclose([g(0.2), g(0.8)], [1.0, 0.1], atol=1e-15)
    assert_allclose(g.mean(), 0.55, rtol=1e-15)


def test_gauss_nodes_integrate_polynomials_exactly() -> None:
    x, w = gauss_nodes_weights(4, 0.0, 2.0)
    # degree 7 is exact for 4-point Gauss
    assert_allclose(np.sum(w * x**7), 2.0**8 / 8, rtol=1e-13)
    assert_allclose(np.sum(w), 2.0, rtol=1e-15)

from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from willis_homog.asymptotics import homogenize
from willis_homog.dispersion import (
    effective_speed,
    exact_bilaminate_relation,
    exact_branch,
    order2_branch,
    quasistatic_branch,
    spectral_acoustic_branch,
    willis_exact_root,
)
from willis_homog.errors import ValidationError
from willis_homog.exact import dispersion_function
from willis_homog.material import Phase, UnitCell1D, bilaminate, homogeneous

BILAMINATE = bilaminate(0.1, 0.1)

# first root of the half-trace hitting -1 (the k = pi band edge), found by
# bisection on the closed-form relation
BAND_EDGE = 1.2251094766784818


def test_uniform_cell_branch_is_linear() -> None:
    k = np.linspace(0.0, 3.0, 12)
    branch = exact_branch(homogeneous(), k)
    assert branch.label == "exact"
    assert_allclose(branch.omega, k, atol=1e-9)


def test_closed_form_relation_matches_trace() -> None:
    for omega in (0.3, 0.9, 1.7, 2.8):
        lhs = exact_bilaminate_relation(BILAMINATE, omega)
        rhs = dispersion_function(BILAMINATE, omega)
        assert abs(lhs - rhs) < 1e-12


def test_closed_form_relation_needs_two_phases() -> None:
    cell = UnitCell1D(
        phases=(Phase(0.3, 1.0, 1.0), Phase(0.5, 0.2, 3.0), Phase(0.2, 2.5, 0.4))
    )
    with pytest.raises(ValidationError):
        exact_bilaminate_relation(cell, 1.0)


@pytest.mark.parametrize("k", [0.1, 0.5, 1.0, 1.5, 2.0, 3.0])
def test_exact_branch_solves_trace_equation(k: float) -> None:
    omega = exact_branch(BILAMINATE, np.array([k])).omega[0]
    assert abs(dispersion_function(BILAMINATE, omega) - np.cos(k)) < 1e-10


def test_band_edge_value() -> None:
    omega = exact_branch(BILAMINATE, np.array([np.pi])).omega[0]
    assert_allclose(omega, BAND_EDGE, rtol=1e-10)


def test_impedance_root_matches_trace_root() -> None:
    k = 0.5
    w_trace = exact_branch(BILAMINATE, np.array([k])).omega[0]
    w_imp = willis_exact_root(BILAMINATE, k)
    assert abs(w_trace - w_imp) < 1e-6


def test_spectral_branch_converges_to_exact() -> None:
    k = np.array([0.5, 1.5])
    w_trace = exact_branch(BILAMINATE, k).omega
    errs = []
    for n in (32, 128):
        w_spec = spectral_acoustic_branch(BILAMINATE, k, order=n).omega
        errs.append(np.max(np.abs(w_spec - w_trace)))
    assert errs[1] < 0.5 * errs[0] < 1e-2


def test_order2_branch_improves_on_quasistatic() -> None:
    _, coeffs = homogenize(BILAMINATE, method="exact")
    k = np.linspace(0.5, 2.0, 7)
    w_exact = exact_branch(BILAMINATE, k).omega
    w_2 = order2_branch(coeffs, k).omega
    w_qs = quasistatic_branch(coeffs, k).omega
    assert np.all(np.abs(w_2 - w_exact) < np.abs(w_qs - w_exact))


def test_order2_branch_terminates_past_radicand_zero() -> None:
    _, coeffs = homogenize(BILAMINATE, method="exact")
    k_end = np.sqrt(coeffs.mu0 / coeffs.mu2)
    k = np.linspace(0.5, 1.2 * k_end, 25)
    branch = order2_branch(coeffs, k)
    assert branch.terminated_at is not None
    assert branch.omega.size < k.size
    assert branch.label == "order2"


def test_quasistatic_branch_is_linear_with_effective_speed() -> None:
    _, coeffs = homogenize(BILAMINATE, method="exact")
    c = effective_speed(coeffs)
    assert_allclose(c, np.sqrt(coeffs.mu0 / coeffs.rho0), rtol=1e-15)
    k = np.linspace(0.0, 2.0, 5)
    branch = quasistatic_branch(coeffs, k)
    assert_allclose(branch.omega, c * k, rtol=1e-14)


def test_exact_branch_slope_at_origin_is_effective_speed() -> None:
    _, coeffs = homogenize(BILAMINATE, method="exact")
    k = 1e-3
    omega = exact_branch(BILAMINATE, np.array([k])).omega[0]
    assert abs(omega / k - effective_speed(coeffs)) < 1e-6

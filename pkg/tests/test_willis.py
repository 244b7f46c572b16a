from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from willis_homog.material import bilaminate, homogeneous
from willis_homog.spectral import assemble, solve_eigensystem
from willis_homog.willis import (
    classify_visibility,
    dynamic_identity_residuals,
    effective_impedance,
    effective_parameters,
    impedance_from_parameters,
    mean_fields,
)

BILAMINATE = bilaminate(0.1, 0.1)

# regression anchor from the closed-form solver at (k, omega) = (0.5, 0.2)
MEAN_W_PROBE = 43.13482318268196


def test_uniform_cell_impedance_closed_form() -> None:
    G, rho = 1.3, 0.6
    cell = homogeneous(G, rho)
    rng = np.random.default_rng(3)
    for _ in range(8):
        k = rng.uniform(0.1, 3.0)
        omega = rng.uniform(0.1, 2.5)
        if abs(G * k**2 - rho * omega**2) < 1e-2:
            continue
        z = effective_impedance(cell, k, omega, method="exact")
        assert_allclose(z, G * k**2 - rho * omega**2, rtol=1e-10)


def test_impedance_probe_regression() -> None:
    z = effective_impedance(BILAMINATE, 0.5, 0.2, method="exact")
    assert_allclose(z.real, 1.0 / MEAN_W_PROBE, rtol=1e-12)
    assert abs(z.imag) < 1e-12


@pytest.mark.parametrize("k,omega", [(0.5, 0.2), (1.2, 0.9), (2.4, 1.7)])
def test_exact_identity_residuals_at_roundoff(k: float, omega: float) -> None:
    res = dynamic_identity_residuals(BILAMINATE, k, omega, method="exact")
    assert len(res) == 12
    for name, value in res.items():
        assert value < 1e-10, name


def test_spectral_identity_residuals_at_roundoff() -> None:
    res = dynamic_identity_residuals(BILAMINATE, 0.5, 0.2, method="spectral", order=64)
    for name, value in res.items():
        assert value < 1e-10, name


@pytest.mark.parametrize("route", ["direct", "symmetric"])
def test_parameters_reconstruct_impedance(route: str) -> None:
    k, omega = 0.8, 0.5
    p = effective_parameters(BILAMINATE, k, omega, route=route, method="exact")
    z = effective_impedance(BILAMINATE, k, omega, method="exact")
    assert abs(impedance_from_parameters(p) - z) < 1e-10 * abs(z)
    for name, value in p.symmetry_residuals().items():
        assert value < 1e-10, name


def test_uniform_cell_parameters_have_no_coupling() -> None:
    p = effective_parameters(homogeneous(2.0, 0.7), 0.9, 0.4, method="exact")
    assert_allclose(p.density, 0.7, rtol=1e-10)
    assert_allclose(p.stiffness, 2.0, rtol=1e-10)
    assert abs(p.coupling_strain) < 1e-10
    assert abs(p.coupling_velocity) < 1e-10


def test_mean_field_balance() -> None:
    fields = mean_fields(BILAMINATE, 0.7, 0.3, f=1.0, gamma=0.25j, method="exact")
    assert fields.balance_residual() < 1e-12


def test_impedance_vanishes_on_acoustic_branch() -> None:
    # on the visible branch the mean diverges, so Z = 1/<w> has a zero
    cell = homogeneous()
    k = 1.0
    z = effective_impedance(cell, k, 1.0 - 1e-8, method="exact")
    assert abs(z) < 1e-6


def test_visibility_of_uniform_branches() -> None:
    eig = solve_eigensystem(assemble(homogeneous(), 1.0, 16))
    acoustic = classify_visibility(eig, 0)
    assert acoustic.classification == "Visible"
    for branch in (1, 2, 3):
        rep = classify_visibility(eig, branch)
        assert rep.classification == "Invisible"
        assert rep.dipole_solvable
        assert rep.parameter_behavior == "continuous"


def test_visibility_of_bilaminate_acoustic_branch() -> None:
    eig = solve_eigensystem(assemble(BILAMINATE, 0.5, 64))
    rep = classify_visibility(eig, 0)
    assert rep.classification == "Visible"


def test_impedance_featureless_through_invisible_eigenvalue() -> None:
    # the uniform cell at k = 1: Z = k^2 - omega^2 straight through the
    # folded eigenvalue (2 pi - 1)^2, with no pole or zero
    cell = homogeneous()
    k = 1.0
    lam1 = (2.0 * np.pi - k) ** 2
    for d in (1e-2, 1e-4, 1e-6):
        for s in (-1.0, 1.0):
            omega = np.sqrt(lam1) * (1.0 + s * d)
            z = effective_impedance(cell, k, omega, method="exact")
            assert_allclose(z, k**2 - omega**2, rtol=1e-9)


def test_mean_blowup_rate_on_visible_branch() -> None:
    from willis_homog.dispersion import exact_branch
    from willis_homog.exact import solve_monopole_exact

    k = 0.5
    w_star = exact_branch(BILAMINATE, np.array([k])).omega[0]
    lam = w_star**2
    gaps, mags = [], []
    for d in np.geomspace(1e-2, 1e-5, 7):
        omega = w_star * (1.0 - d)
        gaps.append(abs(lam - omega**2))
        mags.append(abs(solve_monopole_exact(BILAMINATE, k, omega).mean))
    slope = np.polyfit(np.log(gaps), np.log(mags), 1)[0]
    assert abs(slope + 1.0) < 0.05

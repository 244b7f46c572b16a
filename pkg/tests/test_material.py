from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from willis_homog.errors import ValidationError
from willis_homog.material import (
    Phase,
    UnitCell1D,
    bilaminate,
    cell_digest,
    cell_from_dict,
    cell_to_dict,
    fourier_coefficients,
    homogeneous,
    sample,
)


def test_phase_rejects_nonpositive_properties() -> None:
    with pytest.raises(ValidationError):
        Phase(length=0.5, G=0.0, rho=1.0)
    with pytest.raises(ValidationError):
        Phase(length=0.5, G=1.0, rho=-2.0)
    with pytest.raises(ValidationError):
        Phase(length=0.0, G=1.0, rho=1.0)


def test_cell_lengths_must_fill_the_unit_interval() -> None:
    with pytest.raises(ValidationError):
        UnitCell1D(phases=(Phase(0.4, 1.0, 1.0), Phase(0.4, 2.0, 2.0)))


def test_bilaminate_layout_and_means() -> None:
    cell = bilaminate(0.1, 0.1)
    assert cell.breakpoints == pytest.approx([0.0, 0.5, 1.0])
    assert_allclose(cell.mean("rho"), 0.55, rtol=1e-15)
    assert_allclose(cell.mean("G"), 0.55, rtol=1e-15)
    assert_allclose(cell.mean("1/G"), 0.5 * (1.0 + 10.0), rtol=1e-15)


def test_homogeneous_cell_is_single_phase() -> None:
    cell = homogeneous(2.0, 3.0)
    assert len(cell.phases) == 1
    assert cell.mean("G") == pytest.approx(2.0)
    assert cell.mean("rho") == pytest.approx(3.0)


def test_fourier_coefficients_match_half_cell_formula() -> None:
    # for equal halves with values v1, v2 the odd harmonics are
    # -i (v1 - v2) / (pi m) and the even ones vanish
    cell = bilaminate(0.2, 0.3)
    field = fourier_coefficients(cell, "G", 8)
    v1, v2 = 1.0, 0.3
    assert abs(field.coefficient(0) - (v1 + v2) / 2) < 1e-15
    for m in (-3, 1, 5):
        assert abs(field.coefficient(m) - (-1j * (v1 - v2) / (np.pi * m))) < 1e-15
    for m in (-4, 2, 6):
        assert abs(field.coefficient(m)) < 1e-15


def test_fourier_mean_is_cell_mean() -> None:
    cell = bilaminate(0.1, 0.1)
    for name in ("G", "rho", "1/G"):
        field = fourier_coefficients(cell, name, 16)
        assert_allclose(field.mean, cell.mean(name), rtol=1e-14)


def test_fourier_field_evaluation_converges_off_interfaces() -> None:
    cell = bilaminate(0.1, 0.1)
    x = np.array([0.2, 0.7])
    errs = []
    for n in (16, 64, 256):
        field = fourier_coefficients(cell, "rho", n)
        errs.append(np.max(np.abs(field(x) - sample(cell, x, "rho"))))
    assert errs[2] < errs[0]


def test_conjugate_symmetry_of_real_fields() -> None:
    cell = bilaminate(0.3, 0.7)
    field = fourier_coefficients(cell, "G", 12)
    assert field.conjugate_symmetry_defect() < 1e-15


def test_dict_roundtrip_preserves_cell() -> None:
    cell = UnitCell1D(
        phases=(Phase(0.3, 1.0, 1.0), Phase(0.5, 0.2, 3.0), Phase(0.2, 2.5, 0.4))
    )
    again = cell_from_dict(cell_to_dict(cell))
    assert again.phases == cell.phases
    assert cell_digest(again) == cell_digest(cell)


def test_digest_distinguishes_cells() -> None:
    a = cell_digest(bilaminate(0.1, 0.1))
    b = cell_digest(bilaminate(0.1, 0.2))
    assert a != b
    assert len(a) == 12

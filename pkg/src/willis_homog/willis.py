"""Exact effective description of the cell at one (k, omega).

The mean monopole response fixes the effective impedance Z = 1/<w>.  The
four constitutive parameters (effective density, stiffness and the two
coupling coefficients) are assembled from seven cell averages along two
algebraically equivalent routes:

* ``direct``    - the parameters as read off the mean-field representation;
* ``symmetric`` - the same after eliminating mixed averages through the
  mean identities, which makes the density and stiffness manifestly real
  and the couplings conjugate-opposite.

Route agreement, the parameter symmetries, and the reconstruction of the
impedance from the parameters are the module's cross-checks; all of them
hold at roundoff on the closed-form route and at truncation level on the
spectral route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cell_functions import averages, solve_v, solve_v_exact, solve_w, solve_w_exact
from .errors import ValidationError, ZeroMeanImpedanceError
from .material import FourierField, UnitCell1D
from .spectral import BlochEigensystem, assemble

__all__ = [
    "EffectiveParameters",
    "MeanFields",
    "VisibilityReport",
    "effective_impedance",
    "effective_parameters",
    "impedance_from_parameters",
    "mean_fields",
    "localization_fields",
    "classify_visibility",
    "parameters_from_averages",
    "dynamic_identity_residuals",
]

#: |<w>| below this is treated as a zero-mean cell response
ZERO_MEAN_TOL = 1e-12

#: default visibility threshold on |<phi_j>|
VISIBILITY_TOL = 1e-6

ROUTES = ("direct", "symmetric")


@dataclass(frozen=True)
class EffectiveParameters:
    """Willis constitutive parameters at one (k, omega)."""

    k: float
    omega: float
    density: complex
    stiffness: complex
    coupling_strain: complex
    coupling_velocity: complex
    route: str

    def symmetry_residuals(self) -> dict[str, float]:
        """Deviations from the exact parameter symmetries (relative)."""
        scale = max(abs(self.density), abs(self.stiffness), 1e-30)
        cscale = max(abs(self.coupling_strain), abs(self.coupling_velocity), scale)
        return {
            "density_real": abs(self.density.imag) / max(abs(self.density), 1e-30),
            "stiffness_real": abs(self.stiffness.imag) / max(abs(self.stiffness), 1e-30),
            "couplings_conjugate": abs(self.coupling_strain + np.conj(self.coupling_velocity))
            / cscale,
        }


@dataclass(frozen=True)
class MeanFields:
    """Mean strain, velocity, stress and momentum for loads (f, gamma)."""

    k: float
    omega: float
    f: complex
    gamma: complex
    mean_u: complex
    strain: complex
    velocity: complex
    stress: complex
    momentum: complex

    def balance_residual(self) -> float:
        """|(-i omega) momentum - ik stress - f| over the load scale."""
        lhs = -1j * self.omega * self.momentum - 1j * self.k * self.stress
        return abs(lhs - self.f) / max(abs(self.f), abs(self.gamma), 1e-30)


@dataclass(frozen=True)
class VisibilityReport:
    """Visibility classification of one Bloch branch."""

    branch: int
    cluster: tuple[int, ...]
    eigenvalue: float
    mode_means: tuple[complex, ...]
    dipole_projections: tuple[complex, ...]
    visible: bool
    dipole_solvable: bool
    parameter_behavior: str

    @property
    def classification(self) -> str:
        return "Visible" if self.visible else "Invisible"


def _averages_at(
    cell: UnitCell1D, k: float, omega: float, method: str, order: int
) -> dict[str, complex]:
    if method == "exact":
        w = solve_w_exact(cell, k, omega)
        v = solve_v_exact(cell, k, omega)
    elif method == "spectral":
        op = assemble(cell, k, order)
        w = solve_w(op, omega)
        v = solve_v(op, omega)
    else:
        raise ValidationError(f"method must be 'exact' or 'spectral', got {method!r}")
    return averages(w, v, cell)


def effective_impedance(
    cell: UnitCell1D,
    k: float,
    omega: float,
    method: str = "exact",
    order: int = 128,
) -> complex:
    """Z = 1/<w>; the imaginary part is a diagnostic and should sit at roundoff."""
    avg = _averages_at(cell, k, omega, method, order)
    return impedance_from_averages(avg)


def impedance_from_averages(avg: dict[str, complex]) -> complex:
    mw = avg["mean_w"]
    if abs(mw) <= ZERO_MEAN_TOL:
        raise ZeroMeanImpedanceError(
            f"<w> = {mw:.3e} is numerically zero; the effective impedance "
            "is undefined at this (k, omega)"
        )
    return 1.0 / mw


def parameters_from_averages(
    avg: dict[str, complex], k: float, omega: float, route: str = "symmetric"
) -> EffectiveParameters:
    """Constitutive parameters from the seven cell averages.

    The ``direct`` route uses the averages as they appear in the mean-field
    representation; the ``symmetric`` route substitutes the mean identities
    first.  Both must agree to the accuracy of the averages.
    """
    if route not in ROUTES:
        raise ValidationError(f"route must be one of {ROUTES}, got {route!r}")
    if omega == 0:
        raise ValidationError("constitutive parameters need omega != 0")
    Z = impedance_from_averages(avg)
    mw, mv = avg["mean_w"], avg["mean_v"]
    mrw, mrv = avg["mean_rho_w"], avg["mean_rho_v"]
    mfw, mfv = avg["mean_G_dkw"], avg["mean_G_dkv"]
    mG = avg["mean_G"]
    ik, iom = 1j * k, 1j * omega
    if route == "direct":
        density = Z * mrw * (1.0 - ik * mv) + ik * mrv
        stiffness = mG + Z * mfw * mv - mfv
        coupling_strain = (
            (ik / iom) * mG - (Z / iom) * mfw * (1.0 - ik * mv) - (ik / iom) * mfv
        )
        coupling_velocity = iom * (mrv - Z * mrw * mv)
    else:
        density = -(omega**2) * Z * abs(mrw) ** 2 + ik * mrv
        stiffness = mG + Z * abs(mv) ** 2 - mfv
        coupling_velocity = iom * (mrv - Z * mrw * mv)
        coupling_strain = -np.conj(coupling_velocity)
    return EffectiveParameters(
        k=float(k),
        omega=float(omega),
        density=density,
        stiffness=stiffness,
        coupling_strain=coupling_strain,
        coupling_velocity=coupling_velocity,
        route=route,
    )


def effective_parameters(
    cell: UnitCell1D,
    k: float,
    omega: float,
    route: str = "symmetric",
    method: str = "exact",
    order: int = 128,
) -> EffectiveParameters:
    avg = _averages_at(cell, k, omega, method, order)
    return parameters_from_averages(avg, k, omega, route)


def impedance_from_parameters(p: EffectiveParameters) -> complex:
    """Rebuild the impedance from the constitutive parameters.

    Z = -(ik) C (ik) - ik (S2 + conj S2) i omega - omega^2 rho; must equal
    1/<w> at every admissible point.
    """
    k, omega = p.k, p.omega
    coupling = p.coupling_velocity + np.conj(p.coupling_velocity)
    return (
        k**2 * p.stiffness + k * omega * coupling - omega**2 * p.density
    )


def mean_fields(
    cell: UnitCell1D,
    k: float,
    omega: float,
    f: complex,
    gamma: complex,
    method: str = "exact",
    order: int = 128,
) -> MeanFields:
    """Mean kinematic and dynamic fields for constant loads (f, gamma)."""
    avg = _averages_at(cell, k, omega, method, order)
    mu = f * avg["mean_w"] + gamma * avg["mean_v"]
    stress = f * avg["mean_G_dkw"] + gamma * avg["mean_G_dkv"] - gamma * avg["mean_G"]
    momentum = -1j * omega * (f * avg["mean_rho_w"] + gamma * avg["mean_rho_v"])
    return MeanFields(
        k=float(k),
        omega=float(omega),
        f=complex(f),
        gamma=complex(gamma),
        mean_u=mu,
        strain=1j * k * mu,
        velocity=-1j * omega * mu,
        stress=stress,
        momentum=momentum,
    )


def localization_fields(
    cell: UnitCell1D, k: float, omega: float, order: int = 128
) -> tuple[FourierField, FourierField]:
    """Zero-mean fields (A, B) reconstructing u from its mean data.

    A = (<v>/<w>) w - v multiplies the relative mean strain <e - gamma>;
    B = (1/(i omega)) [(1 - w/<w>) + (ik<v>/<w>) w - ik v] multiplies the
    mean velocity.  u = <u> + A <e - gamma> + B <velocity> holds exactly.
    """
    if omega == 0:
        raise ValidationError("localization fields need omega != 0")
    op = assemble(cell, k, order)
    w = solve_w(op, omega)
    v = solve_v(op, omega)
    mw, mv = w.mean, v.mean
    if abs(mw) <= ZERO_MEAN_TOL:
        raise ZeroMeanImpedanceError(
            f"<w> = {mw:.3e} is numerically zero; localization is undefined"
        )
    a_coeffs = (mv / mw) * w.coeffs - v.coeffs
    one = np.zeros_like(w.coeffs)
    one[op.index0] = 1.0
    b_coeffs = (
        one - w.coeffs / mw + (1j * k * mv / mw) * w.coeffs - 1j * k * v.coeffs
    ) / (1j * omega)
    return op.field(a_coeffs), op.field(b_coeffs)


def classify_visibility(
    eigensystem: BlochEigensystem,
    branch: int,
    visibility_tol: float = VISIBILITY_TOL,
) -> VisibilityReport:
    """Visibility of one branch from the means of its eigencluster.

    A branch is visible when some mode of its (near-degenerate) cluster has
    a nonzero cell mean; only visible branches appear as impedance zeros.
    Invisible clusters additionally report whether the dipole load is
    orthogonal to them, which is what keeps the constitutive parameters
    continuous through the eigenvalue.
    """
    lam = eigensystem.eigenvalues
    if not 0 <= branch < lam.size:
        raise ValidationError(f"branch {branch} outside computed spectrum")
    cluster = eigensystem.cluster(branch)
    means = tuple(complex(m) for m in eigensystem.means[cluster])
    dip = eigensystem.projection(eigensystem.operator.dipole_load())
    dips = tuple(complex(d) for d in dip[cluster])
    visible = max(abs(m) for m in means) > visibility_tol
    load_scale = max(np.linalg.norm(eigensystem.operator.dipole_load()), 1e-30)
    solvable = max(abs(d) for d in dips) <= visibility_tol * load_scale
    if not visible and solvable:
        behavior = "continuous"
    elif visible and len(cluster) == 1:
        behavior = "cancellation"
    else:
        behavior = "degenerate"
    return VisibilityReport(
        branch=int(branch),
        cluster=tuple(int(j) for j in cluster),
        eigenvalue=float(lam[branch]),
        mode_means=means,
        dipole_projections=dips,
        visible=bool(visible),
        dipole_solvable=bool(solvable),
        parameter_behavior=behavior,
    )


def dynamic_identity_residuals(
    cell: UnitCell1D,
    k: float,
    omega: float,
    method: str = "exact",
    order: int = 128,
) -> dict[str, float]:
    """Named relative residuals of the exact mean-value identities.

    Covers: realness of <G D_k v>; the three mean identities tying the
    dipole averages to the conjugated monopole averages; the parameter
    symmetries; agreement of the two parameter routes; reconstruction of
    the impedance from the parameters; and the static-dipole (cell-basis)
    expressions for both flux averages.
    """
    from .cell_functions import solve_zeta, solve_zeta_exact

    if method == "exact":
        w = solve_w_exact(cell, k, omega)
        v = solve_v_exact(cell, k, omega)
        zeta = solve_zeta_exact(cell, k)
        mean_rho_w_zeta = complex(
            np.dot(w.weights, _node_rho(cell, w) * w.W_nodes * np.conj(zeta.W_nodes))
        )
        mean_rho_zeta_v = complex(
            np.dot(v.weights, _node_rho(cell, v) * np.conj(zeta.W_nodes) * v.W_nodes)
        )
        mean_zeta = zeta.mean
        mean_flux_zeta = zeta.mean_flux
    else:
        op = assemble(cell, k, order)
        w = solve_w(op, omega)
        v = solve_v(op, omega)
        zeta = solve_zeta(op)
        mean_rho_w_zeta = complex(zeta.coeffs.conj() @ op.mass @ w.coeffs)
        mean_rho_zeta_v = complex(zeta.coeffs.conj() @ op.mass @ v.coeffs)
        mean_zeta = zeta.mean
        mean_flux_zeta = zeta.mean_flux
    avg = averages(w, v, cell)
    mw, mv = avg["mean_w"], avg["mean_v"]
    mrw, mrv = avg["mean_rho_w"], avg["mean_rho_v"]
    mfw, mfv = avg["mean_G_dkw"], avg["mean_G_dkv"]
    mG = avg["mean_G"]
    ik, om2 = 1j * k, omega**2

    res: dict[str, float] = {}
    res["cross_coupling_real"] = abs(mfv.imag) / max(abs(mfv), 1e-30)
    res["mean_identity_dipole"] = abs(ik * mv - 1.0 - om2 * np.conj(mrw)) / max(
        abs(ik * mv), 1.0
    )
    res["mean_identity_flux"] = abs(
        ik * mfv - ik * mG - om2 * np.conj(mrv)
    ) / max(abs(ik * mfv), 1.0)
    res["mean_identity_monopole_flux"] = abs(mfw - np.conj(mv)) / max(abs(mv), 1e-30)

    p_direct = parameters_from_averages(avg, k, omega, "direct")
    p_sym = parameters_from_averages(avg, k, omega, "symmetric")
    scale = max(abs(p_sym.density), abs(p_sym.stiffness), 1e-30)
    res["route_agreement"] = (
        max(
            abs(p_direct.density - p_sym.density),
            abs(p_direct.stiffness - p_sym.stiffness),
            abs(p_direct.coupling_strain - p_sym.coupling_strain),
            abs(p_direct.coupling_velocity - p_sym.coupling_velocity),
        )
        / scale
    )
    for name, value in p_direct.symmetry_residuals().items():
        res[f"symmetry_{name}"] = value
    Z = impedance_from_averages(avg)
    for label, p in (("direct", p_direct), ("symmetric", p_sym)):
        res[f"impedance_reconstruction_{label}"] = abs(
            impedance_from_parameters(p) - Z
        ) / max(abs(Z), 1e-30)

    # flux averages through the static dipole response
    res["cell_basis_monopole"] = abs(
        mfw - np.conj(mean_zeta) - om2 * mean_rho_w_zeta
    ) / max(abs(mfw), 1e-30)
    res["cell_basis_dipole"] = abs(
        mfv - np.conj(mean_flux_zeta) - om2 * mean_rho_zeta_v
    ) / max(abs(mfv), 1e-30)
    return res


def _node_rho(cell: UnitCell1D, f) -> np.ndarray:
    breaks = cell.breakpoints
    idx = np.clip(
        np.searchsorted(breaks, f.nodes, side="right") - 1, 0, len(cell.phases) - 1
    )
    return cell.values("rho")[idx]

"""Exact closed-form cell responses for piecewise-constant 1D cells.

On each homogeneous segment the substitution W(x) = exp(ikx) u(x) turns the
Bloch cell equation

    -omega^2 rho u - D_k (G (D_k u - gamma)) = f,   D_k = d/dx + ik,

into a constant-coefficient ODE  -(G W')' - omega^2 rho W = g(x)  with
g = f exp(ikx) for the monopole load (f = 1) and g = -ik G exp(ikx) for the
unit dipole load (gamma = 1).  Segment solutions are propagated with the
trigonometric fundamental matrix, interface and Floquet conditions close a
2x2 linear system, and cell averages are taken with per-segment
Gauss-Legendre rules whose error is far below roundoff for the smooth
integrands involved.  This module is the reference oracle the spectral
route is validated against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._piecewise import gauss_nodes_weights
from .errors import ResonanceError, ValidationError
from .material import UnitCell1D

__all__ = [
    "ExactField",
    "solve_monopole_exact",
    "solve_dipole_exact",
    "solve_static_dipole_exact",
    "dispersion_function",
    "cell_average",
]

#: nodes per segment for cell averages / for the in-segment source integral
_AVG_NODES = 48
_SRC_NODES = 32

#: relative reciprocal-condition floor below which the Floquet closure is
#: treated as resonant
_RCOND_FLOOR = 1e-10


def _segment_q(G: float, rho: float, omega: float) -> float:
    return float(omega) * np.sqrt(rho / G)


def _propagator(G: float, rho: float, omega: float, delta: np.ndarray):
    """Entries of the fundamental matrix over a step delta (vectorized)."""
    q = _segment_q(G, rho, omega)
    c = np.cos(q * delta)
    s = delta * np.sinc(q * delta / np.pi)  # sin(q d)/q, valid at q = 0
    return c, s


def _source_state(
    G: float,
    rho: float,
    omega: float,
    k: float,
    x_left: float,
    amp: complex,
    t: np.ndarray,
) -> np.ndarray:
    """Particular contribution to (W, GW') at local offsets t.

    Computes -int_0^t [s(t-u)/G; cos(q(t-u))] amp exp(ik(x_left+u)) du
    with a fixed Gauss rule on the scaled interval.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((t.size, 2), dtype=complex)
    if amp == 0:
        return out
    nodes01, w01 = np.polynomial.legendre.leggauss(_SRC_NODES)
    nodes01 = 0.5 * (nodes01 + 1.0)
    w01 = 0.5 * w01
    u = t[:, None] * nodes01[None, :]
    w = t[:, None] * w01[None, :]
    g = amp * np.exp(1j * k * (x_left + u))
    c, s = _propagator(G, rho, omega, t[:, None] - u)
    out[:, 0] = -np.sum(w * s * g, axis=1) / G
    out[:, 1] = -np.sum(w * c * g, axis=1)
    return out


def _step_matrix(G: float, rho: float, omega: float, delta: float) -> np.ndarray:
    c, s = _propagator(G, rho, omega, np.asarray(delta, dtype=float))
    return np.array(
        [[c, s / G], [-rho * omega**2 * s, c]], dtype=complex
    )


@dataclass(eq=False)
class ExactField:
    """Closed-form cell response with precomputed quadrature data.

    Attributes hold the solution in the W = exp(ikx) u gauge: ``starts[j]``
    is (W, GW') at the left end of segment j; node arrays carry the values
    at the per-segment Gauss points used for every cell average.
    """

    cell: UnitCell1D
    k: float
    omega: float
    kind: str
    starts: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    W_nodes: np.ndarray
    GWp_nodes: np.ndarray
    _bloch_phase: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self._bloch_phase = np.exp(-1j * self.k * self.nodes)

    # -- pointwise evaluation ------------------------------------------------

    def state(self, x: float) -> tuple[complex, complex]:
        """(W, GW') at a point of the unit interval."""
        xw = float(np.mod(x, 1.0))
        breaks = self.cell.breakpoints
        j = min(int(np.searchsorted(breaks, xw, side="right") - 1), len(self.cell.phases) - 1)
        p = self.cell.phases[j]
        t = xw - breaks[j]
        amp = _load_amplitude(self.kind, p.G, self.k)
        y = _step_matrix(p.G, p.rho, self.omega, t) @ self.starts[j]
        y = y + _source_state(p.G, p.rho, self.omega, self.k, breaks[j], amp, np.array([t]))[0]
        return complex(y[0]), complex(y[1])

    def value(self, x: float) -> complex:
        """Physical field u(x) = exp(-ikx) W(x)."""
        W, _ = self.state(x)
        return np.exp(-1j * self.k * x) * W

    def flux(self, x: float) -> complex:
        """G D_k u at x (does not subtract the dipole load)."""
        _, GWp = self.state(x)
        return np.exp(-1j * self.k * x) * GWp

    # -- cell averages ---------------------------------------------------------

    @property
    def u_nodes(self) -> np.ndarray:
        return self._bloch_phase * self.W_nodes

    @property
    def mean(self) -> complex:
        """<u>"""
        return complex(np.dot(self.weights, self.u_nodes))

    @property
    def mean_rho(self) -> complex:
        """<rho u>"""
        rho = _per_node_values(self.cell, "rho", self.nodes)
        return complex(np.dot(self.weights, rho * self.u_nodes))

    @property
    def mean_flux(self) -> complex:
        """<G D_k u>"""
        return complex(np.dot(self.weights, self._bloch_phase * self.GWp_nodes))


def _per_node_values(cell: UnitCell1D, fieldname: str, nodes: np.ndarray) -> np.ndarray:
    breaks = cell.breakpoints
    idx = np.clip(np.searchsorted(breaks, nodes, side="right") - 1, 0, len(cell.phases) - 1)
    return cell.values(fieldname)[idx]


def product_average(
    weight: np.ndarray | float, *fields_or_arrays: np.ndarray, weights: np.ndarray
) -> complex:
    """Quadrature of a pointwise product over shared nodes."""
    prod = np.asarray(weight)
    for arr in fields_or_arrays:
        prod = prod * arr
    return complex(np.dot(weights, prod))


def _load_amplitude(kind: str, G: float, k: float) -> complex:
    if kind == "monopole":
        return 1.0 + 0.0j
    if kind in ("dipole", "static_dipole"):
        return -1j * k * G
    raise ValidationError(f"unknown load kind {kind!r}")


def _solve(cell: UnitCell1D, k: float, omega: float, kind: str) -> ExactField:
    breaks = cell.breakpoints
    P = len(cell.phases)
    dipole = kind in ("dipole", "static_dipole")

    # march the affine map y_end = M z + s across the cell
    M = np.eye(2, dtype=complex)
    s = np.zeros(2, dtype=complex)
    seg_M: list[np.ndarray] = []
    seg_s: list[np.ndarray] = []
    for j in range(P):
        seg_M.append(M.copy())
        seg_s.append(s.copy())
        p = cell.phases[j]
        amp = _load_amplitude(kind, p.G, k)
        F = _step_matrix(p.G, p.rho, omega, p.length)
        part = _source_state(p.G, p.rho, omega, k, breaks[j], amp, np.array([p.length]))[0]
        M = F @ M
        s = F @ s + part
        if j + 1 < P and dipole:
            dG = cell.phases[j + 1].G - p.G
            s = s + np.array([0.0, np.exp(1j * k * breaks[j + 1]) * dG], dtype=complex)

    # Floquet closure: z = exp(-ik) (M z + s) + d0
    d0 = np.zeros(2, dtype=complex)
    if dipole:
        d0[1] = cell.phases[0].G - cell.phases[-1].G
    phase = np.exp(-1j * k)
    A = np.eye(2, dtype=complex) - phase * M
    rhs = phase * s + d0
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= _RCOND_FLOOR * max(sv[0], 1.0):
        raise ResonanceError(
            f"(k, omega) = ({k}, {omega}) lies on a Bloch branch; "
            "the cell response is resonant",
            eigenvalue=omega**2,
            omega_sq=omega**2,
        )
    z = np.linalg.solve(A, rhs)

    starts = np.array([seg_M[j] @ z + seg_s[j] for j in range(P)])

    # per-segment Gauss nodes and node states for cell averages
    all_nodes, all_w, all_W, all_GWp = [], [], [], []
    for j in range(P):
        p = cell.phases[j]
        amp = _load_amplitude(kind, p.G, k)
        t, w = gauss_nodes_weights(_AVG_NODES, 0.0, p.length)
        c, sn = _propagator(p.G, p.rho, omega, t)
        y0, y1 = starts[j]
        W = c * y0 + (sn / p.G) * y1
        GWp = (-p.rho * omega**2 * sn) * y0 + c * y1
        part = _source_state(p.G, p.rho, omega, k, breaks[j], amp, t)
        W = W + part[:, 0]
        GWp = GWp + part[:, 1]
        all_nodes.append(breaks[j] + t)
        all_w.append(w)
        all_W.append(W)
        all_GWp.append(GWp)

    return ExactField(
        cell=cell,
        k=float(k),
        omega=float(omega),
        kind=kind,
        starts=starts,
        nodes=np.concatenate(all_nodes),
        weights=np.concatenate(all_w),
        W_nodes=np.concatenate(all_W),
        GWp_nodes=np.concatenate(all_GWp),
    )


def solve_monopole_exact(cell: UnitCell1D, k: float, omega: float) -> ExactField:
    """Cell response w to a unit mean load f = 1 (off resonance)."""
    return _solve(cell, k, omega, "monopole")


def solve_dipole_exact(cell: UnitCell1D, k: float, omega: float) -> ExactField:
    """Cell response v to a unit dipole load (off resonance)."""
    return _solve(cell, k, omega, "dipole")


def solve_static_dipole_exact(cell: UnitCell1D, k: float) -> ExactField:
    """Static dipole response zeta (the omega = 0 dipole solve, k != 0)."""
    return _solve(cell, k, 0.0, "static_dipole")


def dispersion_function(cell: UnitCell1D, omega: float) -> float:
    """Half-trace D(omega) of the cell monodromy matrix.

    Bloch waves exist where D(omega) = cos k; pass bands are |D| <= 1.
    Valid for any number of phases.
    """
    M = np.eye(2)
    for p in cell.phases:
        q = _segment_q(p.G, p.rho, omega)
        c = np.cos(q * p.length)
        s = p.length * np.sinc(q * p.length / np.pi)
        M = np.array([[c, s / p.G], [-p.rho * omega**2 * s, c]]) @ M
    return float(0.5 * np.trace(M))


def cell_average(cell: UnitCell1D, fn: Callable[[np.ndarray], np.ndarray]) -> complex:
    """Per-segment Gauss quadrature of a piecewise-smooth integrand."""
    breaks = cell.breakpoints
    total = 0.0 + 0.0j
    for j in range(len(cell.phases)):
        x, w = gauss_nodes_weights(_AVG_NODES, breaks[j], breaks[j + 1])
        total += np.dot(w, fn(x))
    return complex(total)

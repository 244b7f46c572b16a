"""Command-line surface: coefficients, dispersion curves, polynomial maps,
and the verification runner.

Exit codes: 0 success, 1 verification failure, 2 config error, 3 numerical
error (resonance, solvability, zero mean impedance).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._svg import Frame, axes, document, heat_cells, legend, polyline
from .asymptotics import (
    HomogCoefficients,
    dipole_mean_n2,
    homogenize,
    identity_suite,
    modulation_m2,
    two_scale_impedance,
    two_scale_root,
    willis_impedance_order2,
)
from .dispersion import (
    exact_branch,
    order2_branch,
    quasistatic_branch,
    spectral_acoustic_branch,
    willis_exact_root,
)
from .errors import ConfigError, WillisHomogError
from .exact import solve_dipole_exact, solve_monopole_exact
from .material import (
    UnitCell1D,
    bilaminate,
    cell_digest,
    cell_from_dict,
    cell_to_dict,
    homogeneous,
)
from .willis import dynamic_identity_residuals, effective_impedance

THREADS_ENV = "WILLIS_HOMOG_THREADS"

_DEFAULT_TOLERANCES = {
    "exact": 1e-8,
    "spectral": 1e-5,
    "triangle": 1e-6,
    "polynomial_match": 1e-8,
    "root_construction": 1e-10,
    "root_dual_route": 1e-9,
}

_PRESETS: dict[str, dict] = {
    "fig2": {
        "cell": {"bilaminate": [0.1, 0.1]},
        "cell_label": "bilaminate(0.1,0.1)",
        "k_range": [0.0, math.pi, 64],
        "extra_cells": [
            {
                "label": "bilaminate(0.5,0.5) [non-paper]",
                "cell": {"bilaminate": [0.5, 0.5]},
            }
        ],
    },
    "fig3": {
        "cell": {"bilaminate": [0.1, 0.1]},
        "cell_label": "bilaminate(0.1,0.1)",
        "k_range": [0.0, 2.0 * math.pi, 96],
        "omega_range": [0.0, 2.0 * math.pi, 96],
    },
    "fig4": {
        "cell": {"bilaminate": [0.1, 0.1]},
        "cell_label": "bilaminate(0.1,0.1)",
        "k_range": [0.0, 2.0 * math.pi, 96],
        "omega_range": [0.0, 2.0 * math.pi, 96],
    },
}

_CONFIG_KEYS = {
    "cell",
    "cell_label",
    "extra_cells",
    "basis_n",
    "route",
    "k_range",
    "omega_range",
    "probe",
    "tolerances",
}


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters shared by every subcommand."""

    cell: UnitCell1D
    cell_label: str
    extra_cells: tuple[tuple[str, UnitCell1D], ...]
    basis_n: int
    route: str
    k_range: tuple[float, float, int]
    omega_range: tuple[float, float, int]
    probe: tuple[float, float]
    tolerances: dict[str, float]

    def k_grid(self) -> np.ndarray:
        lo, hi, n = self.k_range
        return np.linspace(lo, hi, n, endpoint=False)

    def omega_grid(self) -> np.ndarray:
        lo, hi, n = self.omega_range
        return np.linspace(lo, hi, n, endpoint=False)


def _parse_cell(spec, where: str) -> UnitCell1D:
    if isinstance(spec, dict):
        try:
            if "bilaminate" in spec:
                gr, gg = spec["bilaminate"]
                return bilaminate(float(gr), float(gg))
            if "homogeneous" in spec:
                g, rho = spec["homogeneous"]
                return homogeneous(float(g), float(rho))
            if "phases" in spec:
                return cell_from_dict(spec)
        except (TypeError, ValueError, WillisHomogError) as exc:
            raise ConfigError(f"config field {where!r}: {exc}") from exc
    raise ConfigError(
        f"config field {where!r}: expected {{'phases': [...]}}, "
        "{'bilaminate': [g_rho, g_G]} or {'homogeneous': [G, rho]}"
    )


def _parse_range(value, where: str, default: tuple[float, float, int]) -> tuple[float, float, int]:
    if value is None:
        return default
    try:
        lo, hi, n = float(value[0]), float(value[1]), int(value[2])
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"config field {where!r}: expected [min, max, steps]") from exc
    if not (hi > lo):
        raise ConfigError(f"config field {where!r}: range must be ordered, got [{lo}, {hi}]")
    if n < 1:
        raise ConfigError(f"config field {where!r}: steps must be >= 1, got {n}")
    return (lo, hi, n)


def build_config(data: dict) -> RunConfig:
    """Validate a config dict (preset already merged) into a RunConfig."""
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if "cell" not in data:
        raise ConfigError("config field 'cell' is required (or use --preset)")
    cell = _parse_cell(data["cell"], "cell")
    label = str(data.get("cell_label", cell_digest(cell)))

    extras = []
    for i, entry in enumerate(data.get("extra_cells", [])):
        if not isinstance(entry, dict) or "cell" not in entry:
            raise ConfigError(f"config field 'extra_cells[{i}]': expected {{'label', 'cell'}}")
        extra_cell = _parse_cell(entry["cell"], f"extra_cells[{i}].cell")
        extras.append((str(entry.get("label", cell_digest(extra_cell))), extra_cell))

    basis_n = data.get("basis_n", 128)
    if not isinstance(basis_n, int) or basis_n < 4:
        raise ConfigError(f"config field 'basis_n': must be an integer >= 4, got {basis_n!r}")

    route = data.get("route", "exact")
    if route not in ("exact", "spectral"):
        raise ConfigError(f"config field 'route': must be 'exact' or 'spectral', got {route!r}")

    probe_raw = data.get("probe", [0.5, 0.2])
    try:
        probe = (float(probe_raw[0]), float(probe_raw[1]))
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError("config field 'probe': expected [k, omega]") from exc

    tol = dict(_DEFAULT_TOLERANCES)
    for key, value in dict(data.get("tolerances", {})).items():
        if key not in _DEFAULT_TOLERANCES:
            raise ConfigError(f"config field 'tolerances.{key}': unknown tolerance")
        tol[key] = float(value)
        if tol[key] <= 0.0:
            raise ConfigError(f"config field 'tolerances.{key}': must be positive")

    return RunConfig(
        cell=cell,
        cell_label=label,
        extra_cells=tuple(extras),
        basis_n=basis_n,
        route=route,
        k_range=_parse_range(data.get("k_range"), "k_range", (0.0, math.pi, 64)),
        omega_range=_parse_range(
            data.get("omega_range"), "omega_range", (0.0, 2.0 * math.pi, 96)
        ),
        probe=probe,
        tolerances=tol,
    )


def load_config(path: str | None, preset: str | None, basis_n: int | None) -> RunConfig:
    data: dict = {}
    if preset is not None:
        if preset not in _PRESETS:
            raise ConfigError(f"unknown preset {preset!r}, expected one of {sorted(_PRESETS)}")
        data.update(_PRESETS[preset])
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path}: invalid JSON at line {exc.lineno}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path}: top level must be a JSON object")
        data.update(loaded)
    if not data:
        raise ConfigError("need --config and/or --preset")
    if basis_n is not None:
        data["basis_n"] = basis_n
    return build_config(data)


# ---------------------------------------------------------------------------
# output helpers


def _worker_count() -> int:
    cap = os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = max(1, min(cap, int(env)))
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    return cap


def _map_ordered(fn, items):
    """Apply fn across items on the worker pool, results in input order."""
    items = list(items)
    workers = _worker_count()
    if workers == 1 or len(items) < 4:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _csv_header(config: RunConfig, tolerances: dict[str, float] | None = None) -> list[str]:
    tol = tolerances if tolerances is not None else config.tolerances
    return [
        f"# willis-homog {__version__}",
        f"# cell: {cell_digest(config.cell)} {json.dumps(cell_to_dict(config.cell), separators=(',', ':'))}",
        f"# basis_n: {config.basis_n}",
        f"# tolerances: {json.dumps(tol, sort_keys=True, separators=(',', ':'))}",
    ]


def _write_csv(path: Path, header: list[str], columns: list[str], rows) -> None:
    lines = list(header)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid_frame(k: np.ndarray, w: np.ndarray) -> Frame:
    dk = float(k[1] - k[0]) if k.size > 1 else 1.0
    dw = float(w[1] - w[0]) if w.size > 1 else 1.0
    return Frame(
        x_min=float(k[0]),
        x_max=float(k[-1]) + dk,
        y_min=float(w[0]),
        y_max=float(w[-1]) + dw,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_coeffs(config: RunConfig, args) -> int:
    out = _out_dir(args)
    _, coeffs = homogenize(config.cell, method=config.route, order=config.basis_n)
    record = {
        "version": __version__,
        "digest": cell_digest(config.cell),
        "cell": cell_to_dict(config.cell),
        "route": config.route,
        "basis_n": config.basis_n if config.route == "spectral" else None,
        "coefficients": coeffs.to_dict(),
    }
    (out / "coeffs.json").write_text(
        json.dumps(record, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _write_csv(
        out / "coeffs.csv",
        _csv_header(config),
        ["name", "value"],
        list(coeffs.to_dict().items()),
    )
    print(f"cell {record['digest']} route={config.route}")
    for name, value in coeffs.to_dict().items():
        print(f"  {name:10s} = {value:.12g}")
    print(f"wrote {out / 'coeffs.json'} and {out / 'coeffs.csv'}")
    return 0


def cmd_dispersion(config: RunConfig, args) -> int:
    out = _out_dir(args)
    k = config.k_grid()
    cells = [(config.cell_label, config.cell), *config.extra_cells]
    rows = []
    curves = []
    for label, cell in cells:
        _, coeffs = homogenize(cell, method="exact")
        branches = [
            exact_branch(cell, k),
            order2_branch(coeffs, k),
            quasistatic_branch(coeffs, k),
        ]
        for branch in branches:
            curves.append((label, branch))
            for ki, wi in zip(branch.k, branch.omega):
                rows.append((label, branch.label, float(ki), float(wi)))
    _write_csv(
        out / "dispersion.csv",
        _csv_header(config),
        ["cell", "branch", "k", "omega"],
        rows,
    )

    w_max = max(float(np.max(b.omega)) for _, b in curves if b.omega.size)
    frame = Frame(x_min=float(k[0]), x_max=float(k[-1]), y_min=0.0, y_max=1.05 * w_max)
    colors = {"exact": "#1f77b4", "order2": "#d62728", "quasistatic": "#2ca02c"}
    body = axes(frame, "k", "omega")
    for label, branch in curves:
        dash = "" if label == config.cell_label else "6,4"
        if branch.omega.size:
            body.append(polyline(frame, branch.k, branch.omega, colors[branch.label], dash=dash))
    body += legend(
        frame,
        [(f"{lbl}: {br}", colors[br], "" if lbl == config.cell_label else "6,4")
         for lbl, b in curves for br in [b.label]],
    )
    (out / "dispersion.svg").write_text(
        document(frame, body, "lowest dispersion branch", desc=cell_digest(config.cell)),
        encoding="utf-8",
    )
    print(f"wrote {out / 'dispersion.csv'} and {out / 'dispersion.svg'}")
    return 0


def cmd_modulation_map(config: RunConfig, args) -> int:
    out = _out_dir(args)
    _, coeffs = homogenize(config.cell, method="exact")
    k = config.k_grid()
    w = config.omega_grid()

    def row(ki: float) -> np.ndarray:
        return modulation_m2(coeffs, ki, w)

    m2 = np.asarray(_map_ordered(row, k))
    rows = [
        (float(ki), float(wj), float(m2[i, j]), float(abs(m2[i, j])))
        for i, ki in enumerate(k)
        for j, wj in enumerate(w)
    ]
    _write_csv(
        out / "modulation.csv",
        _csv_header(config),
        ["k", "omega", "re_m2", "abs_m2"],
        rows,
    )
    frame = _grid_frame(k, w)
    for name, values in (("modulation_re.svg", m2), ("modulation_abs.svg", np.abs(m2))):
        body = heat_cells(frame, k, w, values) + axes(frame, "k", "omega")
        (out / name).write_text(
            document(frame, body, name.removesuffix(".svg"), desc=cell_digest(config.cell)),
            encoding="utf-8",
        )
    print(f"wrote {out / 'modulation.csv'}, {out / 'modulation_re.svg'}, {out / 'modulation_abs.svg'}")
    return 0


def cmd_impedance_map(config: RunConfig, args) -> int:
    out = _out_dir(args)
    _, coeffs = homogenize(config.cell, method="exact")
    k = config.k_grid()
    w = config.omega_grid()

    def row(ki: float) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.asarray(two_scale_impedance(coeffs, ki, w), dtype=float),
            np.asarray(modulation_m2(coeffs, ki, w), dtype=float),
        )

    blocks = _map_ordered(row, k)
    cal = np.asarray([b[0] for b in blocks])
    m2 = np.asarray([b[1] for b in blocks])
    m2_scale = 1.0 + np.abs(np.subtract.outer(coeffs.s_g * k**2, coeffs.s_rho * w**2))
    near_zero = np.abs(m2) <= 1e-9 * m2_scale
    z2 = np.where(near_zero, np.nan, cal / np.where(near_zero, 1.0, m2))
    sign = np.sign(m2)
    crossing = np.zeros_like(m2, dtype=bool)
    crossing[:-1, :] |= sign[:-1, :] != sign[1:, :]
    crossing[1:, :] |= sign[1:, :] != sign[:-1, :]
    crossing[:, :-1] |= sign[:, :-1] != sign[:, 1:]
    crossing[:, 1:] |= sign[:, 1:] != sign[:, :-1]

    rows = [
        (
            float(ki),
            float(wj),
            float(cal[i, j]),
            float(m2[i, j]),
            float(z2[i, j]),
            bool(near_zero[i, j]),
            bool(crossing[i, j]),
        )
        for i, ki in enumerate(k)
        for j, wj in enumerate(w)
    ]
    _write_csv(
        out / "impedance.csv",
        _csv_header(config),
        ["k", "omega", "cal_z2", "m2", "z2", "near_zero", "zero_crossing"],
        rows,
    )
    frame = _grid_frame(k, w)
    for name, values, flags in (
        ("impedance_z2.svg", z2, near_zero | crossing),
        ("impedance_cal.svg", cal, None),
    ):
        body = heat_cells(frame, k, w, values, flagged=flags) + axes(frame, "k", "omega")
        (out / name).write_text(
            document(frame, body, name.removesuffix(".svg"), desc=cell_digest(config.cell)),
            encoding="utf-8",
        )
    print(f"wrote {out / 'impedance.csv'}, {out / 'impedance_z2.svg'}, {out / 'impedance_cal.svg'}")
    return 0


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class CheckResult:
    name: str
    route: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


@dataclass(frozen=True)
class VerificationReport:
    """Named residual checks; overall pass iff every check passes."""

    version: str
    digest: str
    basis_n: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "digest": self.digest,
            "basis_n": self.basis_n,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "route": c.route,
                    "residual": float(c.residual),
                    "tolerance": float(c.tolerance),
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }

    def table(self) -> str:
        lines = [f"{'check':52s} {'route':9s} {'residual':>12s} {'tolerance':>10s}  status"]
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            lines.append(
                f"{c.name:52s} {c.route:9s} {c.residual:12.3e} {c.tolerance:10.1e}  {status}"
            )
        n_fail = sum(not c.passed for c in self.checks)
        verdict = "PASS" if self.passed else f"FAIL ({n_fail} failing)"
        lines.append(f"overall: {verdict} ({len(self.checks)} checks)")
        return "\n".join(lines)


def build_verification_report(
    cell: UnitCell1D,
    basis_n: int = 128,
    tolerances: dict[str, float] | None = None,
    probe: tuple[float, float] = (0.5, 0.2),
    coefficients: HomogCoefficients | None = None,
) -> VerificationReport:
    """Run the dynamic, static, dispersion and polynomial check suites.

    ``coefficients`` overrides the exact-route table (harness hook for
    mutation testing); by default it is computed from the cell.
    """
    tol = dict(_DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    checks: list[CheckResult] = []
    k_probe, w_probe = probe

    for route, route_tol, order in (
        ("exact", tol["exact"], None),
        ("spectral", tol["spectral"], basis_n),
    ):
        dyn = dynamic_identity_residuals(
            cell, k_probe, w_probe, method=route, order=order or 128
        )
        for name, value in dyn.items():
            checks.append(CheckResult(f"dynamic/{name}", route, float(value), route_tol))
        fields, coeffs_route = homogenize(cell, method=route, order=order or 128)
        if route == "exact" and coefficients is not None:
            coeffs_route = coefficients
        static = identity_suite(cell, fields, coeffs_route)
        for name, value in static.items():
            checks.append(CheckResult(f"static/{name}", route, float(value), route_tol))

    coeffs = coefficients
    if coeffs is None:
        _, coeffs = homogenize(cell, method="exact")

    # oracle triangle at two wavenumbers
    spectral_disp_tol = max(tol["spectral"], 1.0 / basis_n)
    for k in (0.5, 1.5):
        w_exact = exact_branch(cell, np.array([k])).omega[0]
        w_root = willis_exact_root(cell, k)
        w_spec = spectral_acoustic_branch(cell, np.array([k]), order=basis_n).omega[0]
        checks.append(
            CheckResult(f"triangle/impedance_root_k={k:g}", "exact", abs(w_exact - w_root), tol["triangle"])
        )
        checks.append(
            CheckResult(
                f"triangle/spectral_branch_k={k:g}", "spectral", abs(w_exact - w_spec), spectral_disp_tol
            )
        )

    # polynomial observables against the exact oracle in the long-wave window
    eps, khat, what = 0.02, 1.0, 0.3
    kk, ww = eps * khat, eps * what
    z_exact = effective_impedance(cell, kk, ww, method="exact")
    z2 = willis_impedance_order2(coeffs, kk, ww, route="modulated")
    checks.append(
        CheckResult(
            "polynomial/impedance_matches_oracle",
            "exact",
            abs(z_exact - z2) / abs(z_exact),
            tol["polynomial_match"],
        )
    )
    cal = two_scale_impedance(coeffs, kk, ww)
    mean_w = solve_monopole_exact(cell, kk, ww).mean
    mean_v = solve_dipole_exact(cell, kk, ww).mean
    checks.append(
        CheckResult(
            "polynomial/modulation_matches_oracle",
            "exact",
            abs(cal * mean_w - modulation_m2(coeffs, kk, ww)),
            tol["polynomial_match"],
        )
    )
    n2 = dipole_mean_n2(coeffs, kk, ww)
    checks.append(
        CheckResult(
            "polynomial/dipole_matches_oracle",
            "exact",
            abs(cal * mean_v - n2) / abs(n2),
            tol["polynomial_match"],
        )
    )

    # zero-level co-location of the two impedance routes at two-scale roots
    worst_a = worst_b = 0.0
    for k in np.geomspace(2e-5, 1.2e-4, 20):
        w = two_scale_root(coeffs, float(k))
        scale = (
            abs(coeffs.mu0) * k**2
            + abs(coeffs.rho0) * w**2
            + abs(coeffs.mu2) * k**4
            + abs(coeffs.rho2) * k**2 * w**2
        )
        za = willis_impedance_order2(coeffs, k, w, route="modulated")
        zb = willis_impedance_order2(coeffs, k, w, route="mean")
        worst_a = max(worst_a, abs(za) / scale)
        worst_b = max(worst_b, abs(za - zb) / scale)
    checks.append(
        CheckResult("polynomial/root_construction", "exact", worst_a, tol["root_construction"])
    )
    checks.append(
        CheckResult("polynomial/root_dual_route", "exact", worst_b, tol["root_dual_route"])
    )

    return VerificationReport(
        version=__version__,
        digest=cell_digest(cell),
        basis_n=basis_n,
        checks=tuple(checks),
    )


def cmd_verify(config: RunConfig, args) -> int:
    out = _out_dir(args)
    report = build_verification_report(
        config.cell,
        basis_n=config.basis_n,
        tolerances=config.tolerances,
        probe=config.probe,
    )
    print(report.table())
    (out / "verification.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {out / 'verification.json'}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# entry point

_COMMANDS = {
    "coeffs": cmd_coeffs,
    "dispersion": cmd_dispersion,
    "modulation-map": cmd_modulation_map,
    "impedance-map": cmd_impedance_map,
    "verify": cmd_verify,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="willis-homog",
        description="Effective dynamic description of 1D periodic cells.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("coeffs", "homogenized coefficient table of a cell"),
        ("dispersion", "lowest branch: exact, order-2 and quasistatic"),
        ("modulation-map", "source modulation polynomial on a (k, omega) grid"),
        ("impedance-map", "paired impedance polynomials on a (k, omega) grid"),
        ("verify", "run the identity and oracle check suites"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config path")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--basis-n", type=int, dest="basis_n", help="Fourier truncation order")
        p.add_argument("--preset", choices=sorted(_PRESETS), help="paper-pinned parameter set")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.preset, args.basis_n)
        return _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except WillisHomogError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3

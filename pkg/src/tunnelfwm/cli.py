"""Command-line front end.

Every subcommand reads the medium and drive from ``--config`` (missing keys
fall back to the bundled preset), writes its artifacts into the output
directory and prints one summary line per file. Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import bandstructure, dispersion, oracle, scan, spectral, transform
from .params import (
    HBAR_MEV_PS,
    DriveSpec,
    MediumSpec,
    ParameterError,
    default_parameters,
    drive_from_dict,
    dump_parameters,
    load_parameters,
    load_preset,
    medium_from_dict,
    to_dimensionless,
)

OUT_ENV = "TUNNELFWM_OUT_DIR"
CSV_HEADER = ("eta", "z_um", "rho_tunneling", "rho_baseline", "enhancement")
UNDEFINED = "undefined"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (
    spectral.PoleError,
    oracle.OracleError,
    dispersion.NoRootError,
    dispersion.AnomalousDispersionError,
    FloatingPointError,
    ArithmeticError,
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to rerun a subcommand; no seeds, fully deterministic."""

    command: str
    medium: MediumSpec
    drive: DriveSpec
    options: dict[str, Any] = field(default_factory=dict)
    out_dir: str = "."

    def to_dict(self) -> dict[str, Any]:
        return {"command": self.command, **dump_parameters(self.medium, self.drive),
                "options": dict(self.options), "out_dir": self.out_dir}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        extra = set(data) - {"command", "medium", "drive", "options", "out_dir"}
        if extra:
            raise ConfigError(f"unknown run-config keys: {sorted(extra)}")
        return cls(command=data["command"], medium=medium_from_dict(data["medium"]),
                   drive=drive_from_dict(data["drive"]), options=dict(data.get("options", {})),
                   out_dir=data.get("out_dir", "."))


# --- writers --------------------------------------------------------------------

def _fmt(x: float | None) -> str:
    return UNDEFINED if x is None else "%.17g" % x


def write_csv(result: scan.ScanResult | None, path: str | Path) -> Path:
    """Long-format CSV with 17 significant digits and LF line endings."""
    path = Path(path)
    lines = [",".join(CSV_HEADER)]
    if result is not None:
        lines += [",".join(_fmt(v) for v in row) for row in result.rows()]
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    return path


def read_csv(path: str | Path) -> list[tuple[float | None, ...]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ConfigError(f"{path}: unexpected header {header}")
        return [tuple(None if v == UNDEFINED else float(v) for v in row) for row in reader]


def _write_table(path: Path, header: Sequence[str], rows) -> Path:
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
    path.write_bytes(("\n".join(lines) + "\n").encode("ascii"))
    return path


def _write_json(path: Path, data: Any) -> Path:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
LOG_FLOOR = -30.0


def write_svg(result: scan.ScanResult, path: str | Path, title: str = "") -> Path:
    """Line chart of log10(rho): one polyline per (series, variant)."""
    w, h, left, right, top, bottom = 640, 420, 70, 20, 30, 50
    x = result.axis_values
    curves = []
    for i, s in enumerate(result.series):
        curves.append((f"{_series_label(result, s)} tunneling", i, result.rho_tunneling[i], ""))
        if result.rho_baseline is not None:
            curves.append((f"{_series_label(result, s)} baseline", i, result.rho_baseline[i], "6,4"))
    logs = []
    for _, _, y, _ in curves:
        with np.errstate(divide="ignore", invalid="ignore"):
            ly = np.log10(y)
        logs.append(np.where(np.isfinite(ly), np.maximum(ly, LOG_FLOOR), np.nan))
    finite = np.concatenate([v[np.isfinite(v)] for v in logs] + [np.array([LOG_FLOOR])])
    ymin, ymax = float(finite.min()), float(finite.max())
    if ymax - ymin < 1e-12:
        ymax = ymin + 1.0
    xmin, xmax = float(x.min()), float(x.max())
    if xmax - xmin < 1e-12:
        xmax = xmin + 1.0

    def px(v):
        return left + (v - xmin) / (xmax - xmin) * (w - left - right)

    def py(v):
        return h - bottom - (v - ymin) / (ymax - ymin) * (h - top - bottom)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
           f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
           f'<line x1="{left}" y1="{h - bottom}" x2="{w - right}" y2="{h - bottom}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{h - bottom}" stroke="black"/>']
    for v in np.linspace(xmin, xmax, 5):
        out.append(f'<text x="{px(v):.2f}" y="{h - bottom + 16}" font-size="11" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(ymin, ymax, 5):
        out.append(f'<text x="{left - 6}" y="{py(v) + 4:.2f}" font-size="11" text-anchor="end">{v:.3g}</text>')
    xlabel = "eta (omega * tau)" if result.axis == "eta" else "z (um)"
    out.append(f'<text x="{(left + w - right) / 2}" y="{h - 10}" font-size="13" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{(top + h - bottom) / 2}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {(top + h - bottom) / 2})">log10 rho</text>')
    if title:
        out.append(f'<text x="{w / 2}" y="18" font-size="13" text-anchor="middle">{_escape(title)}</text>')
    for (label, i, _, dash), ly in zip(curves, logs):
        ok = np.isfinite(ly)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], ly[ok]))
        style = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{_COLOURS[i % len(_COLOURS)]}" stroke-width="1.2"{style} '
                   f'points="{pts}"><title>{_escape(label)}</title></polyline>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path


def _series_label(result: scan.ScanResult, s: float) -> str:
    return f"z={s:g} um" if result.axis == "eta" else f"eta={s:g}"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def result_from_csv(path: str | Path) -> scan.ScanResult:
    """Rebuild a plottable result from a scan CSV (series are contiguous row blocks)."""
    rows = read_csv(path)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    eta = np.array([r[0] for r in rows])
    z = np.array([r[1] for r in rows])
    changes_z = np.count_nonzero(np.diff(z))
    changes_eta = np.count_nonzero(np.diff(eta))
    axis = "eta" if changes_z <= changes_eta else "z_um"
    key, ax = (z, eta) if axis == "eta" else (eta, z)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(key)) + 1])
    n_axis = len(rows) // len(starts)
    if n_axis * len(starts) != len(rows):
        raise ConfigError(f"{path}: ragged series")
    tun = np.array([r[2] for r in rows]).reshape(len(starts), n_axis)
    base_vals = [r[3] for r in rows]
    base = None if all(v is None for v in base_vals) else \
        np.array([np.nan if v is None else v for v in base_vals]).reshape(len(starts), n_axis)
    return scan.ScanResult(kind="csv", axis=axis, axis_values=ax[:n_axis], series=key[starts],
                           rho_tunneling=tun, rho_baseline=base, pole=np.zeros(tun.shape, bool),
                           snapshot={})


# --- configuration ----------------------------------------------------------------

def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(args) -> tuple[MediumSpec, DriveSpec]:
    medium, drive = load_parameters(args.config) if args.config else default_parameters()
    if args.tau is not None:
        drive = replace(drive, tau_ps=args.tau)
    s = HBAR_MEV_PS / drive.tau_ps
    if getattr(args, "omega_p", None) is not None:
        drive = replace(drive, omega_p0_meV=args.omega_p * s)
    if getattr(args, "omega_d2", None) is not None:
        drive = replace(drive, omega_d2_meV=args.omega_d2 * s)
    return medium, drive


def _delta_m_choice(text: str | None):
    if text is None:
        return None
    if text in ("matched", "matched+", "matched-"):
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--delta-m takes a value in meV or matched / matched+ / matched-")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("--delta-m must be finite")
    return value


def resolve_drives(medium: MediumSpec, drive: DriveSpec, choice) -> list[tuple[str, DriveSpec]]:
    """Expand a mixing-detuning choice into labelled drives.

    A number or None gives one drive; "matched" gives one per velocity-matching
    root (labels ``dm_neg`` / ``dm_pos``); "matched+" / "matched-" pick one.
    """
    if choice is None:
        return [("", drive)]
    if isinstance(choice, float):
        return [("", replace(drive, delta_m_meV=choice))]
    drives = scan.matched_drives(medium, drive)
    labelled = [("dm_neg" if d.delta_m_meV < 0 else "dm_pos", d) for d in drives]
    if choice == "matched":
        return labelled
    want = "dm_pos" if choice == "matched+" else "dm_neg"
    picked = [(lab, d) for lab, d in labelled if lab == want]
    if not picked:
        raise dispersion.NoRootError(f"no {want} velocity-matching root")
    return picked[:1]


def _stem(base: str, label: str) -> str:
    return f"{base}_{label}" if label else base


def _report(path: Path, what: str) -> None:
    print(f"wrote {path} ({what})")


def _emit_scan(res: scan.ScanResult, out: Path, stem: str, svg: bool, title: str) -> None:
    p = write_csv(res, out / f"{stem}.csv")
    _report(p, f"{res.kind} scan, {res.rho_tunneling.size} samples, delta_m = "
               f"{res.snapshot['drive']['delta_m_meV']:.6g} meV")
    if svg:
        p = write_svg(res, out / f"{stem}.svg", title)
        _report(p, "chart")


# --- subcommands ------------------------------------------------------------------

def cmd_eta_scan(args, medium, drive, out: Path, stem: str = "eta_scan") -> None:
    eta = spectral.eta_grid(args.n_eta, args.half_width)
    for label, d in resolve_drives(medium, drive, args.delta_m):
        res = scan.eta_scan(args.z, eta, medium, d, not args.no_baseline, args.workers)
        _emit_scan(res, out, _stem(stem, label), args.svg, f"rho vs eta {label}".strip())


def cmd_distance_scan(args, medium, drive, out: Path, stem: str = "distance_scan") -> None:
    z = np.linspace(0.0, args.z_max, args.n_z)
    for label, d in resolve_drives(medium, drive, args.delta_m):
        res = scan.distance_scan(args.eta, z, medium, d, not args.no_baseline, args.workers)
        _emit_scan(res, out, _stem(stem, label), args.svg, f"rho vs z {label}".strip())


def cmd_no_control_scan(args, medium, drive, out: Path, stem: str = "no_control_scan") -> None:
    eta = spectral.eta_grid(args.n_eta, args.half_width)
    nc = scan.no_control_drive(drive, args.delta_p)
    for label, d in resolve_drives(medium, nc, args.delta_m):
        res = scan.no_control_scan(args.z, eta, medium, d, args.delta_p, not args.no_baseline, args.workers)
        name = _stem(stem, label)
        _emit_scan(res, out, name, args.svg, f"rho vs eta, control off {label}".strip())
        p = _write_json(out / f"{name}_diagnostics.json", res.diagnostics)
        _report(p, f"absorption ratio {res.diagnostics['absorption_ratio']:.4g}")


def oracle_comparison(medium: MediumSpec, drive: DriveSpec, z_um: float, eta, grids: oracle.OracleGrids,
                      window: float = 2.0) -> dict[str, Any]:
    """Closed-form and time-domain efficiencies at one distance, with deviation measures."""
    sys_ = to_dimensionless(medium, drive)
    eta = np.asarray(eta, dtype=float)
    sol = oracle.integrate(None, None, [z_um], grids, system=sys_)
    rho_o = oracle.oracle_efficiency(sol, z_um, eta)
    rho_c = spectral.efficiency(z_um, eta, sys_)
    inside = np.abs(eta) <= window
    pk = int(np.argmax(np.where(inside, rho_c, -np.inf)))
    return {
        "eta": eta, "rho_closed": rho_c, "rho_oracle": rho_o,
        "peak_eta": float(eta[pk]),
        "peak_relative_error": float(abs(rho_o[pk] - rho_c[pk]) / rho_c[pk]),
        "l2_relative_error": float(np.linalg.norm(rho_o[inside] - rho_c[inside]) / np.linalg.norm(rho_c[inside])),
        "max_norm_excursion": float(sol.norm_error.max()),
    }


def cmd_oracle_compare(args, medium, drive, out: Path) -> None:
    grids = oracle.OracleGrids(n_t=args.n_t, dz_um=args.dz)
    eta = np.linspace(-args.window, args.window, args.n_eta)
    for label, d in resolve_drives(medium, drive, args.delta_m):
        rep = oracle_comparison(medium, d, args.z, eta, grids, args.window)
        name = _stem("oracle_compare", label)
        rows = zip(rep["eta"], [args.z] * eta.size, rep["rho_closed"], rep["rho_oracle"])
        p = _write_table(out / f"{name}.csv", ("eta", "z_um", "rho_closed_form", "rho_oracle"), rows)
        _report(p, f"peak relative deviation {rep['peak_relative_error']:.3e}, "
                   f"L2 relative deviation {rep['l2_relative_error']:.3e}")


def cmd_group_velocity(args, medium, drive, out: Path) -> None:
    sys_ = to_dimensionless(medium, drive)
    roots = dispersion.match_detuning(sys_, (-args.bracket, args.bracket), args.scan_step)
    vgp = dispersion.pump_group_velocity(sys_, args.eta0)
    base = dispersion.pump_group_velocity(to_dimensionless(medium.without_tunneling(), drive), args.eta0)
    entries = []
    for r in roots:
        vgm = dispersion.mixing_group_velocity(dispersion.with_delta_m(sys_, r), args.eta0)
        entries.append({"delta_m_meV": r, "vg_mixing_c": vgm, "relative_mismatch": abs(vgp - vgm) / vgp})
    data = {"eta0": args.eta0, "vg_pump_c": vgp, "vg_pump_without_tunneling_c": base, "roots": entries}
    p = _write_json(out / "group_velocity.json", data)
    _report(p, f"vg_pump = {vgp:.4g} c, roots " + ", ".join(f"{e['delta_m_meV']:.6g}" for e in entries) + " meV")


def cmd_bandstructure(args, medium, drive, out: Path) -> None:
    rep = bandstructure.subband_ladder(medium.layers, barrier_x=args.barrier_x, step_nm=args.step)
    data = {"layers": [list(layer) for layer in medium.layers], "barrier_x": args.barrier_x, **rep.as_dict()}
    p = _write_json(out / "bandstructure.json", data)
    _report(p, "energies " + ", ".join(f"{e:.2f}" for e in rep.energies) + " meV")


def cmd_pulse(args, medium, drive, out: Path) -> None:
    eta = spectral.eta_grid(args.n_t, args.half_width)
    for label, d in resolve_drives(medium, drive, args.delta_m):
        sys_ = to_dimensionless(medium, d)
        rows = []
        for z in args.z:
            f = transform.generated_pulse(z, sys_, grid=eta)
            rows += [(t, z, v.real, v.imag, abs(v) ** 2) for t, v in zip(f.grid, f.values)]
        p = _write_table(out / f"{_stem('pulse', label)}.csv",
                         ("t_over_tau", "z_um", "omega_m_re", "omega_m_im", "omega_m_abs2"), rows)
        _report(p, f"generated pulse at {len(args.z)} distances")


def cmd_plot(args, medium, drive, out: Path) -> None:
    src = Path(args.csv)
    if not src.exists():
        raise ConfigError(f"{src} does not exist")
    res = result_from_csv(src)
    p = write_svg(res, out / f"{src.stem}.svg", args.title or src.stem)
    _report(p, f"{res.series.size} series")


def cmd_reproduce(args, medium, drive, out: Path) -> None:
    preset = load_preset()[args.figure]
    ns = argparse.Namespace(**vars(args))
    ns.delta_m = _delta_m_choice(preset["delta_m"])
    ns.no_baseline = False
    if args.figure == "fig2":
        ns.z, ns.n_eta, ns.half_width = preset["z_um"], preset["n_eta"], preset["eta_half_width"]
        cmd_eta_scan(ns, medium, drive, out, stem="fig2")
    elif args.figure == "fig3":
        ns.eta, ns.z_max, ns.n_z = preset["eta"], preset["z_max_um"], preset["n_z"]
        cmd_distance_scan(ns, medium, drive, out, stem="fig3")
    else:
        d = replace(drive, omega_c_meV=preset["omega_c_meV"])
        ns.z, ns.n_eta, ns.half_width = preset["z_um"], preset["n_eta"], preset["eta_half_width"]
        ns.delta_p = preset["delta_p_meV"]
        cmd_no_control_scan(ns, medium, d, out, stem="fig4")


# --- parser -----------------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("must be finite")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with {\"medium\": {...}, \"drive\": {...}}")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or the working directory)")
    common.add_argument("--tau", type=_finite, help="pump duration in ps")
    common.add_argument("--omega-p", type=_finite, help="peak pump Rabi frequency, units of hbar/tau")
    common.add_argument("--omega-d2", type=_finite, help="two-photon Rabi frequency, units of hbar/tau")
    common.add_argument("--delta-m", type=_delta_m_choice,
                        help="mixing detuning in meV, or matched / matched+ / matched-")
    common.add_argument("--workers", type=_positive_int, default=1)
    common.add_argument("--svg", action="store_true", help="also write an SVG chart")

    p = argparse.ArgumentParser(prog="tunnelfwm", description="Tunneling-enhanced four-wave mixing simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    def eta_grid_args(sp):
        sp.add_argument("--z", type=_finite, nargs="+", default=[1.0, 10.0, 100.0], help="distances in um")
        sp.add_argument("--n-eta", type=_positive_int, default=2048)
        sp.add_argument("--half-width", type=_finite, default=8.0)
        sp.add_argument("--no-baseline", action="store_true")

    sp = sub.add_parser("eta-scan", parents=[common], help="rho versus eta at fixed distances")
    eta_grid_args(sp)
    sp.set_defaults(func=cmd_eta_scan)

    sp = sub.add_parser("distance-scan", parents=[common], help="rho versus z at fixed eta")
    sp.add_argument("--eta", type=_finite, nargs="+", default=[0.75, -0.75])
    sp.add_argument("--z-max", type=_finite, default=100.0)
    sp.add_argument("--n-z", type=_positive_int, default=401)
    sp.add_argument("--no-baseline", action="store_true")
    sp.set_defaults(func=cmd_distance_scan)

    sp = sub.add_parser("no-control-scan", parents=[common], help="eta scan with the control field off")
    eta_grid_args(sp)
    sp.add_argument("--delta-p", type=_finite, default=scan.NO_CONTROL_DELTA_P, help="pump detuning in meV")
    sp.set_defaults(func=cmd_no_control_scan)

    sp = sub.add_parser("oracle-compare", parents=[common], help="closed form versus time-domain integration")
    sp.add_argument("--z", type=_finite, default=10.0)
    sp.add_argument("--window", type=_finite, default=2.0)
    sp.add_argument("--n-eta", type=_positive_int, default=201)
    sp.add_argument("--n-t", type=_positive_int, default=4096)
    sp.add_argument("--dz", type=_finite, default=0.01, help="z step in um")
    sp.set_defaults(func=cmd_oracle_compare)

    sp = sub.add_parser("group-velocity", parents=[common], help="group velocities and matching detunings")
    sp.add_argument("--eta0", type=_finite, default=0.0)
    sp.add_argument("--bracket", type=_finite, default=1.0, help="search |delta_m| up to this many meV")
    sp.add_argument("--scan-step", type=_finite, default=1e-3, help="root scan step in meV")
    sp.set_defaults(func=cmd_group_velocity)

    sp = sub.add_parser("bandstructure", parents=[common], help="subband energies and dipole ratios")
    sp.add_argument("--barrier-x", type=_finite, default=0.4)
    sp.add_argument("--step", type=_finite, default=0.05, help="grid step in nm")
    sp.set_defaults(func=cmd_bandstructure)

    sp = sub.add_parser("pulse", parents=[common], help="generated pulse in the time domain")
    sp.add_argument("--z", type=_finite, nargs="+", default=[1.0, 10.0])
    sp.add_argument("--n-t", type=_positive_int, default=2048)
    sp.add_argument("--half-width", type=_finite, default=8.0, help="eta half-width of the spectral grid")
    sp.set_defaults(func=cmd_pulse)

    sp = sub.add_parser("plot", parents=[common], help="SVG chart from a scan CSV")
    sp.add_argument("csv")
    sp.add_argument("--title")
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("reproduce", parents=[common], help="figure presets")
    sp.add_argument("figure", choices=("fig2", "fig3", "fig4"))
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        medium, drive = _load(args)
        out = _out_dir(args)
        args.func(args, medium, drive, out)
    except NUMERIC_ERRORS as exc:
        print(f"tunnelfwm: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"tunnelfwm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

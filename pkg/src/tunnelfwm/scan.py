"""Parameter sweeps of the conversion efficiency, with and without tunneling.

Every scan is split into fixed work items (one per series and variant) that
do not depend on the worker count, so results are bit-identical for any
level of parallelism. Aggregation keeps input order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .dispersion import (
    AnomalousDispersionError,
    NoRootError,
    absorption_spectrum,
    match_detuning,
    mixing_group_velocity,
    pump_group_velocity,
    with_delta_m,
)
from .params import (
    DimensionlessSystem,
    DriveSpec,
    MediumSpec,
    drive_from_dict,
    dump_parameters,
    medium_from_dict,
    to_dimensionless,
)
from .spectral import POLE_THRESHOLD, efficiency, poly_D

ENHANCEMENT_FLOOR = 1e-30
NO_CONTROL_DELTA_P = 4.0
VARIANTS = ("tunneling", "baseline")


@dataclass(frozen=True)
class ScanResult:
    """Efficiency series over one axis.

    ``rho_tunneling`` and ``rho_baseline`` have shape (n_series, n_axis):
    one row per entry of ``series`` (distances for an eta scan, eta values
    for a distance scan). ``pole`` flags samples where the response
    denominator vanished; those carry NaN.
    """

    kind: str
    axis: str
    axis_values: np.ndarray
    series: np.ndarray
    rho_tunneling: np.ndarray
    rho_baseline: np.ndarray | None
    pole: np.ndarray
    snapshot: dict[str, Any]
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def enhancement(self) -> np.ndarray | None:
        """rho_tunneling / rho_baseline, NaN where the baseline is below the floor."""
        if self.rho_baseline is None:
            return None
        out = np.full(self.rho_tunneling.shape, np.nan)
        ok = self.rho_baseline > ENHANCEMENT_FLOOR
        out[ok] = self.rho_tunneling[ok] / self.rho_baseline[ok]
        return out

    def rows(self):
        """Long-format rows ``(eta, z_um, rho_tun, rho_base, enhancement)``; None marks undefined."""
        enh = self.enhancement
        for i, s in enumerate(self.series):
            for j, a in enumerate(self.axis_values):
                eta, z = (a, s) if self.axis == "eta" else (s, a)
                base = None if self.rho_baseline is None else float(self.rho_baseline[i, j])
                e = None if enh is None or np.isnan(enh[i, j]) else float(enh[i, j])
                yield float(eta), float(z), float(self.rho_tunneling[i, j]), base, e


# --- evaluation ---------------------------------------------------------------

def _rho(z_um: float, eta: np.ndarray, sys: DimensionlessSystem):
    """Efficiency on ``eta`` with pole samples masked instead of raising."""
    pole = ~(np.abs(poly_D(eta, sys)) >= POLE_THRESHOLD)
    rho = np.full(eta.shape, np.nan)
    if np.any(~pole):
        rho[~pole] = efficiency(z_um, eta[~pole], sys)
    bad = ~np.isfinite(rho)
    return rho, pole | bad


def _systems(medium: MediumSpec, drive: DriveSpec) -> dict[str, DimensionlessSystem]:
    return {
        "tunneling": to_dimensionless(medium, drive),
        "baseline": to_dimensionless(medium.without_tunneling(), drive),
    }


def _run(items: list[Callable[[], Any]], workers: int) -> list[Any]:
    if workers <= 1 or len(items) <= 1:
        return [f() for f in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda f: f(), items))


def _snapshot(kind: str, medium: MediumSpec, drive: DriveSpec, **extra: Any) -> dict[str, Any]:
    snap = {"kind": kind, **dump_parameters(medium, drive)}
    for key, value in extra.items():
        snap[key] = [float(v) for v in np.atleast_1d(value)] if key in ("eta", "z_um") else value
    return snap


def eta_scan(z_um, eta, medium: MediumSpec, drive: DriveSpec, include_baseline: bool = True,
             workers: int = 1) -> ScanResult:
    """rho(eta) at each distance in ``z_um``."""
    z_list = np.atleast_1d(np.asarray(z_um, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if np.any(z_list < 0):
        raise ValueError("distances must be non-negative")
    systems = _systems(medium, drive)
    variants = VARIANTS if include_baseline else VARIANTS[:1]
    items = [(lambda z=z, s=systems[v]: _rho(float(z), eta, s)) for v in variants for z in z_list]
    out = _run(items, workers)
    n = len(z_list)
    rho = {v: np.array([r for r, _ in out[i * n:(i + 1) * n]]).reshape(n, eta.size)
           for i, v in enumerate(variants)}
    pole = np.zeros((n, eta.size), dtype=bool)
    for i in range(len(variants)):
        for j in range(n):
            pole[j] |= out[i * n + j][1]
    return ScanResult(
        kind="eta", axis="eta", axis_values=eta, series=z_list,
        rho_tunneling=rho["tunneling"], rho_baseline=rho.get("baseline"), pole=pole,
        snapshot=_snapshot("eta", medium, drive, z_um=z_list, eta=eta, include_baseline=include_baseline),
    )


def distance_scan(eta, z_grid, medium: MediumSpec, drive: DriveSpec, include_baseline: bool = True,
                  workers: int = 1) -> ScanResult:
    """rho(z) at each frequency in ``eta``."""
    eta_list = np.atleast_1d(np.asarray(eta, dtype=float))
    z_grid = np.atleast_1d(np.asarray(z_grid, dtype=float))
    if np.any(z_grid < 0):
        raise ValueError("distances must be non-negative")
    systems = _systems(medium, drive)
    variants = VARIANTS if include_baseline else VARIANTS[:1]

    def column(e: float, s: DimensionlessSystem):
        pts = [_rho(float(z), np.array([e]), s) for z in z_grid]
        return np.array([r[0] for r, _ in pts]), np.array([p[0] for _, p in pts])

    items = [(lambda e=e, s=systems[v]: column(float(e), s)) for v in variants for e in eta_list]
    out = _run(items, workers)
    n = len(eta_list)
    rho = {v: np.array([r for r, _ in out[i * n:(i + 1) * n]]).reshape(n, z_grid.size)
           for i, v in enumerate(variants)}
    pole = np.zeros((n, z_grid.size), dtype=bool)
    for i in range(len(variants)):
        for j in range(n):
            pole[j] |= out[i * n + j][1]
    return ScanResult(
        kind="distance", axis="z_um", axis_values=z_grid, series=eta_list,
        rho_tunneling=rho["tunneling"], rho_baseline=rho.get("baseline"), pole=pole,
        snapshot=_snapshot("distance", medium, drive, z_um=z_grid, eta=eta_list,
                           include_baseline=include_baseline),
    )


def no_control_drive(drive: DriveSpec, delta_p_meV: float = NO_CONTROL_DELTA_P) -> DriveSpec:
    return replace(drive, omega_c_meV=0.0, delta_p_meV=delta_p_meV)


def no_control_diagnostics(medium: MediumSpec, drive: DriveSpec, window: float = 1.0,
                           n: int = 2001) -> dict[str, Any]:
    """Absorption minimum near line centre and the velocity-matching point.

    ``drive`` is used as given; pass it through :func:`no_control_drive` first.
    """
    grid = np.linspace(-window, window, n)
    sys = to_dimensionless(medium, drive)
    single = to_dimensionless(medium.without_tunneling(), drive)
    absorb = absorption_spectrum(grid, sys)
    i = int(np.argmin(absorb))
    ref = float(absorption_spectrum(grid[i:i + 1], single)[0])
    diag: dict[str, Any] = {
        "absorption_min_eta": float(grid[i]),
        "absorption_min": float(absorb[i]),
        "absorption_single_path": ref,
        "absorption_ratio": float(absorb[i] / ref),
    }
    try:
        roots = match_detuning(sys)
        diag["matched_delta_m_meV"] = roots
        vgp = pump_group_velocity(sys)
        vgm = [mixing_group_velocity(with_delta_m(sys, r)) for r in roots]
        diag["vg_pump_c"] = vgp
        diag["vg_mixing_c"] = vgm
    except (NoRootError, AnomalousDispersionError) as exc:
        diag["velocity_matching_error"] = str(exc)
    return diag


def no_control_scan(z_um, eta, medium: MediumSpec, drive: DriveSpec,
                    delta_p_meV: float = NO_CONTROL_DELTA_P, include_baseline: bool = True,
                    workers: int = 1) -> ScanResult:
    """eta scan with the control field switched off and the pump detuned to ``delta_p_meV``."""
    nc = no_control_drive(drive, delta_p_meV)
    res = eta_scan(z_um, eta, medium, nc, include_baseline, workers)
    snap = dict(res.snapshot, kind="no_control")
    return replace(res, kind="no_control", snapshot=snap, diagnostics=no_control_diagnostics(medium, nc))


def replay(result: ScanResult, workers: int = 1) -> ScanResult:
    """Recompute a scan from its own parameter snapshot."""
    snap = result.snapshot
    medium = medium_from_dict(snap["medium"])
    drive = drive_from_dict(snap["drive"])
    base = snap["include_baseline"]
    if snap["kind"] == "eta":
        return eta_scan(snap["z_um"], snap["eta"], medium, drive, base, workers)
    if snap["kind"] == "distance":
        return distance_scan(snap["eta"], snap["z_um"], medium, drive, base, workers)
    if snap["kind"] == "no_control":
        # the stored drive already has the control off and the pump detuned
        res = eta_scan(snap["z_um"], snap["eta"], medium, drive, base, workers)
        return replace(res, kind="no_control", snapshot=dict(res.snapshot, kind="no_control"),
                       diagnostics=no_control_diagnostics(medium, drive))
    raise ValueError(f"unknown scan kind {snap['kind']!r}")


def matched_drives(medium: MediumSpec, drive: DriveSpec) -> list[DriveSpec]:
    """One drive per velocity-matching mixing detuning, in ascending order."""
    roots = match_detuning(to_dimensionless(medium, drive))
    return [replace(drive, delta_m_meV=r) for r in sorted(roots)]

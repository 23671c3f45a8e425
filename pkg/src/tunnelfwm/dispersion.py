"""Linear propagation: wavenumbers, group velocities, absorption, velocity matching."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.optimize import bisect

from .params import HBAR_MEV_PS, DimensionlessSystem
from .spectral import (
    _checked_D,
    mixing_wavenumber,
    poly_Dp,
    pump_wavenumber,
)

FD_STEP = 1e-4


class AnomalousDispersionError(ArithmeticError):
    """Re(dK/deta) <= 0: the group velocity is not a meaningful pulse speed."""


class NoRootError(ValueError):
    """The velocity-matching residual has no sign change in the bracket."""


@dataclass(frozen=True)
class DispersionPoint:
    eta: float
    Kp: complex
    Km: complex
    vgp: float
    vgm: float
    absorption: float


def wavenumbers(eta, sys: DimensionlessSystem):
    """Pump and mixing-wave wavenumbers (Kp, Km) in units of 1/(c*tau)."""
    return pump_wavenumber(eta, sys), mixing_wavenumber(eta, sys)


def _poly_derivs(eta, sys: DimensionlessSystem):
    eta = np.asarray(eta, dtype=float)
    a2, a3, a4 = eta + sys.d2, eta + sys.d3, eta + sys.d4
    c2 = sys.omega_c**2
    dD = a3 * a4 + a2 * a4 + a2 * a3 - (1.0 + sys.q**2) * c2
    dDp = (a4 + sys.m**2 * a3) + a2 * (1.0 + sys.m**2)
    return dD, dDp


def pump_slope(eta, sys: DimensionlessSystem):
    """Analytic dKp/deta."""
    D = _checked_D(eta, sys)
    Dp = poly_Dp(eta, sys)
    dD, dDp = _poly_derivs(eta, sys)
    return 1.0 - sys.kappa_p * (dDp * D - Dp * dD) / D**2


def mixing_slope(eta, sys: DimensionlessSystem):
    """Analytic dKm/deta."""
    eta = np.asarray(eta, dtype=float)
    return 1.0 + sys.kappa_m / (eta + sys.d5) ** 2


def group_velocity(K: Callable, eta0: float = 0.0, dK: Callable | None = None) -> float:
    """Group velocity in units of c, ``1 / Re(dK/deta)`` at ``eta0``.

    With ``dK`` supplied the analytic slope is used; otherwise a central
    difference of step ``FD_STEP``.
    """
    if dK is not None:
        slope = complex(dK(eta0)).real
    else:
        slope = complex(K(eta0 + FD_STEP) - K(eta0 - FD_STEP)).real / (2 * FD_STEP)
    if slope <= 0:
        raise AnomalousDispersionError(f"Re(dK/deta) = {slope:.6g} at eta = {eta0}")
    return 1.0 / slope


def pump_group_velocity(sys: DimensionlessSystem, eta0: float = 0.0) -> float:
    return group_velocity(lambda e: pump_wavenumber(e, sys), eta0, lambda e: pump_slope(e, sys))


def mixing_group_velocity(sys: DimensionlessSystem, eta0: float = 0.0) -> float:
    return group_velocity(lambda e: mixing_wavenumber(e, sys), eta0, lambda e: mixing_slope(e, sys))


def _or_nan(f: Callable[[], float]) -> float:
    try:
        return f()
    except AnomalousDispersionError:
        return float("nan")


def dispersion_point(eta: float, sys: DimensionlessSystem) -> DispersionPoint:
    """Wavenumbers and velocities at one frequency; NaN marks an anomalous branch."""
    Kp, Km = wavenumbers(eta, sys)
    return DispersionPoint(
        eta=float(eta),
        Kp=complex(Kp),
        Km=complex(Km),
        vgp=_or_nan(lambda: pump_group_velocity(sys, eta)),
        vgm=_or_nan(lambda: mixing_group_velocity(sys, eta)),
        absorption=float(np.imag(Kp)),
    )


def with_delta_m(sys: DimensionlessSystem, delta_m_meV: float) -> DimensionlessSystem:
    s = sys.tau_ps / HBAR_MEV_PS
    return replace(sys, d5=complex(delta_m_meV * s, sys.d5.imag))


def slope_mismatch(delta_m_meV, sys: DimensionlessSystem, eta0: float = 0.0):
    """Re(dKm/deta) - Re(dKp/deta) at ``eta0`` as a function of the mixing detuning."""
    s = sys.tau_ps / HBAR_MEV_PS
    d5 = np.asarray(delta_m_meV, dtype=float) * s + 1j * sys.d5.imag
    km = 1.0 + sys.kappa_m / (eta0 + d5) ** 2
    return km.real - complex(pump_slope(eta0, sys)).real


def match_detuning(sys: DimensionlessSystem, bracket_meV: tuple[float, float] = (-1.0, 1.0),
                   scan_step_meV: float = 1e-3, eta0: float = 0.0) -> list[float]:
    """Mixing detunings (meV) at which the pump and mixing group velocities agree.

    Scans the bracket at ``scan_step_meV`` for sign changes of the slope
    mismatch, then refines every bracketed root by bisection.
    """
    pump_slope_re = complex(pump_slope(eta0, sys)).real
    if pump_slope_re <= 0:
        raise AnomalousDispersionError("pump branch has no positive group velocity")
    lo, hi = bracket_meV
    n = int(round((hi - lo) / scan_step_meV))
    grid = np.linspace(lo, hi, n + 1)
    f = slope_mismatch(grid, sys, eta0)
    roots = []
    for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0):
        a, b = grid[i], grid[i + 1]
        if f[i] == 0:
            root = a
        elif f[i + 1] == 0:
            continue
        else:
            root = bisect(lambda x: float(slope_mismatch(x, sys, eta0)), a, b,
                          xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        roots.append(float(root))
    if not roots:
        raise NoRootError(f"no velocity-matching detuning in {bracket_meV} meV")
    return roots


def velocity_mismatch_scan(sys: DimensionlessSystem, bracket_meV=(-1.0, 1.0),
                           step_meV: float = 1e-3, eta0: float = 0.0):
    """Brute-force |vgp - vgm| / vgp over a detuning grid (independent of the root finder)."""
    grid = np.arange(int(round((bracket_meV[1] - bracket_meV[0]) / step_meV)) + 1) * step_meV + bracket_meV[0]
    vgp = pump_group_velocity(sys, eta0)
    out = np.empty_like(grid)
    for i, dm in enumerate(grid):
        # finite differences on purpose: this path must not share the analytic slope
        vgm_slope = (complex(mixing_wavenumber(eta0 + FD_STEP, with_delta_m(sys, dm)))
                     - complex(mixing_wavenumber(eta0 - FD_STEP, with_delta_m(sys, dm)))).real / (2 * FD_STEP)
        out[i] = abs(vgp - 1.0 / vgm_slope) / vgp if vgm_slope != 0 else np.inf
    return grid, out


def absorption_spectrum(grid, sys: DimensionlessSystem) -> np.ndarray:
    """Pump amplitude attenuation Im(Kp) per unit c*tau on an eta grid."""
    return np.imag(pump_wavenumber(grid, sys))

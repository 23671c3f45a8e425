"""Frequency-domain response of the five-subband medium.

All functions take the dimensionless frequency ``eta = omega * tau`` (scalar
or array) and a :class:`~tunnelfwm.params.DimensionlessSystem`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import DimensionlessSystem

POLE_THRESHOLD = 1e-300
TAYLOR_THRESHOLD = 1e-8


class PoleError(ArithmeticError):
    """The response denominator vanished (parameters sit on a dark resonance)."""


class WeakDriveError(ValueError):
    """The perturbative closed form was asked for outside the weak-drive regime."""


@dataclass(frozen=True)
class SpectralField:
    """Complex spectrum samples W(z, eta) on a uniform eta grid."""

    z_um: float
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.shape != values.shape:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        check_uniform(grid)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])


def check_uniform(grid: np.ndarray, rtol: float = 1e-6) -> None:
    if grid.size < 2:
        raise ValueError("grid needs at least two samples")
    step = np.diff(grid)
    if np.any(step <= 0):
        raise ValueError("grid must be strictly increasing")
    if not np.allclose(step, step.mean(), rtol=rtol, atol=0.0):
        raise ValueError("grid must be uniformly spaced")


def eta_grid(n: int = 2048, half_width: float = 8.0) -> np.ndarray:
    """Centred FFT-compatible grid: ``-half_width + j * 2*half_width/n``."""
    step = 2.0 * half_width / n
    return (np.arange(n) - n // 2) * step


# --- response polynomials ----------------------------------------------------

def _factors(eta, sys: DimensionlessSystem):
    eta = np.asarray(eta, dtype=float)
    return eta + sys.d2, eta + sys.d3, eta + sys.d4


def poly_D(eta, sys: DimensionlessSystem):
    a2, a3, a4 = _factors(eta, sys)
    return a2 * a3 * a4 - (a4 + sys.q**2 * a3) * sys.omega_c**2


def poly_Dp(eta, sys: DimensionlessSystem):
    a2, a3, a4 = _factors(eta, sys)
    return a2 * (a4 + sys.m**2 * a3) - (sys.q - sys.m) ** 2 * sys.omega_c**2


def poly_Dm(eta, sys: DimensionlessSystem):
    a2, a3, a4 = _factors(eta, sys)
    return a2 * (a4 + sys.m * sys.k * a3) - (sys.q - sys.k) * (sys.q - sys.m) * sys.omega_c**2


def _checked_D(eta, sys: DimensionlessSystem):
    D = poly_D(eta, sys)
    if np.any(np.abs(D) < POLE_THRESHOLD):
        raise PoleError("response denominator D vanishes on the requested grid")
    return D


def pump_response(eta, sys: DimensionlessSystem):
    """Dp/D: the linear pump susceptibility up to a factor kappa_p."""
    return poly_Dp(eta, sys) / _checked_D(eta, sys)


def mixing_response(eta, sys: DimensionlessSystem):
    """Dm/D: pump-driven source of the |5> coherence per unit two-photon coupling."""
    return poly_Dm(eta, sys) / _checked_D(eta, sys)


def amp_response(eta, sys: DimensionlessSystem, Wp, Wm, z_um: float = 0.0):
    """Spectral amplitudes ``(alpha3 + m*alpha4, alpha5)`` for given field spectra.

    The two-photon term carries ``exp(i*dk*z)`` with ``z`` in um.
    """
    eta = np.asarray(eta, dtype=float)
    Wp = np.asarray(Wp, dtype=complex)
    Wm = np.asarray(Wm, dtype=complex)
    D = _checked_D(eta, sys)
    a5 = eta + sys.d5
    phase = np.exp(1j * sys.dk * sys.zeta(z_um))
    a34 = -Wp * poly_Dp(eta, sys) / D
    alpha5 = -Wm / a5 + Wp * sys.omega_d2 * phase * poly_Dm(eta, sys) / (a5 * D)
    return a34, alpha5


def pump_wavenumber(eta, sys: DimensionlessSystem):
    """Kp(eta) = eta - kappa_p * Dp/D, per unit c*tau."""
    return np.asarray(eta, dtype=float) - sys.kappa_p * pump_response(eta, sys)


def mixing_wavenumber(eta, sys: DimensionlessSystem):
    """Km(eta) = eta - kappa_m / (eta + d5), per unit c*tau."""
    eta = np.asarray(eta, dtype=float)
    return eta - sys.kappa_m / (eta + sys.d5)


def phase_B(eta, sys: DimensionlessSystem):
    eta = np.asarray(eta, dtype=float)
    return sys.dk + sys.kappa_m / (eta + sys.d5) - sys.kappa_p * pump_response(eta, sys)


def coupling(eta, sys: DimensionlessSystem):
    """Source strength G in dWm/dzeta = i*Km*Wm + i*G*exp(i*dk*zeta)*Wp."""
    eta = np.asarray(eta, dtype=float)
    return sys.kappa_m * sys.omega_d2 * mixing_response(eta, sys) / (eta + sys.d5)


def growth_factor(B, Km, zeta: float):
    """exp(i*Km*zeta) * (exp(i*B*zeta) - 1) / B, evaluated without overflow.

    Written as ``(exp(i*(Km+B)*zeta) - exp(i*Km*zeta)) / B`` when ``|B*zeta|``
    is large, with expm1 for moderate values and a two-term Taylor series
    across the removable singularity at B = 0.
    """
    B = np.asarray(B, dtype=complex)
    Km = np.asarray(Km, dtype=complex)
    B, Km = np.broadcast_arrays(B, Km)
    out = np.empty(B.shape, dtype=complex)
    if zeta == 0.0:
        out[...] = 0.0
        return out
    bz = B * zeta
    small = np.abs(bz) < TAYLOR_THRESHOLD * max(1.0, zeta)
    mid = ~small & (np.abs(bz) < 1.0)
    big = ~small & ~mid
    base = np.exp(1j * Km * zeta)
    out[small] = base[small] * 1j * zeta * (1.0 + 0.5j * bz[small])
    out[mid] = base[mid] * np.expm1(1j * bz[mid]) / B[mid]
    out[big] = (np.exp(1j * (Km[big] + B[big]) * zeta) - base[big]) / B[big]
    return out


def wm_spectrum(z_um: float, sys: DimensionlessSystem, pump: SpectralField,
                allow_strong: bool = False) -> SpectralField:
    """Generated mixing-field spectrum W_m(z, eta) for an input pump spectrum.

    Closed form of the one-way coupled propagation problem with W_m(0) = 0.
    """
    if not (sys.weak_drive or allow_strong):
        raise WeakDriveError("closed form requires the weak-drive regime")
    if z_um < 0:
        raise ValueError("z_um must be non-negative")
    eta = pump.grid
    zeta = sys.zeta(z_um)
    Km = mixing_wavenumber(eta, sys)
    B = phase_B(eta, sys)
    values = coupling(eta, sys) * pump.values * growth_factor(B, Km, zeta)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite mixing spectrum")
    return SpectralField(z_um, eta, values)


def efficiency(z_um: float, eta, sys: DimensionlessSystem, omega_p0: float | None = None,
               mu_ratio: float | None = None, allow_strong: bool = False) -> np.ndarray:
    """Conversion efficiency rho(z, eta) for a Gaussian input pump.

    ``omega_p0`` is the dimensionless peak pump Rabi frequency and
    ``mu_ratio`` = mu31/mu51; both default to the values carried by ``sys``.
    """
    omega_p0 = sys.omega_p0 if omega_p0 is None else omega_p0
    mu_ratio = sys.mu_ratio if mu_ratio is None else mu_ratio
    if omega_p0 == 0 or sys.omega_d2 == 0:
        raise ValueError("efficiency undefined for zero pump or two-photon coupling")
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    pump_peak = omega_p0 / np.sqrt(2.0)
    wp = pump_peak * np.exp(-eta**2 / 4.0)
    if not (sys.weak_drive or allow_strong):
        raise WeakDriveError("closed form requires the weak-drive regime")
    zeta = sys.zeta(z_um)
    wm = coupling(eta, sys) * wp * growth_factor(phase_B(eta, sys), mixing_wavenumber(eta, sys), zeta)
    return np.abs(mu_ratio * wm / (sys.omega_d2 * pump_peak)) ** 2

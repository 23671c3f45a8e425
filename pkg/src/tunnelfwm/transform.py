"""Unitary Fourier transforms in units of the pump duration.

Convention: ``W(eta) = (2*pi)**-0.5 * integral f(t') exp(+i*eta*t') dt'`` with
``t' = t/tau``. Under this convention ``exp(-t'**2)`` maps to
``exp(-eta**2/4)/sqrt(2)``, i.e. the Gaussian pump spectrum.

Grids always come in pairs: ``dt * deta = 2*pi/n`` with both grids centred
(sample ``n//2`` is the origin).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import DimensionlessSystem
from .spectral import SpectralField, check_uniform, eta_grid, wm_spectrum

SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class TimeField:
    """Complex field samples Omega(z, t')*tau/hbar on a uniform t' grid."""

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

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.spacing)


def _check_pair_grid(grid: np.ndarray) -> int:
    n = grid.size
    if n & (n - 1):
        raise ValueError(f"grid length must be a power of two, got {n}")
    check_uniform(grid)
    step = grid[1] - grid[0]
    if abs(grid[n // 2]) > 1e-9 * step:
        raise ValueError("grid must be centred: sample n//2 at the origin")
    return n


def paired_grid(grid: np.ndarray) -> np.ndarray:
    """The conjugate grid with ``step * conjugate_step = 2*pi/n``."""
    grid = np.asarray(grid, dtype=float)
    n = _check_pair_grid(grid)
    step = 2.0 * np.pi / (n * (grid[1] - grid[0]))
    return (np.arange(n) - n // 2) * step


def time_grid(n: int = 4096, half_width: float = 8.0) -> np.ndarray:
    return eta_grid(n, half_width)


def forward(time: TimeField) -> SpectralField:
    _check_pair_grid(time.grid)
    n = time.grid.size
    spec = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(time.values))) * (n * time.spacing / SQRT_2PI)
    return SpectralField(time.z_um, paired_grid(time.grid), spec)


def inverse(spec: SpectralField) -> TimeField:
    _check_pair_grid(spec.grid)
    vals = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(spec.values))) * (spec.spacing / SQRT_2PI)
    return TimeField(spec.z_um, paired_grid(spec.grid), vals)


def transform_at(time: TimeField, eta) -> np.ndarray:
    """Direct quadrature of the forward transform at arbitrary frequencies."""
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    phase = np.exp(1j * np.outer(eta, time.grid))
    return phase @ time.values * (time.spacing / SQRT_2PI)


def gaussian_pulse(omega_p0: float, grid) -> np.ndarray:
    """Time-domain pump envelope ``omega_p0 * exp(-t'**2)``."""
    grid = np.asarray(grid, dtype=float)
    return omega_p0 * np.exp(-grid**2) + 0j


def gaussian_pump(omega_p0: float, grid) -> SpectralField:
    """Entrance pump spectrum ``(omega_p0/sqrt(2)) * exp(-eta**2/4)``."""
    grid = np.asarray(grid, dtype=float)
    return SpectralField(0.0, grid, omega_p0 / np.sqrt(2.0) * np.exp(-grid**2 / 4.0))


def generated_pulse(z_um: float, sys: DimensionlessSystem, omega_p0: float | None = None,
                    grid=None) -> TimeField:
    """Time-domain mixing pulse at ``z_um`` for a Gaussian pump (retarded time not applied)."""
    grid = eta_grid() if grid is None else np.asarray(grid, dtype=float)
    omega_p0 = sys.omega_p0 if omega_p0 is None else omega_p0
    return inverse(wm_spectrum(z_um, sys, gaussian_pump(omega_p0, grid)))

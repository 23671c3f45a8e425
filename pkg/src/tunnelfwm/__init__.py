"""Tunneling-enhanced four-wave mixing in an asymmetric double quantum well."""

from .params import (
    DimensionlessSystem,
    DriveSpec,
    MediumSpec,
    ParameterError,
    default_parameters,
    load_parameters,
    to_dimensionless,
)
from .scan import ScanResult, distance_scan, eta_scan, no_control_scan, replay
from .spectral import SpectralField, efficiency, wm_spectrum

__version__ = "0.1.0"

__all__ = [
    "DimensionlessSystem",
    "DriveSpec",
    "MediumSpec",
    "ParameterError",
    "ScanResult",
    "SpectralField",
    "default_parameters",
    "distance_scan",
    "efficiency",
    "eta_scan",
    "load_parameters",
    "no_control_scan",
    "replay",
    "to_dimensionless",
    "wm_spectrum",
]

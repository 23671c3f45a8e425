"""Physical inputs for the double-well FWM model and their dimensionless form.

Energies are in meV, times in ps, lengths in um unless a key says otherwise.
Everything downstream of :func:`to_dimensionless` works in units of the pump
duration ``tau``: frequencies become ``E * tau / hbar`` and distances become
``z / (c * tau)``.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

HBAR_MEV_PS = 0.6582119569
C_UM_PER_PS = 299.792458

# SI values for the propagation constants
HBAR_SI = 1.054571817e-34
EPS0_SI = 8.8541878128e-12
C_SI = 299792458.0
E_CHARGE = 1.602176634e-19
MEV_TO_J = 1e-3 * E_CHARGE

WEAK_DRIVE_LIMIT = 0.05


class ParameterError(ValueError):
    """Raised for physically invalid or malformed parameter sets."""


@dataclass(frozen=True)
class MediumSpec:
    """Quantum-well medium: subband ladder, decay rates, dipoles."""

    omega1_meV: float
    omega2_meV: float
    omega3_meV: float
    omega4_meV: float
    omega5_meV: float
    gamma2_meV: float
    gamma3_meV: float
    gamma4_meV: float
    gamma5_meV: float
    mu31_enm: float
    mu32_enm: float
    mu51_enm: float
    m: float
    q: float
    k: float
    delta_meV: float
    N_m3: float
    # (aluminium fraction, thickness nm), left to right, outer barriers excluded
    layers: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple((float(x), float(w)) for x, w in self.layers))
        _check_finite(self)
        for name in ("gamma2_meV", "gamma3_meV", "gamma4_meV", "gamma5_meV"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")
        if self.N_m3 <= 0:
            raise ParameterError("N_m3 must be positive")
        for name in ("mu31_enm", "mu32_enm", "mu51_enm"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive")
        e = self.energies
        if any(b <= a for a, b in zip(e, e[1:])):
            raise ParameterError("subband energies must be strictly increasing")
        if not math.isclose(self.delta_meV, e[3] - e[2], rel_tol=1e-9, abs_tol=1e-9):
            raise ParameterError("delta_meV must equal omega4_meV - omega3_meV")
        for x, w in self.layers:
            if w < 0:
                raise ParameterError("layer thickness must be non-negative")

    @property
    def energies(self) -> tuple[float, ...]:
        return (self.omega1_meV, self.omega2_meV, self.omega3_meV,
                self.omega4_meV, self.omega5_meV)

    @property
    def lossless(self) -> bool:
        return self.gamma2_meV == self.gamma3_meV == self.gamma4_meV == self.gamma5_meV == 0.0

    def without_tunneling(self) -> MediumSpec:
        """Same medium with |4> decoupled (m = q = k = 0)."""
        return replace(self, m=0.0, q=0.0, k=0.0)


@dataclass(frozen=True)
class DriveSpec:
    """Laser configuration. Rabi frequencies are half-Rabi values in meV."""

    omega_c_meV: float
    omega_d2_meV: float
    omega_p0_meV: float
    delta_p_meV: float
    delta_c_meV: float
    delta_m_meV: float
    delta_k_per_m: float
    tau_ps: float

    def __post_init__(self) -> None:
        _check_finite(self)
        if self.tau_ps <= 0:
            raise ParameterError("tau_ps must be positive")
        for name in ("omega_c_meV", "omega_d2_meV", "omega_p0_meV"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")

    @property
    def weak_drive(self) -> bool:
        """True when both the pump and two-photon couplings are perturbative."""
        s = self.tau_ps / HBAR_MEV_PS
        return self.omega_p0_meV * s <= WEAK_DRIVE_LIMIT and self.omega_d2_meV * s <= WEAK_DRIVE_LIMIT


@dataclass(frozen=True)
class DimensionlessSystem:
    """All model coefficients scaled by the pump duration.

    ``d2``..``d5`` are the complex detunings times tau/hbar, ``kappa_p`` and
    ``kappa_m`` are kappa*c*tau^2, ``dk`` is the phase mismatch times c*tau.
    """

    d2: complex
    d3: complex
    d4: complex
    d5: complex
    omega_c: float
    omega_d2: float
    omega_p0: float
    kappa_p: float
    kappa_m: float
    dk: float
    m: float
    q: float
    k: float
    tau_ps: float
    mu_ratio: float = 1.0  # mu31 / mu51, used by the efficiency normalisation
    weak_drive: bool = True

    @property
    def length_um(self) -> float:
        """Unit of dimensionless distance, c*tau in um."""
        return C_UM_PER_PS * self.tau_ps

    def zeta(self, z_um: float) -> float:
        return z_um / self.length_um

    def physical(self) -> dict[str, float]:
        """Recover the detunings and decay rates in meV."""
        s = HBAR_MEV_PS / self.tau_ps
        dp = self.d3.real * s
        return {
            "delta_p_meV": dp,
            "delta_c_meV": dp - self.d2.real * s,
            "delta_meV": dp - self.d4.real * s,
            "delta_m_meV": self.d5.real * s,
            "gamma2_meV": self.d2.imag * s,
            "gamma3_meV": self.d3.imag * s,
            "gamma4_meV": self.d4.imag * s,
            "gamma5_meV": self.d5.imag * s,
            "omega_c_meV": self.omega_c * s,
            "omega_d2_meV": self.omega_d2 * s,
        }

    def with_(self, **changes: Any) -> DimensionlessSystem:
        return replace(self, **changes)


def _check_finite(obj: Any) -> None:
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, (int, float)) and not isinstance(v, bool) and not math.isfinite(v):
            raise ParameterError(f"{f.name} must be finite, got {v!r}")


def propagation_constant(N_m3: float, transition_meV: float, mu_enm: float) -> float:
    """kappa = N * omega * |mu|^2 / (hbar * eps0 * c), in 1/(m s)."""
    omega = transition_meV * MEV_TO_J / HBAR_SI
    mu = mu_enm * E_CHARGE * 1e-9
    return N_m3 * omega * mu**2 / (HBAR_SI * EPS0_SI * C_SI)


def to_dimensionless(medium: MediumSpec, drive: DriveSpec) -> DimensionlessSystem:
    tau = drive.tau_ps
    if not (tau > 0 and math.isfinite(tau)):
        raise ParameterError("tau_ps must be positive and finite")
    s = tau / HBAR_MEV_PS
    dp = drive.delta_p_meV
    tau_s = tau * 1e-12
    kp = propagation_constant(medium.N_m3, medium.omega3_meV - medium.omega1_meV, medium.mu31_enm)
    km = propagation_constant(medium.N_m3, medium.omega5_meV - medium.omega1_meV, medium.mu51_enm)
    return DimensionlessSystem(
        d2=complex(dp - drive.delta_c_meV, medium.gamma2_meV) * s,
        d3=complex(dp, medium.gamma3_meV) * s,
        d4=complex(dp - medium.delta_meV, medium.gamma4_meV) * s,
        d5=complex(drive.delta_m_meV, medium.gamma5_meV) * s,
        omega_c=drive.omega_c_meV * s,
        omega_d2=drive.omega_d2_meV * s,
        omega_p0=drive.omega_p0_meV * s,
        kappa_p=kp * C_SI * tau_s**2,
        kappa_m=km * C_SI * tau_s**2,
        dk=drive.delta_k_per_m * C_SI * tau_s,
        m=medium.m,
        q=medium.q,
        k=medium.k,
        tau_ps=tau,
        mu_ratio=medium.mu31_enm / medium.mu51_enm,
        weak_drive=drive.weak_drive,
    )


PRESET_FILE = "reference_defaults.json"


@functools.lru_cache(maxsize=1)
def load_preset() -> dict[str, Any]:
    """The versioned preset document shared by the CLI and the tests."""
    text = resources.files("tunnelfwm.presets").joinpath(PRESET_FILE).read_text()
    return json.loads(text)


def default_parameters() -> tuple[MediumSpec, DriveSpec]:
    """Structure and drive values of the bundled reference preset.

    tau, gamma2, the absolute dipoles and the weak pump and two-photon
    amplitudes are free choices here, documented defaults rather than data.
    """
    preset = load_preset()
    return medium_from_dict(preset["medium"]), drive_from_dict(preset["drive"])


# --- JSON ------------------------------------------------------------------

def _from_mapping(cls: type, data: dict[str, Any]) -> Any:
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ParameterError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = dict(data)
    if "layers" in kwargs:
        kwargs["layers"] = tuple(tuple(layer) for layer in kwargs["layers"])
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ParameterError(str(exc)) from exc


def medium_from_dict(data: dict[str, Any]) -> MediumSpec:
    return _from_mapping(MediumSpec, data)


def drive_from_dict(data: dict[str, Any]) -> DriveSpec:
    return _from_mapping(DriveSpec, data)


def spec_to_dict(spec: MediumSpec | DriveSpec) -> dict[str, Any]:
    d = asdict(spec)
    if "layers" in d:
        d["layers"] = [list(layer) for layer in d["layers"]]
    return d


def load_parameters(source: str | Path | dict[str, Any]) -> tuple[MediumSpec, DriveSpec]:
    """Load ``{"medium": {...}, "drive": {...}}``.

    Keys missing from either object fall back to the reference preset;
    unknown keys are rejected.
    """
    if isinstance(source, dict):
        data = source
    else:
        data = json.loads(Path(source).read_text())
    if not isinstance(data, dict):
        raise ParameterError("parameter document must be a JSON object")
    extra = set(data) - {"medium", "drive"}
    if extra:
        raise ParameterError(f"unknown top-level keys: {sorted(extra)}")
    preset = load_preset()
    medium = {**preset["medium"], **data.get("medium", {})}
    drive = {**preset["drive"], **data.get("drive", {})}
    for name, given, ref in (("medium", data.get("medium", {}), preset["medium"]),
                             ("drive", data.get("drive", {}), preset["drive"])):
        unknown = set(given) - set(ref)
        if unknown:
            raise ParameterError(f"unknown {name} keys: {sorted(unknown)}")
    return medium_from_dict(medium), drive_from_dict(drive)


def dump_parameters(medium: MediumSpec, drive: DriveSpec) -> dict[str, Any]:
    return {"medium": spec_to_dict(medium), "drive": spec_to_dict(drive)}

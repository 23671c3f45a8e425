"""Time-domain Maxwell-Bloch integration of the five-subband model.

Works in the retarded frame t' = (t - z/c)/tau, zeta = z/(c*tau), where the
field equations become ordinary z-ODEs per time sample:

    d(Omega_p)/dzeta = i*kappa_p*(b3 + m*b4)*conj(b1)
    d(Omega_m)/dzeta = i*kappa_m*b5*conj(b1)

At each z slice the amplitudes are integrated in t' with classical RK4
(field midpoints from 4-point cubic interpolation); z is marched with Heun's
predictor-corrector. This path never uses the closed-form spectrum, so it is
an independent check of it.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .params import DimensionlessSystem, DriveSpec, MediumSpec, to_dimensionless
from .transform import TimeField, transform_at

NORM_BLOWUP = 1e-3
# a passive medium cannot amplify; growth past this factor means the z step is unstable
FIELD_BLOWUP = 10.0


class OracleError(RuntimeError):
    """Numerical abort in the time-domain integrator."""


@dataclass(frozen=True)
class OracleGrids:
    """Retarded-time window (units of tau) and z step (um)."""

    n_t: int = 4096
    t_min: float = -8.0
    t_max: float = 56.0
    dz_um: float = 0.01

    @property
    def t(self) -> np.ndarray:
        return self.t_min + np.arange(self.n_t) * (self.t_max - self.t_min) / self.n_t


@dataclass
class PropagationSolution:
    system: DimensionlessSystem
    z_um: np.ndarray
    t: np.ndarray
    omega_p: np.ndarray  # (n_z, n_t)
    omega_m: np.ndarray
    b: np.ndarray  # (n_z, 5, n_t)
    mode: str
    dz_um: float
    norm_error: np.ndarray  # per stored z: max_t |sum|b|^2 - 1|
    diagnostics: dict = field(default_factory=dict)

    def index(self, z_um: float) -> int:
        i = int(np.argmin(np.abs(self.z_um - z_um)))
        if abs(self.z_um[i] - z_um) > 1e-9 * max(1.0, abs(z_um)):
            raise KeyError(f"z = {z_um} um was not stored; available: {self.z_um}")
        return i

    def save(self, path: str | Path) -> tuple[Path, Path]:
        """Flat little-endian complex128 dump plus a JSON sidecar describing it."""
        path = Path(path)
        data_path = path.with_suffix(".bin")
        meta_path = path.with_suffix(".json")
        arrays = {"omega_p": self.omega_p, "omega_m": self.omega_m, "b": self.b}
        offset = 0
        layout = {}
        with open(data_path, "wb") as fh:
            for name, arr in arrays.items():
                buf = np.ascontiguousarray(arr, dtype="<c16")
                fh.write(buf.tobytes())
                layout[name] = {"offset": offset, "shape": list(arr.shape), "dtype": "<c16"}
                offset += buf.nbytes
        sysd = {k: ([v.real, v.imag] if isinstance(v, complex) else v)
                for k, v in asdict(self.system).items()}
        meta = {
            "arrays": layout,
            "z_um": self.z_um.tolist(),
            "t_over_tau": {"start": float(self.t[0]), "step": float(self.t[1] - self.t[0]),
                           "n": int(self.t.size)},
            "mode": self.mode,
            "dz_um": self.dz_um,
            "system": sysd,
        }
        meta_path.write_text(json.dumps(meta, indent=2))
        return data_path, meta_path


def load_solution_arrays(path: str | Path) -> dict[str, np.ndarray]:
    """Read back the arrays written by :meth:`PropagationSolution.save`."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    raw = path.with_suffix(".bin").read_bytes()
    out = {}
    for name, spec in meta["arrays"].items():
        count = int(np.prod(spec["shape"]))
        out[name] = np.frombuffer(raw, dtype=spec["dtype"], count=count,
                                  offset=spec["offset"]).reshape(spec["shape"])
    return out


# --- kernels -----------------------------------------------------------------

@njit(cache=True)
def _rhs(b1, b2, b3, b4, b5, ep, em, d2, d3, d4, d5, oc, od_fw, od_bw, m, q, k, full, literal):
    if full:
        r1 = 1j * (np.conj(ep) * (b3 + m * b4) + np.conj(em) * b5)
    else:
        r1 = 0j
    r2 = 1j * (d2 * b2 + oc * (b3 + q * b4))
    r3 = 1j * (d3 * b3 + ep * b1 + oc * b2 + od_bw * b5)
    r4 = 1j * (d4 * b4 + m * ep * b1 + q * oc * b2 + k * od_bw * b5)
    if literal:
        r5 = 1j * (d5 * b5 + em * b1 + od_fw * (b2 + k * b5))
    else:
        r5 = 1j * (d5 * b5 + em * b1 + od_fw * (b3 + k * b4))
    return r1, r2, r3, r4, r5


@njit(cache=True)
def _midpoints(f):
    n = f.size
    out = np.empty(n - 1, dtype=np.complex128)
    for i in range(n - 1):
        if i == 0:
            out[i] = (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0
        elif i == n - 2:
            out[i] = (5.0 * f[n - 1] + 15.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4]) / 16.0
        else:
            out[i] = (-f[i - 1] + 9.0 * f[i] + 9.0 * f[i + 1] - f[i + 2]) / 16.0
    return out


@njit(cache=True)
def _solve_slice(ep, em, h, d2, d3, d4, d5, oc, od_fw, od_bw, m, q, k, full, literal, b_out):
    """Integrate the amplitudes across one time window.

    Returns (max |norm - 1|, max(norm - 1)); both zero in undepleted mode.
    """
    n = ep.size
    epm = _midpoints(ep)
    emm = _midpoints(em)
    b1 = 1.0 + 0j
    b2 = 0j
    b3 = 0j
    b4 = 0j
    b5 = 0j
    b_out[0, 0] = b1
    for j in range(1, 5):
        b_out[j, 0] = 0j
    worst = 0.0
    excess = 0.0
    for i in range(n - 1):
        e0, e1, e2 = ep[i], epm[i], ep[i + 1]
        f0, f1, f2 = em[i], emm[i], em[i + 1]
        k11, k12, k13, k14, k15 = _rhs(b1, b2, b3, b4, b5, e0, f0, d2, d3, d4, d5, oc, od_fw, od_bw, m, q, k, full, literal)
        hh = 0.5 * h
        k21, k22, k23, k24, k25 = _rhs(b1 + hh * k11, b2 + hh * k12, b3 + hh * k13, b4 + hh * k14, b5 + hh * k15,
                                       e1, f1, d2, d3, d4, d5, oc, od_fw, od_bw, m, q, k, full, literal)
        k31, k32, k33, k34, k35 = _rhs(b1 + hh * k21, b2 + hh * k22, b3 + hh * k23, b4 + hh * k24, b5 + hh * k25,
                                       e1, f1, d2, d3, d4, d5, oc, od_fw, od_bw, m, q, k, full, literal)
        k41, k42, k43, k44, k45 = _rhs(b1 + h * k31, b2 + h * k32, b3 + h * k33, b4 + h * k34, b5 + h * k35,
                                       e2, f2, d2, d3, d4, d5, oc, od_fw, od_bw, m, q, k, full, literal)
        s = h / 6.0
        b1 = b1 + s * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
        b2 = b2 + s * (k12 + 2.0 * k22 + 2.0 * k32 + k42)
        b3 = b3 + s * (k13 + 2.0 * k23 + 2.0 * k33 + k43)
        b4 = b4 + s * (k14 + 2.0 * k24 + 2.0 * k34 + k44)
        b5 = b5 + s * (k15 + 2.0 * k25 + 2.0 * k35 + k45)
        b_out[0, i + 1] = b1
        b_out[1, i + 1] = b2
        b_out[2, i + 1] = b3
        b_out[3, i + 1] = b4
        b_out[4, i + 1] = b5
        if full:
            nrm = abs(b1) ** 2 + abs(b2) ** 2 + abs(b3) ** 2 + abs(b4) ** 2 + abs(b5) ** 2 - 1.0
            worst = max(worst, abs(nrm))
            excess = max(excess, nrm)
    return worst, excess


# --- driver ------------------------------------------------------------------

class _Slicer:
    def __init__(self, sys: DimensionlessSystem, t: np.ndarray, mode: str, literal_eq5: bool):
        if mode not in ("undepleted", "full"):
            raise ValueError("mode must be 'undepleted' or 'full'")
        self.sys = sys
        self.h = float(t[1] - t[0])
        self.full = mode == "full"
        self.literal = literal_eq5
        self.b = np.zeros((5, t.size), dtype=np.complex128)

    def sources(self, ep, em, zeta):
        s = self.sys
        phase = np.exp(1j * s.dk * zeta)
        worst, excess = _solve_slice(ep, em, self.h, s.d2, s.d3, s.d4, s.d5, s.omega_c,
                             s.omega_d2 * phase, s.omega_d2 / phase, s.m, s.q, s.k,
                             self.full, self.literal, self.b)
        b1c = np.conj(self.b[0])
        # overflow is reported below as an OracleError
        with np.errstate(over="ignore", invalid="ignore"):
            fp = 1j * s.kappa_p * (self.b[2] + s.m * self.b[3]) * b1c
            fm = 1j * s.kappa_m * self.b[4] * b1c
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise OracleError(f"non-finite state at zeta = {zeta:.6g}")
        if excess > NORM_BLOWUP:
            raise OracleError(f"norm blow-up {excess:.3e} at zeta = {zeta:.6g}")
        return fp, fm, worst


def integrate(medium: MediumSpec | None, drive: DriveSpec | None, z_um,
              grids: OracleGrids = OracleGrids(), mode: str = "undepleted",
              system: DimensionlessSystem | None = None, literal_eq5: bool = False,
              input_mixing: np.ndarray | None = None) -> PropagationSolution:
    """March the coupled field/amplitude system from z = 0 to the largest ``z_um``.

    ``z_um`` is a distance or a list of distances at which the state is
    stored; each must be a multiple of ``grids.dz_um``. The pump enters as
    ``omega_p0 * exp(-t'**2)``; the mixing field enters as ``input_mixing``
    (zero by default).
    """
    sys = system if system is not None else to_dimensionless(medium, drive)
    z_out = np.atleast_1d(np.asarray(z_um, dtype=float))
    if np.any(z_out < 0):
        raise ValueError("z must be non-negative")
    if grids.dz_um <= 0:
        raise OracleError("z step underflow: dz_um must be positive")
    steps_out = np.rint(z_out / grids.dz_um).astype(int)
    if np.any(np.abs(steps_out * grids.dz_um - z_out) > 1e-9 * np.maximum(1.0, z_out)):
        raise ValueError("requested z values must be multiples of dz_um")

    t = grids.t
    dzeta = sys.zeta(grids.dz_um)
    ep = sys.omega_p0 * np.exp(-t**2) + 0j
    em = np.zeros_like(ep) if input_mixing is None else np.asarray(input_mixing, dtype=complex).copy()
    slicer = _Slicer(sys, t, mode, literal_eq5)

    n_store = len(z_out)
    order = {s: [i for i, v in enumerate(steps_out) if v == s] for s in set(steps_out.tolist())}
    Wp = np.empty((n_store, t.size), dtype=complex)
    Wm = np.empty_like(Wp)
    B = np.empty((n_store, 5, t.size), dtype=complex)
    norm_err = np.zeros(n_store)

    def store(step, worst):
        for i in order.get(step, ()):
            Wp[i], Wm[i], B[i] = ep, em, slicer.b
            norm_err[i] = worst

    fp, fm, worst = slicer.sources(ep, em, 0.0)
    store(0, worst)
    peak0 = max(np.max(np.abs(ep)), np.max(np.abs(em)))
    for n in range(int(steps_out.max(initial=0))):
        zeta = n * dzeta
        ep_pred = ep + dzeta * fp
        em_pred = em + dzeta * fm
        fp2, fm2, _ = slicer.sources(ep_pred, em_pred, zeta + dzeta)
        ep = ep + 0.5 * dzeta * (fp + fp2)
        em = em + 0.5 * dzeta * (fm + fm2)
        if max(np.max(np.abs(ep)), np.max(np.abs(em))) > FIELD_BLOWUP * peak0:
            raise OracleError(f"field blow-up at zeta = {zeta + dzeta:.6g}; reduce dz_um")
        fp, fm, worst = slicer.sources(ep, em, zeta + dzeta)
        store(n + 1, worst)

    return PropagationSolution(
        system=sys, z_um=z_out, t=t, omega_p=Wp, omega_m=Wm, b=B, mode=mode,
        dz_um=grids.dz_um, norm_error=norm_err,
        diagnostics={"dt": float(t[1] - t[0]), "dzeta": dzeta, "literal_eq5": literal_eq5},
    )


def oracle_efficiency(sol: PropagationSolution, z_um: float, eta) -> np.ndarray:
    """Conversion efficiency from the integrated mixing field at ``z_um``."""
    s = sol.system
    if s.omega_p0 == 0 or s.omega_d2 == 0:
        raise ValueError("efficiency undefined for zero pump or two-photon coupling")
    wm = transform_at(TimeField(z_um, sol.t, sol.omega_m[sol.index(z_um)]), eta)
    return np.abs(s.mu_ratio * wm / (s.omega_d2 * s.omega_p0 / np.sqrt(2.0))) ** 2


def integrate_spectral_ode(z_um, eta, sys: DimensionlessSystem, rtol: float = 1e-12):
    """Numerically integrate the one-way coupled spectral system in z.

        dWp/dzeta = i*Kp*Wp
        dWm/dzeta = i*Km*Wm + i*G*exp(i*dk*zeta)*Wp,   Wm(0) = 0

    with a Gaussian entrance pump. Returns Wm at each requested distance,
    shape (len(z_um), len(eta)).
    """
    from scipy.integrate import solve_ivp

    from .spectral import coupling, mixing_wavenumber, pump_wavenumber

    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    zetas = np.atleast_1d(np.asarray([sys.zeta(z) for z in np.atleast_1d(z_um)], dtype=float))
    Kp = pump_wavenumber(eta, sys)
    Km = mixing_wavenumber(eta, sys)
    G = coupling(eta, sys)
    n = eta.size
    wp0 = sys.omega_p0 / np.sqrt(2.0) * np.exp(-eta**2 / 4.0)

    def rhs(zeta, y):
        wp, wm = y[:n], y[n:]
        return np.concatenate([1j * Kp * wp, 1j * Km * wm + 1j * G * np.exp(1j * sys.dk * zeta) * wp])

    def jac(zeta, y):
        J = np.zeros((2 * n, 2 * n), dtype=complex)
        idx = np.arange(n)
        J[idx, idx] = 1j * Kp
        J[n + idx, n + idx] = 1j * Km
        J[n + idx, idx] = 1j * G * np.exp(1j * sys.dk * zeta)
        return J

    # unit entrance pump per frequency; the system is linear in it
    y0 = np.concatenate([np.ones(n), np.zeros(n)]).astype(complex)
    out = np.zeros((zetas.size, n), dtype=complex)
    positive = zetas > 0
    if np.any(positive):
        sol = solve_ivp(rhs, (0.0, zetas.max()), y0, method="DOP853", t_eval=np.sort(zetas[positive]),
                        rtol=rtol, atol=1e-40)
        if not sol.success:
            raise OracleError(sol.message)
        for i, zt in enumerate(zetas):
            if zt > 0:
                out[i] = wp0 * sol.y[n:, int(np.searchsorted(sol.t, zt))]
    return out

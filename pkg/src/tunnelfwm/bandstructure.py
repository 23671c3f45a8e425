"""Conduction subbands of a layered Al(x)Ga(1-x)As structure.

Finite-difference BenDaniel-Duke Hamiltonian

    -(hbar^2/2) d/dx [ (1/m*(x)) dpsi/dx ] + V(x) psi = E psi

on a uniform grid with hard walls far inside the outer barriers. Energies
are measured from the GaAs conduction-band edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

# hbar^2 / (2 m_e) in meV nm^2
HBAR2_2M0 = 38.09982116

BAND_OFFSET_FRACTION = 0.65
GAP_SLOPE_MEV = 1247.0
MASS_GAAS = 0.067
MASS_SLOPE = 0.083
X_MAX = 0.45


class BandStructureError(ValueError):
    pass


def conduction_offset(x):
    """Conduction-band offset relative to GaAs (meV)."""
    return BAND_OFFSET_FRACTION * GAP_SLOPE_MEV * np.asarray(x, dtype=float)


def effective_mass(x):
    return MASS_GAAS + MASS_SLOPE * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class PotentialProfile:
    x: np.ndarray  # nm
    V: np.ndarray  # meV
    mass: np.ndarray  # units of m_e
    barrier_meV: float
    interfaces: tuple[float, ...] = ()

    @property
    def step(self) -> float:
        return float(self.x[1] - self.x[0])


@dataclass(frozen=True)
class SubbandSolution:
    energies: np.ndarray  # meV
    psi: np.ndarray  # (n, n_x), real, sum(psi**2)*dx = 1
    x: np.ndarray
    dipoles: np.ndarray  # e*nm, dipoles[i, j] = <i|x|j>


def build_profile(layers, barrier_x: float = 0.4, padding_nm: float = 20.0,
                  step_nm: float = 0.05) -> PotentialProfile:
    """Potential and mass profile for ``layers`` = [(x, thickness_nm), ...].

    The stack is wrapped in ``barrier_x`` barriers of width ``padding_nm``.
    """
    layers = [(float(x), float(w)) for x, w in layers]
    for x, w in layers + [(barrier_x, padding_nm)]:
        if w < 0:
            raise BandStructureError("negative layer thickness")
        if not 0.0 <= x <= X_MAX:
            raise BandStructureError(f"aluminium fraction {x} outside [0, {X_MAX}]")
    if padding_nm < 15.0:
        raise BandStructureError("outer barriers must be at least 15 nm")
    if step_nm > 0.05:
        raise BandStructureError("grid step must not exceed 0.05 nm")
    stack = [(barrier_x, padding_nm)] + layers + [(barrier_x, padding_nm)]
    edges = np.concatenate([[0.0], np.cumsum([w for _, w in stack])])
    n = int(round(edges[-1] / step_nm))
    x = (np.arange(n) + 0.5) * (edges[-1] / n)
    comp = np.empty(n)
    for (al, _), lo, hi in zip(stack, edges[:-1], edges[1:]):
        comp[(x >= lo) & (x < hi)] = al
    return PotentialProfile(
        x=x,
        V=conduction_offset(comp),
        mass=effective_mass(comp),
        barrier_meV=float(conduction_offset(barrier_x)),
        interfaces=tuple(edges[1:-1]),
    )


def _hamiltonian(profile: PotentialProfile):
    dx = profile.step
    inv_m = 1.0 / profile.mass
    # inverse mass at the half points, hard walls outside the grid
    inv_half = 0.5 * (inv_m[1:] + inv_m[:-1])
    left = np.concatenate([[inv_m[0]], inv_half])
    right = np.concatenate([inv_half, [inv_m[-1]]])
    diag = profile.V + HBAR2_2M0 * (left + right) / dx**2
    off = -HBAR2_2M0 * inv_half / dx**2
    return diag, off


def _fix_sign(psi: np.ndarray) -> np.ndarray:
    # first lobe from the left is positive
    for row in psi:
        amp = np.abs(row)
        first = np.argmax(amp > 1e-3 * amp.max())
        if row[first] < 0:
            row *= -1.0
    return psi


def solve_subbands(profile: PotentialProfile, n: int = 5) -> SubbandSolution:
    diag, off = _hamiltonian(profile)
    energies, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n - 1))
    bound = energies < profile.barrier_meV
    if np.count_nonzero(bound) < n:
        raise BandStructureError(
            f"only {np.count_nonzero(bound)} bound states below {profile.barrier_meV:.1f} meV, needed {n}")
    dx = profile.step
    psi = _fix_sign(vecs.T / np.sqrt(dx))
    xc = profile.x - profile.x.mean()
    dipoles = (psi * xc) @ psi.T * dx
    return SubbandSolution(energies=energies, psi=psi, x=profile.x, dipoles=dipoles)


def well_weights(sol: SubbandSolution, profile: PotentialProfile) -> np.ndarray:
    """Probability of each state left of the centre of the coupling barrier."""
    if len(profile.interfaces) < 3:
        raise BandStructureError("weights need a two-well stack")
    split = 0.5 * (profile.interfaces[1] + profile.interfaces[2])
    return np.sum(sol.psi[:, profile.x < split] ** 2, axis=1) * profile.step


def ladder_indices(sol: SubbandSolution, profile: PotentialProfile) -> tuple[int, ...]:
    """Eigenstate indices playing |1>..|5>.

    |1>..|4> are the four lowest states; |5> is the lowest state above the
    doublet that lives in the same well as |1> (the deep well's second
    excited subband).
    """
    w = well_weights(sol, profile)
    home_left = w[0] > 0.5
    for j in range(4, len(sol.energies)):
        if (w[j] > 0.5) == home_left:
            return (0, 1, 2, 3, j)
    raise BandStructureError("no second excited state in the ground-state well; solve for more states")


def dipole_ratios(sol: SubbandSolution, ladder=(0, 1, 2, 3, 4), floor: float = 1e-6) -> tuple[float, float, float]:
    """(m, q, k) = (mu41/mu31, mu42/mu32, mu54/mu53) over the chosen ladder."""
    i1, i2, i3, i4, i5 = ladder
    mu = sol.dipoles
    for i, j in ((i3, i1), (i3, i2), (i5, i3)):
        if abs(mu[i, j]) < floor:
            raise BandStructureError(f"vanishing reference dipole between states {i} and {j}")
    return (float(mu[i4, i1] / mu[i3, i1]), float(mu[i4, i2] / mu[i3, i2]), float(mu[i5, i4] / mu[i5, i3]))


def isolated_well_states(layers, which: int, barrier_x: float = 0.4, n: int = 3, **profile_kw):
    """States of well ``which`` (layer index) with every other layer turned into barrier.

    Uses the same grid as the full stack, so the result can be projected
    directly onto the coupled states.
    """
    layers = [(float(x), float(w)) for x, w in layers]
    solo = [(x if i == which else barrier_x, w) for i, (x, w) in enumerate(layers)]
    prof = build_profile(solo, barrier_x=barrier_x, **profile_kw)
    return prof, solve_subbands(prof, n)


@dataclass(frozen=True)
class LadderReport:
    energies: tuple[float, ...]
    ratios: tuple[float, float, float]
    mu31: float
    mu32: float
    mu51: float
    indices: tuple[int, ...]
    well_weights: tuple[float, ...]

    def as_dict(self) -> dict:
        m, q, k = self.ratios
        return {
            "energies_meV": list(self.energies),
            "m": m, "q": q, "k": k,
            "mu31_enm": self.mu31, "mu32_enm": self.mu32, "mu51_enm": self.mu51,
            "eigenstate_indices": list(self.indices),
            "left_well_weight": list(self.well_weights),
        }


def subband_ladder(layers, barrier_x: float = 0.4, n_solve: int = 8, **profile_kw) -> LadderReport:
    """Energies, dipole ratios and absolute dipoles for |1>..|5> of ``layers``."""
    prof = build_profile(layers, barrier_x=barrier_x, **profile_kw)
    sol = _solve_bound(prof, n_solve)
    idx = ladder_indices(sol, prof)
    mu = sol.dipoles
    return LadderReport(
        energies=tuple(float(sol.energies[i]) for i in idx),
        ratios=dipole_ratios(sol, idx),
        mu31=float(abs(mu[idx[2], idx[0]])),
        mu32=float(abs(mu[idx[2], idx[1]])),
        mu51=float(abs(mu[idx[4], idx[0]])),
        indices=idx,
        well_weights=tuple(float(w) for w in well_weights(sol, prof)[list(idx)]),
    )


def _solve_bound(profile: PotentialProfile, n: int) -> SubbandSolution:
    # ask for n states but keep only the bound ones
    diag, off = _hamiltonian(profile)
    energies = eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, n - 1))
    return solve_subbands(profile, int(np.count_nonzero(energies < profile.barrier_meV)))

import numpy as np
import pytest

from tunnelfwm import bandstructure as bs


def test_infinite_like_well_levels():
    # deep wide well: ground state close to the hard-wall value
    prof = bs.build_profile([(0.0, 20.0)], barrier_x=0.45, padding_nm=20.0, step_nm=0.02)
    sol = bs.solve_subbands(prof, 2)
    hard_wall = bs.HBAR2_2M0 / 0.067 * (np.pi / 20.0) ** 2
    assert 0.6 * hard_wall < sol.energies[0] < hard_wall


def test_single_well_against_transcendental_equation():
    # finite well with equal masses on both sides has an even-state condition k*tan(k*a/2) = kappa
    from scipy.optimize import brentq

    old_slope = bs.MASS_SLOPE
    bs.MASS_SLOPE = 0.0
    try:
        prof = bs.build_profile([(0.0, 10.0)], barrier_x=0.3, step_nm=0.01)
        e0 = bs.solve_subbands(prof, 1).energies[0]
    finally:
        bs.MASS_SLOPE = old_slope
    V = bs.conduction_offset(0.3)
    c = 1.0 / (bs.HBAR2_2M0 / 0.067)

    def f(E):
        k = np.sqrt(c * E)
        kap = np.sqrt(c * (V - E))
        return k * np.tan(k * 5.0) - kap

    exact = brentq(f, 1.0, min(V - 1e-6, (np.pi / 10.0) ** 2 / c - 1e-6))
    assert e0 == pytest.approx(exact, rel=2e-3)


def test_states_orthonormal_and_signed(defaults):
    prof = bs.build_profile(defaults[0].layers)
    sol = bs.solve_subbands(prof, 6)
    gram = sol.psi @ sol.psi.T * prof.step
    assert np.allclose(gram, np.eye(6), atol=1e-10)
    for row in sol.psi:
        first = np.argmax(np.abs(row) > 1e-3 * np.abs(row).max())
        assert row[first] > 0


def test_dipoles_symmetric(defaults):
    sol = bs.solve_subbands(bs.build_profile(defaults[0].layers), 6)
    assert np.allclose(sol.dipoles, sol.dipoles.T)


def test_ladder_selection(defaults):
    rep = bs.subband_ladder(defaults[0].layers)
    assert rep.indices[:4] == (0, 1, 2, 3)
    # |5> shares the well of |1>; |3>, |4> are delocalised
    w = rep.well_weights
    assert (w[4] > 0.5) == (w[0] > 0.5)
    assert 0.3 < w[2] < 0.7 and 0.3 < w[3] < 0.7


def test_doublet_overlaps_isolated_states(defaults):
    layers = defaults[0].layers
    prof = bs.build_profile(layers)
    sol = bs.solve_subbands(prof, 4)
    _, shallow = bs.isolated_well_states(layers, 0)
    _, deep = bs.isolated_well_states(layers, 2)
    minus = (shallow.psi[1] - deep.psi[1]) / np.sqrt(2)
    plus = (shallow.psi[1] + deep.psi[1]) / np.sqrt(2)
    assert abs(np.sum(sol.psi[2] * minus) * prof.step) > 0.9
    assert abs(np.sum(sol.psi[3] * plus) * prof.step) > 0.9


@pytest.mark.parametrize("layers,kw", [
    ([(0.5, 5.0)], {}),
    ([(0.0, -1.0)], {}),
    ([(0.0, 5.0)], {"padding_nm": 10.0}),
    ([(0.0, 5.0)], {"step_nm": 0.1}),
])
def test_invalid_structures(layers, kw):
    with pytest.raises(bs.BandStructureError):
        bs.build_profile(layers, **kw)


def test_too_few_bound_states():
    prof = bs.build_profile([(0.0, 2.0)], barrier_x=0.1)
    with pytest.raises(bs.BandStructureError):
        bs.solve_subbands(prof, 5)


def test_vanishing_reference_dipole():
    prof = bs.build_profile([(0.0, 25.0)])
    sol = bs.solve_subbands(prof, 5)
    # symmetric well: <3|x|1> between two even states vanishes
    with pytest.raises(bs.BandStructureError):
        bs.dipole_ratios(sol, (0, 1, 2, 3, 4))


def test_report_serialises(defaults):
    d = bs.subband_ladder(defaults[0].layers).as_dict()
    assert set(d) >= {"energies_meV", "m", "q", "k", "mu31_enm", "mu32_enm", "mu51_enm"}

from dataclasses import replace

import numpy as np
import pytest

from tunnelfwm import oracle, spectral
from tunnelfwm.params import HBAR_MEV_PS, to_dimensionless

SMALL = oracle.OracleGrids(n_t=1024, t_min=-8.0, t_max=24.0, dz_um=0.02)


@pytest.fixture(scope="module")
def weak(defaults):
    medium, drive = defaults
    s = HBAR_MEV_PS / drive.tau_ps
    return medium, replace(drive, omega_p0_meV=0.01 * s, omega_d2_meV=0.01 * s)


def test_no_coupling_leaves_fields_unchanged(weak):
    sys_ = replace(to_dimensionless(*weak), kappa_p=0.0, kappa_m=0.0)
    sol = oracle.integrate(None, None, [0.2], SMALL, system=sys_)
    assert np.allclose(sol.omega_p[0], sys_.omega_p0 * np.exp(-sol.t**2), atol=1e-15)
    assert np.all(sol.omega_m[0] == 0)


def test_no_two_photon_drive_generates_nothing(weak):
    sys_ = replace(to_dimensionless(*weak), omega_d2=0.0)
    sol = oracle.integrate(None, None, [0.2], SMALL, system=sys_)
    assert np.max(np.abs(sol.omega_m[0])) == 0.0


def test_undepleted_mode_has_no_norm_diagnostic(weak):
    sol = oracle.integrate(*weak, [0.1], SMALL)
    assert sol.norm_error[0] == 0.0


def test_short_distance_matches_closed_form(weak):
    sys_ = to_dimensionless(*weak)
    sol = oracle.integrate(None, None, [1.0], oracle.OracleGrids(dz_um=0.01), system=sys_)
    eta = np.linspace(-2, 2, 41)
    rho_o = oracle.oracle_efficiency(sol, 1.0, eta)
    rho_c = spectral.efficiency(1.0, eta, sys_)
    assert np.max(np.abs(rho_o - rho_c)) < 0.01 * np.max(rho_c)


def test_literal_two_photon_term_differs(weak):
    a = oracle.integrate(*weak, [0.2], SMALL)
    b = oracle.integrate(*weak, [0.2], SMALL, literal_eq5=True)
    assert not np.allclose(a.omega_m[0], b.omega_m[0])
    assert b.diagnostics["literal_eq5"]


def test_full_mode_conserves_norm_without_loss(weak):
    medium, drive = weak
    lossless = replace(medium, gamma2_meV=0.0, gamma3_meV=0.0, gamma4_meV=0.0, gamma5_meV=0.0)
    sol = oracle.integrate(lossless, drive, [0.2], oracle.OracleGrids(n_t=4096, dz_um=0.02), mode="full")
    assert sol.norm_error[0] < 1e-8


def test_full_and_undepleted_agree_at_weak_drive(weak):
    a = oracle.integrate(*weak, [0.2], SMALL)
    b = oracle.integrate(*weak, [0.2], SMALL, mode="full")
    scale = np.max(np.abs(a.omega_m[0]))
    assert np.max(np.abs(a.omega_m[0] - b.omega_m[0])) < 1e-3 * scale


def test_save_and_load(weak, tmp_path):
    sol = oracle.integrate(*weak, [0.0, 0.1], SMALL)
    data, meta = sol.save(tmp_path / "run")
    arrays = oracle.load_solution_arrays(tmp_path / "run")
    assert data.suffix == ".bin" and meta.suffix == ".json"
    for name in ("omega_p", "omega_m", "b"):
        assert np.array_equal(arrays[name], getattr(sol, name))


def test_stored_distances(weak):
    sol = oracle.integrate(*weak, [0.1, 0.0, 0.1], SMALL)
    assert np.all(sol.omega_m[1] == 0)
    assert np.array_equal(sol.omega_m[0], sol.omega_m[2])
    with pytest.raises(KeyError):
        sol.index(0.05)


@pytest.mark.parametrize("z,grids,mode,exc", [
    ([0.015], SMALL, "undepleted", ValueError),
    ([-0.02], SMALL, "undepleted", ValueError),
    ([0.02], replace(SMALL, dz_um=0.0), "undepleted", oracle.OracleError),
    ([0.02], SMALL, "sideways", ValueError),
])
def test_invalid_requests(weak, z, grids, mode, exc):
    with pytest.raises(exc):
        oracle.integrate(*weak, z, grids, mode=mode)


def test_unstable_step_aborts(weak):
    with pytest.raises(oracle.OracleError):
        oracle.integrate(*weak, [50.0], replace(SMALL, dz_um=5.0))


def test_spectral_ode_zero_distance(default_system):
    out = oracle.integrate_spectral_ode([0.0, 1.0], np.array([0.0, 0.5]), default_system)
    assert np.all(out[0] == 0) and np.all(out[1] != 0)

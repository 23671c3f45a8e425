from dataclasses import replace

import numpy as np
import pytest

from tunnelfwm import dispersion
from tunnelfwm.params import to_dimensionless


def test_analytic_slopes_match_finite_differences(default_system):
    s = default_system
    for eta0 in (-1.0, 0.0, 0.7):
        h = 1e-5
        kp = lambda e: dispersion.wavenumbers(e, s)[0]
        km = lambda e: dispersion.wavenumbers(e, s)[1]
        assert complex(dispersion.pump_slope(eta0, s)) == pytest.approx(
            complex((kp(eta0 + h) - kp(eta0 - h)) / (2 * h)), rel=1e-6)
        assert complex(dispersion.mixing_slope(eta0, s)) == pytest.approx(
            complex((km(eta0 + h) - km(eta0 - h)) / (2 * h)), rel=1e-6)


def test_free_space_velocity_is_c(default_system):
    s = replace(default_system, kappa_p=0.0, kappa_m=0.0)
    assert dispersion.pump_group_velocity(s) == pytest.approx(1.0)
    assert dispersion.mixing_group_velocity(s) == pytest.approx(1.0)


def test_tunneling_slows_the_pump(defaults):
    medium, drive = defaults
    tun = dispersion.pump_group_velocity(to_dimensionless(medium, drive))
    base = dispersion.pump_group_velocity(to_dimensionless(medium.without_tunneling(), drive))
    assert 1e-4 < tun < base < 1e-1


def test_matched_roots_are_symmetric_and_accurate(default_system):
    roots = dispersion.match_detuning(default_system)
    assert len(roots) == 2
    assert roots[0] == pytest.approx(-roots[1], rel=1e-9)
    vgp = dispersion.pump_group_velocity(default_system)
    for r in roots:
        vgm = dispersion.mixing_group_velocity(dispersion.with_delta_m(default_system, r))
        assert abs(vgm - vgp) / vgp < 1e-9


def test_no_root_in_narrow_bracket(default_system):
    with pytest.raises(dispersion.NoRootError):
        dispersion.match_detuning(default_system, bracket_meV=(0.2, 0.5))


def test_anomalous_branch_reported(default_system):
    # exactly on the mixing resonance the slope is 1 - kappa_m/gamma5^2 < 0
    s = dispersion.with_delta_m(default_system, 0.0)
    with pytest.raises(dispersion.AnomalousDispersionError):
        dispersion.mixing_group_velocity(s)


def test_group_velocity_fallback_uses_differences():
    v = dispersion.group_velocity(lambda e: 4.0 * e + 0j)
    assert v == pytest.approx(0.25)


def test_absorption_positive_with_loss(default_system):
    eta = np.linspace(-5, 5, 101)
    assert np.all(dispersion.absorption_spectrum(eta, default_system) > 0)


def test_dispersion_point_fields(default_system):
    p = dispersion.dispersion_point(0.0, default_system)
    assert p.absorption == pytest.approx(complex(p.Kp).imag)
    assert p.vgp == pytest.approx(dispersion.pump_group_velocity(default_system))
    # the preset mixing detuning sits on the anomalous side of the resonance
    assert np.isnan(p.vgm)


def test_brute_force_scan_brackets_roots(default_system):
    grid, mismatch = dispersion.velocity_mismatch_scan(default_system, bracket_meV=(0.09, 0.11), step_meV=1e-4)
    root = dispersion.match_detuning(default_system)[1]
    assert abs(grid[np.argmin(mismatch)] - root) <= 1e-4


def test_slopes_at_random_points(default_system, rng):
    s = default_system
    h = 1e-6
    for eta0 in rng.uniform(-4, 4, 100):
        fd = (dispersion.wavenumbers(eta0 + h, s)[0] - dispersion.wavenumbers(eta0 - h, s)[0]) / (2 * h)
        assert abs(dispersion.pump_slope(eta0, s) - fd) <= 1e-6 * abs(fd)

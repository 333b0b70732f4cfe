import numpy as np
import pytest

from spinopt import (
    InvalidFieldError,
    constant_drive,
    enforce_amplitude_constraint,
    envelope,
    peak_amplitude,
    pm_field,
    quadratures,
    sfb_field,
)

from oracles import pm_quadratures_direct, sfb_quadratures_direct

TWO_PI = 2 * np.pi
OMEGA_MAX = TWO_PI * 10e6
T = 100e-9


def test_pm_zero_modulation_is_constant_drive():
    omega = TWO_PI * 3e6
    fld = pm_field([2 * omega], [0.0], [TWO_PI * 1e7], T, OMEGA_MAX)
    for t in (0.0, 13e-9, T):
        wx, wy = quadratures(fld, t)
        assert wx == pytest.approx(omega, abs=1e-6)
        assert wy == pytest.approx(0.0, abs=1e-9)


def test_sfb_pure_y_quadrature():
    omega = TWO_PI * 2e6
    fld = sfb_field([2 * omega], [0.0], [0.0], [np.pi / 2], T, OMEGA_MAX)
    wx, wy = quadratures(fld, 42e-9)
    assert abs(wx) < 1e-9 * omega
    assert wy == pytest.approx(omega, rel=1e-12)


def test_pm_quadratures_match_direct_sum():
    # smooth two-set field evaluated against a plain-loop reference
    amps = [0.0332e9, 0.011e9]
    depths = [0.0104e9, 0.021e9]
    freqs = [0.0378e9, 0.0291e9]
    fld = pm_field(amps, depths, freqs, T, OMEGA_MAX)
    for t in (0.0, 50e-9, 77.3e-9, T):
        wx, wy = quadratures(fld, t)
        ex, ey = pm_quadratures_direct(amps, depths, freqs, t)
        assert wx == pytest.approx(ex, rel=1e-12, abs=1e-6)
        assert wy == pytest.approx(ey, rel=1e-12, abs=1e-6)


def test_sfb_quadratures_match_direct_sum():
    amps = [0.05e9, 0.02e9]
    freqs = [0.031e9, 0.011e9]
    phases = [0.4, 5.1]
    angles = [1.1, 2.9]
    fld = sfb_field(amps, freqs, phases, angles, T, OMEGA_MAX)
    for t in (0.0, 18e-9, 64e-9):
        wx, wy = quadratures(fld, t)
        ex, ey = sfb_quadratures_direct(amps, freqs, phases, angles, t)
        assert wx == pytest.approx(ex, rel=1e-12, abs=1e-6)
        assert wy == pytest.approx(ey, rel=1e-12, abs=1e-6)


def test_zero_mod_freq_limit_matches_tiny_freq():
    # the b/nu * sin(nu t) phase tends to b * t as nu -> 0
    a, b = 0.04e9, 0.02e9
    exact = pm_field([a], [b], [0.0], T, OMEGA_MAX)
    tiny = pm_field([a], [b], [1e-3], T, OMEGA_MAX)
    t = 80e-9
    wx0, wy0 = quadratures(exact, t)
    assert wx0 == pytest.approx(0.5 * a * np.cos(b * t), rel=1e-12)
    assert wy0 == pytest.approx(0.5 * a * np.sin(b * t), rel=1e-12)
    wx1, wy1 = quadratures(tiny, t)
    assert wx1 == pytest.approx(wx0, rel=1e-9)
    assert wy1 == pytest.approx(wy0, rel=1e-9)


def test_quadratures_accept_arrays():
    fld = pm_field([0.03e9], [0.01e9], [0.03e9], T, OMEGA_MAX)
    ts = np.linspace(0, T, 7)
    wx, wy = quadratures(fld, ts)
    assert wx.shape == ts.shape
    singles = [quadratures(fld, t) for t in ts]
    np.testing.assert_allclose(wx, [s[0] for s in singles], rtol=1e-13)
    np.testing.assert_allclose(wy, [s[1] for s in singles], rtol=1e-13)


def test_non_finite_parameters_rejected():
    with pytest.raises(InvalidFieldError):
        pm_field([np.nan], [0.0], [0.0], T, OMEGA_MAX)
    with pytest.raises(InvalidFieldError):
        pm_field([1e7], [np.inf], [0.0], T, OMEGA_MAX)
    with pytest.raises(InvalidFieldError):
        sfb_field([1e7], [0.0], [0.0], [0.0], -1e-9, OMEGA_MAX)


def test_parameter_length_mismatch_rejected():
    with pytest.raises(InvalidFieldError):
        pm_field([1e7, 2e7], [0.0], [0.0, 0.0], T, OMEGA_MAX)
    with pytest.raises(InvalidFieldError):
        sfb_field([1e7], [0.0, 0.0], [0.0], [0.0], T, OMEGA_MAX)


def test_enforce_returns_same_field_when_within_limit():
    fld = pm_field([OMEGA_MAX], [0.01e9], [0.03e9], T, OMEGA_MAX)
    assert enforce_amplitude_constraint(fld) is fld


def test_enforce_rescales_constant_overdrive():
    # peak quadrature of a zero-depth set is a/2, so a = 4*limit scales to 2*limit
    fld = pm_field([4 * OMEGA_MAX], [0.0], [0.0], T, OMEGA_MAX)
    out = enforce_amplitude_constraint(fld)
    assert out.amplitudes[0] == pytest.approx(2 * OMEGA_MAX, rel=1e-12)
    assert peak_amplitude(out) == pytest.approx(OMEGA_MAX, rel=1e-12)


def test_enforce_two_set_interference_peak():
    fld = pm_field(
        [1.9 * OMEGA_MAX, 1.4 * OMEGA_MAX],
        [0.02e9, 0.05e9],
        [0.02e9, 0.045e9],
        T,
        OMEGA_MAX,
    )
    out = enforce_amplitude_constraint(fld)
    # dense-grid oracle on a finer grid than enforcement uses
    ts = np.linspace(0, T, 40001)
    assert np.max(envelope(out, ts)) <= OMEGA_MAX + 1e-9 * OMEGA_MAX


def test_enforce_clamps_frequencies_and_phases():
    cap = 5 * TWO_PI / T
    fld = sfb_field([1e7], [2 * cap], [-1.0], [7.0], T, OMEGA_MAX)
    out = enforce_amplitude_constraint(fld)
    assert out.freqs[0] == pytest.approx(cap)
    assert out.phases[0] == 0.0
    assert out.quad_angles[0] == pytest.approx(TWO_PI)
    pm = pm_field([1e7], [2 * cap], [-0.1e9], T, OMEGA_MAX)
    out_pm = enforce_amplitude_constraint(pm)
    assert out_pm.mod_depths[0] == pytest.approx(cap)
    assert out_pm.mod_freqs[0] == 0.0


def test_constant_drive_rotation_rate_convention():
    rate = TWO_PI * 10e6
    fld = constant_drive(rate, 50e-9, OMEGA_MAX)
    wx, wy = quadratures(fld, 25e-9)
    assert wx == pytest.approx(rate / 2, rel=1e-12)
    assert wy == 0.0

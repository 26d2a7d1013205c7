import math

import numpy as np
import pytest
from scipy.special import j1, jv

import oam_bench as ob
from oracles import (
    calibrate_by_bisection,
    gaussian_square_power_fraction,
    gaussian_waist_1e2,
    j1_series,
    measured_waist,
)

DELTA30 = ob.calibrate_phase_depth(0.30)


def test_hologram_spec_validation():
    with pytest.raises(ob.ConfigError):
        ob.HologramSpec(charge=1, order=1, phase_depth=-0.1)
    with pytest.raises(ob.ConfigError):
        ob.HologramSpec(charge=1, order=1, phase_depth=1.0, displacement=(np.inf, 0.0))


def test_zeroth_order_is_constant(gauss):
    spec = ob.HologramSpec(charge=1, order=0, phase_depth=1.2, displacement=(3e-6, -2e-6))
    out = ob.apply_hologram_order(gauss, spec)
    np.testing.assert_allclose(out.values, jv(0, 1.2) * gauss.values, rtol=1e-14)


def test_first_order_power_ratio(gauss, vortex):
    spec = ob.HologramSpec(charge=1, order=1, phase_depth=DELTA30)
    # Bright-core input: exact up to the single dark sample at the core.
    out = ob.apply_hologram_order(gauss, spec)
    assert ob.power(out) / ob.power(gauss) == pytest.approx(j1(DELTA30) ** 2, rel=1e-3)
    # Dark-core input: the ratio is exact.
    out = ob.apply_hologram_order(vortex, spec)
    assert ob.power(out) / ob.power(vortex) == pytest.approx(j1(DELTA30) ** 2, rel=1e-12)


def test_centered_fork_shifts_winding(gauss):
    spec = ob.HologramSpec(charge=1, order=1, phase_depth=DELTA30)
    out = ob.apply_hologram_order(gauss, spec)
    assert ob.oam_spectrum(out, l_range=(-4, 4)).fraction(1) >= 0.999


def test_far_displaced_fork_leaves_winding(gauss, waist):
    spec = ob.HologramSpec(
        charge=1, order=1, phase_depth=DELTA30, displacement=(10.0 * waist, 0.0)
    )
    out = ob.apply_hologram_order(gauss, spec)
    assert ob.oam_spectrum(out, l_range=(-4, 4)).fraction(0) >= 0.99


def test_order_algebra_composition(gauss):
    first = ob.HologramSpec(charge=1, order=1, phase_depth=DELTA30)
    second = ob.HologramSpec(charge=2, order=-1, phase_depth=DELTA30)
    out = ob.apply_hologram_order(ob.apply_hologram_order(gauss, first), second)
    target = 1 * 1 + 2 * (-1)
    assert ob.oam_spectrum(out, l_range=(-4, 4)).fraction(target) >= 0.998


def test_jacobi_anger_energy_budget():
    for delta in (0.5, DELTA30, 1.8):
        total = sum(jv(m, delta) ** 2 for m in range(-20, 21))
        assert total == pytest.approx(1.0, abs=1e-6)


def test_calibrate_phase_depth_matches_series_bisection():
    oracle = calibrate_by_bisection(0.30)
    assert abs(j1_series(oracle) ** 2 - 0.30) < 1e-12
    assert DELTA30 == pytest.approx(oracle, abs=1e-9)
    assert abs(j1(DELTA30) ** 2 - 0.30) < 1e-9


def test_calibrate_small_target_small_depth():
    assert ob.calibrate_phase_depth(1e-8) < 1e-3


def test_calibrate_unreachable_target():
    with pytest.raises(ob.UnreachableEfficiencyError):
        ob.calibrate_phase_depth(ob.MAX_FIRST_ORDER_EFFICIENCY + 1e-6)
    with pytest.raises(ob.UnreachableEfficiencyError):
        ob.calibrate_phase_depth(0.0)


def test_lens_conserves_power_and_composes(gauss):
    out = ob.apply_lens(gauss, 35e-3)
    assert ob.power(out) == pytest.approx(ob.power(gauss), rel=1e-12)
    twice = ob.apply_lens(out, 35e-3)
    half = ob.apply_lens(gauss, 17.5e-3)
    scale = np.abs(gauss.values).max()
    np.testing.assert_allclose(twice.values, half.values, rtol=0, atol=1e-12 * scale)


def test_lens_infinite_focal_is_identity(gauss):
    out = ob.apply_lens(gauss, math.inf)
    assert np.array_equal(out.values, gauss.values)
    with pytest.raises(ob.ConfigError):
        ob.apply_lens(gauss, 0.0)


def _propagation_grid(w0, z, wavelength=670e-9, n=1024, margin=1.05):
    pitch = math.sqrt(wavelength * z / n) * margin
    return ob.Grid(nx=n, ny=n, dx=pitch, dy=pitch, wavelength=wavelength)


def test_propagate_zero_distance_identity(gauss):
    out = ob.propagate(gauss, 0.0)
    assert np.array_equal(out.values, gauss.values)
    with pytest.raises(ob.ConfigError):
        ob.propagate(gauss, -1.0)


def test_propagate_rayleigh_range_growth():
    w0, lam = 50e-6, 670e-9
    zr = np.pi * w0**2 / lam
    grid = _propagation_grid(w0, zr)
    mode = ob.lg_mode(ob.LGIndex(0, 0), w0, grid)
    out = ob.propagate(mode, zr)
    expected = gaussian_waist_1e2(zr, w0, lam)
    assert expected == pytest.approx(w0 * np.sqrt(2.0), rel=1e-12)
    assert measured_waist(out) == pytest.approx(expected, rel=5e-3)
    assert ob.power(out) == pytest.approx(ob.power(mode), rel=1e-6)


def test_propagate_preserves_winding():
    w0, lam = 50e-6, 670e-9
    zr = np.pi * w0**2 / lam
    grid = _propagation_grid(w0, zr)
    mode = ob.lg_mode(ob.LGIndex(0, 1), w0, grid)
    out = ob.propagate(mode, zr)
    spec = ob.oam_spectrum(out, l_range=(-4, 4), n_azimuthal=512, n_radial=512, interp_order=5)
    assert spec.fraction(1) >= 0.999


def test_propagate_warns_when_aliasing(small_grid):
    mode = ob.lg_mode(ob.LGIndex(0, 0), 12.5e-6, small_grid)
    z_limit = small_grid.nx * small_grid.dx**2 / small_grid.wavelength
    with pytest.warns(ob.AliasingRiskWarning):
        ob.propagate(mode, 2.0 * z_limit)


def test_two_f_system_fourier_waist():
    w0, lam, f = 120e-6, 670e-9, 35e-3
    n = 1024
    pitch = math.sqrt(lam * f / n) * 1.02
    grid = ob.Grid(nx=n, ny=n, dx=pitch, dy=pitch, wavelength=lam)
    mode = ob.lg_mode(ob.LGIndex(0, 0), w0, grid)
    out = ob.propagate(ob.apply_lens(ob.propagate(mode, f), f), f)
    assert measured_waist(out) == pytest.approx(lam * f / (np.pi * w0), rel=5e-3)


def test_fourier_relay_matches_analytic_focal_gaussian():
    w0, lam, f = 120e-6, 670e-9, 35e-3
    grid = ob.Grid.for_waist(w0, lam, n=512, window_factor=20.0)
    mode = ob.lg_mode(ob.LGIndex(0, 0), w0, grid)
    relayed = ob.fourier_relay_2f(mode, f)
    assert relayed.dx == pytest.approx(lam * f / (grid.nx * grid.dx), rel=1e-15)
    assert ob.power(relayed) == pytest.approx(ob.power(mode), rel=1e-12)
    focal = ob.lg_mode(ob.LGIndex(0, 0), lam * f / (np.pi * w0), relayed.grid)
    assert ob.coupling_efficiency(relayed, focal) == pytest.approx(1.0, abs=1e-9)


def test_fourier_relay_twice_inverts(waist):
    grid = ob.Grid.for_waist(waist, 670e-9, n=256)
    X, Y = grid.meshgrid()
    asym = np.sqrt(2 / np.pi) / waist * np.exp(-((X - waist) ** 2 + (Y + 0.5 * waist) ** 2) / waist**2)
    field = ob.ComplexField(grid, asym)
    out = ob.fourier_relay_2f(ob.fourier_relay_2f(field, 35e-3), 35e-3)
    inverted = np.roll(field.values[::-1, ::-1], (1, 1), axis=(0, 1))
    np.testing.assert_allclose(np.abs(out.values), np.abs(inverted), atol=1e-12 * np.abs(field.values).max())


def test_aperture_limits(gauss, waist):
    wide = ob.apply_aperture(gauss, 1.0, "square")
    assert np.array_equal(wide.values, gauss.values)
    narrow = ob.apply_aperture(gauss, waist / 100.0, "circle")
    assert ob.power(narrow) < 1e-3
    assert ob.power(narrow) >= 0.0
    with pytest.raises(ob.ConfigError):
        ob.apply_aperture(gauss, -1.0)
    with pytest.raises(ob.ConfigError):
        ob.apply_aperture(gauss, 1.0, "hex")


def test_square_aperture_matches_erf_product(gauss, waist):
    half = 15e-6
    expected = gaussian_square_power_fraction(half, waist)
    clipped = ob.apply_aperture(gauss, half, "square")
    coarse = abs(ob.power(clipped) / ob.power(gauss) - expected)
    # hard-edge quadrature is first order in the pitch
    assert coarse < 2e-3
    fine_grid = ob.Grid.for_waist(waist, 670e-9, n=2048)
    fine_mode = ob.lg_mode(ob.LGIndex(0, 0), waist, fine_grid)
    fine = abs(ob.power(ob.apply_aperture(fine_mode, half, "square")) - expected)
    assert fine < coarse


def test_full_grating_orders_carry_bessel_weights(waist):
    # Validation mode: diffract off the explicit carrier and measure the
    # power in each carrier harmonic of the angular spectrum.
    lam = 670e-9
    grid = ob.Grid.for_waist(waist, lam, n=1024, window_factor=16.0)
    mode = ob.lg_mode(ob.LGIndex(0, 0), waist, grid)
    period = 16 * grid.dx
    spec = ob.HologramSpec(charge=0, order=1, phase_depth=DELTA30, carrier_period=period)
    out = ob.apply_hologram_full(mode, spec)
    spectrum = np.abs(np.fft.fft2(out.values)) ** 2
    fx = np.fft.fftfreq(grid.nx, grid.dx)
    carrier = 1.0 / period
    total = spectrum.sum()
    for m in (-1, 0, 1, 2):
        sel = np.abs(fx - m * carrier) < carrier / 2.0
        order_power = spectrum[:, sel].sum() / total
        assert order_power == pytest.approx(jv(m, DELTA30) ** 2, abs=2e-3), m
    with pytest.raises(ob.ConfigError):
        ob.apply_hologram_full(mode, ob.HologramSpec(0, 1, 1.0, carrier_period=grid.dx))


def test_apply_element_dispatch(gauss):
    spec = ob.HologramSpec(charge=1, order=1, phase_depth=DELTA30)
    assert np.array_equal(
        ob.apply_element(gauss, ob.Hologram(spec)).values,
        ob.apply_hologram_order(gauss, spec).values,
    )
    assert np.array_equal(
        ob.apply_element(gauss, ob.ThinLens(35e-3)).values,
        ob.apply_lens(gauss, 35e-3).values,
    )
    assert np.array_equal(
        ob.apply_element(gauss, ob.FreeSpace(0.0)).values, gauss.values
    )
    assert np.array_equal(
        ob.apply_element(gauss, ob.Aperture(1.0)).values, gauss.values
    )
    with pytest.raises(ob.ConfigError):
        ob.ThinLens(0.0)
    with pytest.raises(ob.ConfigError):
        ob.FreeSpace(-1.0)

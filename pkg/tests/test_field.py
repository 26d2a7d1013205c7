import numpy as np
import pytest
from hypothesis import given, strategies as st

import oam_bench as ob
from oracles import lg_radial_power

complex_scalars = st.complex_numbers(
    min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False
)


def test_grid_validation():
    with pytest.raises(ob.ConfigError):
        ob.Grid(nx=14, ny=16, dx=1e-6, dy=1e-6, wavelength=670e-9)
    with pytest.raises(ob.ConfigError):
        ob.Grid(nx=17, ny=16, dx=1e-6, dy=1e-6, wavelength=670e-9)
    with pytest.raises(ob.ConfigError):
        ob.Grid(nx=32, ny=32, dx=-1e-6, dy=1e-6, wavelength=670e-9)
    with pytest.raises(ob.ConfigError):
        ob.Grid(nx=32, ny=32, dx=1e-6, dy=1e-6, wavelength=0.0)


def test_field_shape_and_finiteness_checked(small_grid):
    with pytest.raises(ob.ConfigError):
        ob.ComplexField(small_grid, np.zeros((4, 4), dtype=complex))
    bad = np.zeros(small_grid.shape, dtype=complex)
    bad[0, 0] = np.nan
    with pytest.raises(ob.ConfigError):
        ob.ComplexField(small_grid, bad)


def test_fields_are_immutable(gauss):
    with pytest.raises(ValueError):
        gauss.values[0, 0] = 1.0


def test_inner_product_is_power_on_diagonal(gauss):
    ip = ob.inner_product(gauss, gauss)
    assert ip.imag == pytest.approx(0.0, abs=1e-15)
    assert ip.real == pytest.approx(ob.power(gauss), rel=1e-12)


def test_inner_product_conjugate_symmetry(gauss, vortex):
    ab = ob.inner_product(gauss, vortex)
    ba = ob.inner_product(vortex, gauss)
    assert ab == pytest.approx(np.conj(ba), abs=1e-15)


def test_inner_product_azimuthal_orthogonality(gauss, vortex):
    bound = 1e-10 * np.sqrt(ob.power(gauss) * ob.power(vortex))
    assert abs(ob.inner_product(gauss, vortex)) < bound


def test_unit_lg_power_against_radial_quadrature(default_grid, waist):
    # Continuum oracle: 1-D quadrature of the analytic radial density.
    for p, l in [(0, 0), (0, 1), (1, 2)]:
        mode = ob.lg_mode(ob.LGIndex(p, l), waist, default_grid)
        reference = lg_radial_power(p, l, waist)
        assert reference == pytest.approx(1.0, abs=1e-9)
        assert ob.power(mode) == pytest.approx(reference, abs=1e-6)


def test_grid_mismatch_rejected(gauss, waist):
    other = ob.Grid.for_waist(waist, 670e-9, n=256)
    small = ob.lg_mode(ob.LGIndex(0, 0), waist, other)
    with pytest.raises(ob.GridMismatchError):
        ob.inner_product(gauss, small)
    wl = ob.Grid(nx=512, ny=512, dx=gauss.dx, dy=gauss.dy, wavelength=500e-9)
    recolored = ob.ComplexField(wl, gauss.values)
    with pytest.raises(ob.GridMismatchError):
        ob.inner_product(gauss, recolored)


@given(c=complex_scalars)
def test_inner_product_sesquilinear(c):
    grid = ob.Grid.for_waist(1.0, 1.0, n=16)
    rng = np.random.default_rng(7)
    a = ob.ComplexField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    b = ob.ComplexField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    ca = ob.scale_and_add([(c, a)])
    lhs = ob.inner_product(ca, b)
    rhs = np.conj(c) * ob.inner_product(a, b)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@given(c=complex_scalars)
def test_power_homogeneity(c):
    grid = ob.Grid.for_waist(1.0, 1.0, n=16)
    rng = np.random.default_rng(11)
    f = ob.ComplexField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    scaled = ob.scale_and_add([(c, f)])
    assert ob.power(scaled) == pytest.approx(abs(c) ** 2 * ob.power(f), rel=1e-12)


def test_power_zero_field(small_grid):
    zero = ob.ComplexField(small_grid, np.zeros(small_grid.shape, dtype=complex))
    assert ob.power(zero) == 0.0


def test_scale_and_add_identity_and_cancellation(gauss):
    same = ob.scale_and_add([(1.0, gauss)])
    assert np.array_equal(same.values, gauss.values)
    zero = ob.scale_and_add([(1.0, gauss), (-1.0, gauss)])
    assert ob.power(zero) == 0.0


def test_scale_and_add_orthogonal_pythagoras(gauss, vortex):
    combined = ob.scale_and_add([(0.6, gauss), (0.8j, vortex)])
    assert ob.power(combined) == pytest.approx(0.36 + 0.64, abs=1e-6)


def test_scale_and_add_empty_rejected():
    with pytest.raises(ob.ConfigError):
        ob.scale_and_add([])


def test_parseval_fixes_fft_convention(gauss):
    spectrum = np.fft.fft2(gauss.values)
    via_fft = np.sum(np.abs(spectrum) ** 2) * gauss.dx * gauss.dy / (gauss.nx * gauss.ny)
    assert via_fft == pytest.approx(ob.power(gauss), rel=1e-10)


def test_normalized_unit_power(gauss):
    doubled = ob.scale_and_add([(2.0, gauss)])
    assert ob.power(ob.normalized(doubled)) == pytest.approx(1.0, rel=1e-12)
    zero = ob.ComplexField(gauss.grid, np.zeros(gauss.grid.shape, dtype=complex))
    with pytest.raises(ob.ZeroPowerError):
        ob.normalized(zero)

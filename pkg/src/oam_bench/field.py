"""Sampled complex scalar fields on uniform 2-D grids and their algebra.

Conventions
-----------
* ``values`` has shape ``(ny, nx)`` indexed ``[iy, ix]``; the physical
  coordinate of sample ``(iy, ix)`` is ``x = (ix - nx/2) * dx + origin[0]``,
  ``y = (iy - ny/2) * dy + origin[1]``.  The grid center sits exactly on a
  sample, which requires even ``nx, ny``.
* Power is the discrete quadrature ``sum |u|^2 * dx * dy``; with numpy's
  unnormalized forward FFT this equals ``sum |FFT(u)|^2 * dx * dy / (nx*ny)``
  (Parseval), which fixes the FFT normalization used throughout.
* Amplitude units are arbitrary.  Only ratios (efficiencies, normalized
  counts) are contractual.

Fields are immutable values: every operation returns a new field and the
backing arrays are write-protected, so fields can be shared freely between
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from functools import lru_cache

import numpy as np

from .errors import ConfigError, GridMismatchError

MIN_GRID_SAMPLES = 16


@dataclass(frozen=True)
class Grid:
    """Uniform sampling grid with physical pitch and vacuum wavelength.

    Parameters
    ----------
    nx, ny : int
        Samples per axis; must be even and >= 16 (FFT-based propagation).
    dx, dy : float
        Sample pitch in meters.
    wavelength : float
        Vacuum wavelength in meters.
    origin : tuple of float
        Physical coordinate of the grid center, meters.
    """

    nx: int
    ny: int
    dx: float
    dy: float
    wavelength: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for n, name in ((self.nx, "nx"), (self.ny, "ny")):
            if n < MIN_GRID_SAMPLES or n % 2:
                raise ConfigError(f"{name}={n} must be even and >= {MIN_GRID_SAMPLES}")
        if not (self.dx > 0 and self.dy > 0):
            raise ConfigError("grid pitch must be positive")
        if not self.wavelength > 0:
            raise ConfigError("wavelength must be positive")

    @classmethod
    def for_waist(cls, waist, wavelength, n=512, window_factor=8.0, origin=(0.0, 0.0)):
        """Square grid whose window is ``window_factor`` times the waist.

        The default factor of 8 keeps the tails of low-order vortex modes
        below 1e-8 of peak at the window boundary.
        """
        pitch = window_factor * waist / n
        return cls(nx=n, ny=n, dx=pitch, dy=pitch, wavelength=wavelength, origin=origin)

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def window(self):
        """Physical window extent (width_x, width_y) in meters."""
        return (self.nx * self.dx, self.ny * self.dy)

    def axes(self):
        """1-D coordinate arrays (x, y) in meters."""
        x = (np.arange(self.nx) - self.nx // 2) * self.dx + self.origin[0]
        y = (np.arange(self.ny) - self.ny // 2) * self.dy + self.origin[1]
        return x, y

    def meshgrid(self):
        """Broadcastable coordinate arrays (X, Y), cached per grid."""
        return _cached_meshgrid(self)

    def compatible(self, other):
        return (
            self.shape == other.shape
            and self.dx == other.dx
            and self.dy == other.dy
            and self.wavelength == other.wavelength
        )


@lru_cache(maxsize=64)
def _cached_meshgrid(grid: Grid):
    x, y = grid.axes()
    X, Y = np.meshgrid(x, y)
    X.flags.writeable = False
    Y.flags.writeable = False
    return X, Y


@dataclass(frozen=True)
class ComplexField:
    """Complex scalar amplitude sampled on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray = dataclass_field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, copy=True)
        if values.shape != self.grid.shape:
            raise ConfigError(
                f"values shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values.view(np.float64))):
            raise ConfigError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def _wrap(cls, grid, values):
        # Internal fast path: takes ownership of a freshly built array.
        self = object.__new__(cls)
        values = np.ascontiguousarray(values, dtype=np.complex128)
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        return self

    # Pass-through grid attributes, kept flat for convenience.
    @property
    def nx(self):
        return self.grid.nx

    @property
    def ny(self):
        return self.grid.ny

    @property
    def dx(self):
        return self.grid.dx

    @property
    def dy(self):
        return self.grid.dy

    @property
    def wavelength(self):
        return self.grid.wavelength

    @property
    def origin(self):
        return self.grid.origin

    def with_values(self, values):
        """New field on the same grid with replaced sample values."""
        return ComplexField(self.grid, values)


def _require_compatible(a: ComplexField, b: ComplexField):
    if not a.grid.compatible(b.grid):
        raise GridMismatchError(
            f"grids differ: {a.grid.shape}/{a.grid.dx}/{a.grid.wavelength} vs "
            f"{b.grid.shape}/{b.grid.dx}/{b.grid.wavelength}"
        )


def inner_product(a: ComplexField, b: ComplexField) -> complex:
    """Discrete overlap integral ``sum conj(a) * b * dx * dy``.

    Conjugate-symmetric and sesquilinear (antilinear in the first slot):
    ``inner_product(c*a, b) == conj(c) * inner_product(a, b)``.

    Raises
    ------
    GridMismatchError
        When the fields do not share shape, pitch and wavelength.
    """
    _require_compatible(a, b)
    return complex(np.vdot(a.values, b.values) * (a.dx * a.dy))


def power(f: ComplexField) -> float:
    """Total power ``sum |u|^2 * dx * dy`` (non-negative)."""
    return float(np.vdot(f.values, f.values).real * (f.dx * f.dy))


def normalized(f: ComplexField) -> ComplexField:
    """Field scaled to unit power."""
    p = power(f)
    if p <= 0.0:
        from .errors import ZeroPowerError

        raise ZeroPowerError("cannot normalize a zero-power field")
    return ComplexField._wrap(f.grid, f.values / np.sqrt(p))


def scale_and_add(terms) -> ComplexField:
    """Pointwise linear combination ``sum_k c_k * f_k``.

    Parameters
    ----------
    terms : sequence of (complex, ComplexField)
        Non-empty list of coefficient/field pairs on one common grid.
    """
    terms = list(terms)
    if not terms:
        raise ConfigError("scale_and_add requires at least one (coefficient, field) pair")
    _, first = terms[0]
    acc = np.zeros(first.grid.shape, dtype=np.complex128)
    for coeff, f in terms:
        _require_compatible(first, f)
        acc += complex(coeff) * f.values
    return ComplexField._wrap(first.grid, acc)

"""Exception taxonomy and the CLI exit-code contract.

Exit codes are stable for harnesses:

* 0 -- success
* 2 -- configuration error (bad keys, incompatible grids, missing inputs)
* 3 -- numerical failure (no convergence, invalid intermediate values)
* 4 -- domain-range error (a requested value is outside the attainable range)
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DOMAIN = 4


class OamBenchError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = EXIT_NUMERIC


class ConfigError(OamBenchError):
    """Invalid or inconsistent configuration (exit code 2)."""

    exit_code = EXIT_CONFIG


class GridMismatchError(ConfigError):
    """Two fields do not share shape, pitch, or wavelength."""


class UndersampledWaistError(ConfigError):
    """Requested mode waist is too small for the grid pitch."""


class CenterOutOfGridError(ConfigError):
    """Decomposition center lies outside the physical grid window."""


class MissingSeedError(ConfigError):
    """A stochastic operation was invoked without a seed source."""


class BandCoverageError(ConfigError):
    """Requested wavelength band is not covered by the permittivity data."""


class NumericError(OamBenchError):
    """Numerical failure during computation (exit code 3)."""

    exit_code = EXIT_NUMERIC


class NoConvergenceError(NumericError):
    """An iterative solver found no fixed point in the available band."""


class DomainRangeError(OamBenchError):
    """Requested value outside the attainable range (exit code 4)."""

    exit_code = EXIT_DOMAIN


class UnreachableEfficiencyError(DomainRangeError):
    """Target diffraction efficiency exceeds the physical maximum."""


class ZeroPowerError(DomainRangeError):
    """Operation undefined for a zero-power input field."""


class AliasingRiskWarning(UserWarning):
    """Angular-spectrum propagation may alias at the requested distance."""

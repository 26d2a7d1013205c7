"""Shipped experiment presets: the canonical scan and spectrum scenarios.

Presets are flat ``key = value`` maps in the same namespace the config
parser uses, so a ``--config`` file can override any key.  The ``fig3*``
and ``fig4*`` scans realize the far-displaced preparation fork as its
plain-grating limit (``charge = 0``): the fork sits so far outside the
beam that the imprinted winding is exactly zero, which also keeps the
scan curve even-symmetric to rounding.
"""

from __future__ import annotations

_SCAN_COMMON = {
    "bench.wavelength": "670e-9",
    "bench.plate_waist": "12.5e-6",
    "bench.cgh1.enabled": "true",
    "bench.cgh1.order": "1",
    "bench.cgh1.efficiency": "0.30",
    "bench.cgh2.charge": "1",
    "bench.cgh2.order": "-1",
    "bench.cgh2.efficiency": "0.30",
    "bench.relay.focal_length": "35e-3",
    "bench.scan.start_waists": "-3",
    "bench.scan.stop_waists": "3",
    "bench.scan.points": "201",
    "bench.detector.counts_scale": "20000",
    "bench.detector.poisson_noise": "false",
    "seed": "20060670",
}

_PLATE_DEFAULTS = {
    "bench.plate.enabled": "true",
    "bench.plate.coherent": "true",
    "bench.plate.t.0": "0.0227",
    "bench.plate.t.1": "0.0156",
    "bench.plate.t.-1": "0.0142",
    "bench.plate.aperture_half_width": "15e-6",
    "bench.plate.aperture_shape": "square",
    "bench.plate.calibrated": "true",
}

# Gaussian input (fork far from the beam -> plain grating), vortex analyzer.
_FIG3A = {
    "command": "scan",
    **_SCAN_COMMON,
    "bench.cgh1.charge": "0",
    "bench.cgh1.displacement_waists": "0",
}

# Centered fork prepares the unit-winding vortex; analyzer undoes it.
_FIG3B = {
    "command": "scan",
    **_SCAN_COMMON,
    "bench.cgh1.charge": "1",
    "bench.cgh1.displacement_waists": "0",
}

# Same two runs with the hole-array plate at the relay focus.
_FIG4A = {**_FIG3A, **_PLATE_DEFAULTS}
_FIG4B = {**_FIG3B, **_PLATE_DEFAULTS}

# Slightly displaced fork prepares a fundamental/vortex superposition.
_FIG5A = {
    "command": "scan",
    **_SCAN_COMMON,
    "bench.cgh1.charge": "1",
    "bench.cgh1.displacement_waists": "0.5",
    "report.reference_visibility": "0.960",
}

_FIG5B = {
    **_FIG5A,
    **_PLATE_DEFAULTS,
    "report.reference_visibility": "0.944",
}

_FIG5B_DEPHASED = {
    **_FIG5B,
    "bench.plate.coherent": "false",
    "bench.n_shots": "200",
}

_FIG1 = {
    "command": "spectrum",
    "spectrum.period": "600e-9",
    "spectrum.hole_radius": "100e-9",
    "spectrum.film_thickness": "135e-9",
    "spectrum.eps_glass": "2.1025",
    "spectrum.permittivity_table": "builtin:gold",
    "spectrum.band_start": "450e-9",
    "spectrum.band_stop": "1000e-9",
    "spectrum.samples": "1101",
    "spectrum.orders": "1,0;1,1",
    "spectrum.peak_height": "0.03",
    "spectrum.peak_width": "15e-9",
    "spectrum.calibrated": "true",
    "spectrum.operating_wavelength": "670e-9",
    "spectrum.operating_transmittance": "0.025",
}

PRESETS = {
    "fig3a": _FIG3A,
    "fig3b": _FIG3B,
    "fig4a": _FIG4A,
    "fig4b": _FIG4B,
    "fig5a": _FIG5A,
    "fig5b": _FIG5B,
    "fig5b_dephased": _FIG5B_DEPHASED,
    "fig1": _FIG1,
}


def preset(name: str) -> dict:
    try:
        return dict(PRESETS[name])
    except KeyError:
        from .errors import ConfigError

        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None

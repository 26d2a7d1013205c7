"""oam-bench: scalar-wave simulator of an OAM transmission bench.

Builds Laguerre-Gaussian beams, diffracts them off displaced fork
holograms, relays them through twin lenses onto a nanohole-array plate
with per-OAM-channel transmission, projects onto a single-mode fiber and
analyzes displacement scans (counts, visibility, interference nulls).
"""

from .bench import (
    BenchConfig,
    BenchGridConfig,
    DetectorConfig,
    RelayConfig,
    ScanConfig,
    ScanResult,
    SuperpositionWeights,
    channel_overlap_table,
    prepare_superposition,
    run_scan,
    run_shot,
    visibility,
)
from .errors import (
    AliasingRiskWarning,
    BandCoverageError,
    CenterOutOfGridError,
    ConfigError,
    DomainRangeError,
    GridMismatchError,
    MissingSeedError,
    NoConvergenceError,
    NumericError,
    OamBenchError,
    UndersampledWaistError,
    UnreachableEfficiencyError,
    ZeroPowerError,
)
from .field import ComplexField, Grid, inner_product, normalized, power, scale_and_add
from .modes import (
    LGIndex,
    ModeSpectrum,
    coupling_efficiency,
    fiber_mode,
    lg_mode,
    oam_spectrum,
)
from .optics import (
    Aperture,
    BenchElement,
    FreeSpace,
    Hologram,
    HologramSpec,
    MAX_FIRST_ORDER_EFFICIENCY,
    ThinLens,
    apply_aperture,
    apply_element,
    apply_hologram_full,
    apply_hologram_order,
    apply_lens,
    calibrate_phase_depth,
    fourier_relay_2f,
    propagate,
)
from .plate import (
    DrudeMetal,
    PermittivityTable,
    PlateModel,
    SpectrumCurveConfig,
    SpectrumModel,
    apply_plate,
    array_classical_transmission,
    bethe_transmission,
    gold_drude_table,
    sp_resonance_wavelengths,
    transmittance_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "AliasingRiskWarning",
    "Aperture",
    "BandCoverageError",
    "BenchConfig",
    "BenchElement",
    "BenchGridConfig",
    "CenterOutOfGridError",
    "ComplexField",
    "ConfigError",
    "DetectorConfig",
    "DomainRangeError",
    "DrudeMetal",
    "FreeSpace",
    "Grid",
    "GridMismatchError",
    "Hologram",
    "HologramSpec",
    "LGIndex",
    "MAX_FIRST_ORDER_EFFICIENCY",
    "MissingSeedError",
    "ModeSpectrum",
    "NoConvergenceError",
    "NumericError",
    "OamBenchError",
    "PermittivityTable",
    "PlateModel",
    "RelayConfig",
    "ScanConfig",
    "ScanResult",
    "SpectrumCurveConfig",
    "SpectrumModel",
    "SuperpositionWeights",
    "ThinLens",
    "UndersampledWaistError",
    "UnreachableEfficiencyError",
    "ZeroPowerError",
    "apply_aperture",
    "apply_element",
    "apply_hologram_full",
    "apply_hologram_order",
    "apply_lens",
    "apply_plate",
    "array_classical_transmission",
    "bethe_transmission",
    "calibrate_phase_depth",
    "channel_overlap_table",
    "coupling_efficiency",
    "fiber_mode",
    "fourier_relay_2f",
    "gold_drude_table",
    "inner_product",
    "lg_mode",
    "normalized",
    "oam_spectrum",
    "power",
    "prepare_superposition",
    "propagate",
    "run_scan",
    "run_shot",
    "scale_and_add",
    "sp_resonance_wavelengths",
    "transmittance_spectrum",
    "visibility",
]

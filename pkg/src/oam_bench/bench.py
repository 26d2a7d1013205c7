"""Composition of the full bench and displacement-scan analysis.

Layout (one arm, left to right):

    source fiber -> CGH1 -> lens f -> [plate] -> lens f -> CGH2 -> fiber

The twin-lens relay is modeled as two ideal 2f Fourier blocks with the
plate at the common focal plane, so the field at the plate is the scaled
Fourier transform of the prepared field and the field at CGH2 is the
inverted image of it.  A Gaussian of waist ``w0`` at the holograms focuses
to ``lambda f / (pi w0)`` at the plate; defaults put a 12.5 um waist
there (25 um spot) through f = 35 mm lenses at 670 nm.

Counts model: the detected rate is

    counts = counts_scale * |<fiber | field_at_CGH2_after_CGH2>|^2

with a unit-power source, which equals counts_scale times the product of
the hologram order efficiencies, the plate transmission and the fiber
coupling efficiency of the arriving mode.  Optional Poisson shot noise is
applied last.  All randomness (dephasing phases, shot noise) is derived
from per-(displacement, shot) seed sequences, so scans are deterministic
and independent of evaluation order or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field, replace

import numpy as np

from .errors import ConfigError, MissingSeedError, ZeroPowerError
from .field import ComplexField, Grid, inner_product, power, scale_and_add
from .modes import LGIndex, fiber_mode, lg_mode, oam_spectrum, polar_decompose
from .optics import HologramSpec, _angular_spectrum, apply_hologram_order, fourier_relay_2f
from .plate import PlateApplication, PlateModel, decompose_plate, dephasing_phases

DEFAULT_WAVELENGTH = 670e-9
DEFAULT_FOCAL_LENGTH = 35e-3
DEFAULT_PLATE_WAIST = 12.5e-6  # 25 um spot diameter at 1/e^2 intensity

# Visibilities measured on the physical bench this simulator models, kept
# for side-by-side reporting (never asserted as equalities).
REFERENCE_VISIBILITIES = {
    "superposition_0_plus1": {"without_plate": 0.960, "with_plate": 0.944},
    "superposition_0_minus1": {"without_plate": 0.819, "with_plate": 0.820},
}


@dataclass(frozen=True)
class RelayConfig:
    """Twin-lens relay: ideal 2f blocks plus an optional plate defocus."""

    focal_length: float = DEFAULT_FOCAL_LENGTH
    plate_defocus: float = 0.0

    def __post_init__(self):
        if self.focal_length <= 0:
            raise ConfigError("relay focal length must be positive")


@dataclass(frozen=True)
class ScanConfig:
    """CGH2 displacement scan grid (meters along x)."""

    start: float
    stop: float
    points: int = 201

    def __post_init__(self):
        if self.points < 3:
            raise ConfigError("scan needs at least 3 points")
        if not self.stop > self.start:
            raise ConfigError("scan stop must exceed start")

    def displacements(self):
        d = np.linspace(self.start, self.stop, self.points)
        # Snap rounding residue to exact zero so an on-axis analyzer
        # position coincides with the grid node it nominally targets.
        d[np.abs(d) < 1e-9 * max(abs(self.start), abs(self.stop))] = 0.0
        return d


@dataclass(frozen=True)
class DetectorConfig:
    counts_scale: float = 1.0
    poisson_noise: bool = False
    seed: int | None = 0

    def __post_init__(self):
        if self.counts_scale <= 0:
            raise ConfigError("counts_scale must be positive")


@dataclass(frozen=True)
class BenchGridConfig:
    """Numerical grids of the two conjugate planes.

    The plate-plane window is ``plate_window_waists`` spot waists wide;
    the hologram-plane window follows from Fourier conjugacy
    (``window_holo * window_plate = n * lambda * f``).  ``crop_waists``
    bounds the region used for fiber-overlap evaluation during scans.
    """

    n: int = 512
    plate_window_waists: float = 32.0
    crop_waists: float = 8.0


@dataclass(frozen=True)
class BenchConfig:
    """Full configuration of one bench experiment."""

    source_index: LGIndex = LGIndex(0, 0)
    cgh1: HologramSpec | None = None
    cgh2: HologramSpec = HologramSpec(charge=1, order=-1, phase_depth=1.0)
    relay: RelayConfig = RelayConfig()
    plate: PlateModel | None = None
    scan: ScanConfig | None = None
    detector: DetectorConfig = DetectorConfig()
    wavelength: float = DEFAULT_WAVELENGTH
    plate_waist: float = DEFAULT_PLATE_WAIST
    source_waist: float | None = None
    fiber_waist: float | None = None
    n_shots: int = 200
    project_source_p0: bool = False
    grid: BenchGridConfig = BenchGridConfig()

    def __post_init__(self):
        if self.n_shots < 1:
            raise ConfigError("n_shots must be >= 1")
        if self.plate_waist <= 0:
            raise ConfigError("plate waist must be positive")

    @property
    def hologram_waist(self) -> float:
        """Beam waist at the hologram planes implied by the relay."""
        if self.source_waist is not None:
            return self.source_waist
        return self.wavelength * self.relay.focal_length / (np.pi * self.plate_waist)

    @property
    def analyzer_waist(self) -> float:
        return self.fiber_waist if self.fiber_waist is not None else self.hologram_waist

    def scan_or_default(self) -> ScanConfig:
        if self.scan is not None:
            return self.scan
        w = self.analyzer_waist
        return ScanConfig(start=-3.0 * w, stop=3.0 * w, points=201)

    def hologram_grid(self) -> Grid:
        n = self.grid.n
        window_plate = self.grid.plate_window_waists * self.plate_waist
        pitch = self.wavelength * self.relay.focal_length / window_plate
        return Grid(nx=n, ny=n, dx=pitch, dy=pitch, wavelength=self.wavelength)


@dataclass(frozen=True)
class ScanResult:
    """Counts over a CGH2 displacement scan with derived observables."""

    displacements: np.ndarray
    counts: np.ndarray
    visibility: float
    null_position: float | None
    max_position: float
    meta: dict = dataclass_field(default_factory=dict)


@dataclass(frozen=True)
class SuperpositionWeights:
    """Fundamental/vortex amplitude split of a displaced-fork preparation."""

    a: float
    b: float
    residual_fraction: float


NULL_THRESHOLD = 1e-2  # min/max ratio below which a null is localized


def visibility(counts) -> float:
    """Interference contrast ``(max - min) / (max + min)`` of a count list."""
    arr = np.asarray(list(counts), dtype=float)
    if arr.size == 0:
        raise ConfigError("visibility of an empty count list is undefined")
    if np.any(arr < 0):
        raise ConfigError("counts must be non-negative")
    hi, lo = float(arr.max()), float(arr.min())
    if hi <= 0:
        raise ZeroPowerError("visibility undefined for all-zero counts")
    return (hi - lo) / (hi + lo)


def prepare_superposition(
    displacement: float,
    waist: float,
    charge: int = 1,
    order: int = 1,
    wavelength: float = DEFAULT_WAVELENGTH,
    grid: Grid | None = None,
) -> SuperpositionWeights:
    """Weights of the fundamental/vortex superposition from a displaced fork.

    Diffracting a Gaussian off order ``m`` of a fork displaced by ``d``
    prepares ``(a |0> + b |l_shift>) / sqrt(a^2 + b^2)`` plus residual
    higher channels.  Returns the real non-negative weights normalized to
    ``a^2 + b^2 = 1`` and the power fraction outside the two channels.
    ``a`` grows monotonically with ``d``: a centered fork gives (0, 1),
    a far-displaced fork leaves the input mode unchanged, (1, 0).
    """
    if displacement < 0:
        raise ConfigError("fork displacement must be >= 0")
    if grid is None:
        grid = Grid.for_waist(waist, wavelength)
    source = lg_mode(LGIndex(0, 0), waist, grid)
    spec = HologramSpec(
        charge=charge, order=order, phase_depth=1.0, displacement=(displacement, 0.0)
    )
    diffracted = apply_hologram_order(source, spec)
    # Dense radial sampling: |c_l(r)|^2 has a cusp at the fork radius and
    # the trapezoid rule needs fine nodes there for 1e-6-level weights.
    dec = polar_decompose(
        diffracted, n_azimuthal=1024, n_radial=4096, interp_order=5
    )
    powers = dec.channel_powers()
    total = powers.sum()
    l_shift = spec.delta_l
    p0 = float(powers[np.where(dec.harmonics == 0)[0][0]])
    p1 = float(powers[np.where(dec.harmonics == l_shift)[0][0]]) if l_shift else 0.0
    norm = p0 + p1
    if norm <= 0:
        raise ZeroPowerError("no power in the two target channels")
    return SuperpositionWeights(
        a=float(np.sqrt(p0 / norm)),
        b=float(np.sqrt(p1 / norm)),
        residual_fraction=float(max(0.0, 1.0 - norm / total)),
    )


# ---------------------------------------------------------------------------
# Pipeline internals
# ---------------------------------------------------------------------------


def _project_p0(f: ComplexField, waist: float, l_window=8) -> ComplexField:
    """Project each azimuthal channel onto its p = 0 mode at ``waist``."""
    terms = []
    for l in range(-l_window, l_window + 1):
        basis = lg_mode(LGIndex(0, l), waist, f.grid)
        terms.append((inner_product(basis, f), basis))
    return scale_and_add(terms)


def _prepared_field(config: BenchConfig) -> ComplexField:
    grid = config.hologram_grid()
    field = lg_mode(config.source_index, config.hologram_waist, grid)
    if config.cgh1 is not None:
        field = apply_hologram_order(field, config.cgh1)
    if config.project_source_p0:
        field = _project_p0(field, config.hologram_waist)
    return field


@dataclass(frozen=True)
class _Cgh2Plane:
    """Per-channel fields arriving at the CGH2 plane.

    ``entries`` maps a channel key to its field: winding numbers for
    dephasing channels, ``None`` for deterministic content (the whole
    field in coherent operation, the sub-cutoff residual otherwise).
    """

    entries: dict
    grid: Grid
    plate_app: PlateApplication | None
    plate_power_in: float | None = None
    plate_power_out: float | None = None


def _to_cgh2_plane(config: BenchConfig) -> _Cgh2Plane:
    f = config.relay.focal_length
    prepared = _prepared_field(config)
    at_plate = fourier_relay_2f(prepared, f)
    if config.relay.plate_defocus:
        at_plate = _angular_spectrum(at_plate, config.relay.plate_defocus)

    plate_app = None
    power_in = power_out = None
    if config.plate is None:
        outputs = {None: at_plate}
    else:
        power_in = power(at_plate)
        plate_app = decompose_plate(at_plate, config.plate)
        if config.plate.coherent:
            out_field = plate_app.output_field()
            power_out = power(out_field)
            outputs = {None: out_field}
        else:
            outputs = dict(plate_app.channels)
            outputs[None] = plate_app.residual
            # Channels are azimuthally orthogonal, so total output power is
            # phase-independent and additive.
            power_out = sum(power(v) for v in outputs.values())

    entries = {}
    for key, field_out in outputs.items():
        if config.relay.plate_defocus:
            field_out = _angular_spectrum(field_out, -config.relay.plate_defocus)
        entries[key] = fourier_relay_2f(field_out, f)
    grid = next(iter(entries.values())).grid
    return _Cgh2Plane(
        entries=entries,
        grid=grid,
        plate_app=plate_app,
        plate_power_in=power_in,
        plate_power_out=power_out,
    )


class _ScanEvaluator:
    """Evaluates analyzer overlaps on a cropped window around the fiber.

    The fiber mode confines the overlap integrand, so only a central crop
    of the CGH2-plane grid contributes; this keeps per-displacement work
    small even for many dephasing channels.
    """

    def __init__(self, config: BenchConfig, plane: _Cgh2Plane):
        self.config = config
        self.plane = plane
        grid = plane.grid
        analyzer = fiber_mode(config.analyzer_waist, grid)
        half = config.grid.crop_waists * config.analyzer_waist
        x, y = grid.axes()
        ix = np.where(np.abs(x) <= half)[0]
        iy = np.where(np.abs(y) <= half)[0]
        if ix.size < 2 or iy.size < 2:
            ix = np.arange(grid.nx)
            iy = np.arange(grid.ny)
        self._sl = np.ix_(iy, ix)
        X, Y = grid.meshgrid()
        self.X = X[self._sl]
        self.Y = Y[self._sl]
        area = grid.dx * grid.dy
        spec = config.cgh2
        # conj(fiber) * channel * (order amplitude) * dA, ready to contract
        # with the displaced analyzer phase.
        self.kernels = {
            key: np.conj(analyzer.values[self._sl])
            * field_out.values[self._sl]
            * spec.order_amplitude
            * area
            for key, field_out in plane.entries.items()
        }
        self.delta_l = spec.delta_l
        self.y_offset = spec.displacement[1]

    def amplitudes(self, displacement: float) -> dict:
        """Map channel key -> complex fiber amplitude at one CGH2 position."""
        if self.delta_l == 0:
            return {key: kern.sum() for key, kern in self.kernels.items()}
        rx = self.X - displacement
        ry = self.Y - self.y_offset
        phase = np.exp(1j * self.delta_l * np.arctan2(ry, rx))
        # Same dark-core convention as apply_hologram_order.
        np.copyto(phase, 0.0, where=(rx == 0.0) & (ry == 0.0))
        return {key: (kern * phase).sum() for key, kern in self.kernels.items()}


def _resolve_seed(config: BenchConfig, seed):
    if seed is not None:
        return seed
    return config.detector.seed


def _shot_seed_sequences(seed):
    ss = np.random.SeedSequence(seed)
    plate_ss, noise_ss = ss.spawn(2)
    return plate_ss, noise_ss


def _cell_seed(base_seed: int, point_index: int, shot_index: int) -> int:
    # Stable per-(displacement, shot) entropy; independent of evaluation order.
    return int(
        np.random.SeedSequence([base_seed, point_index, shot_index]).generate_state(1)[0]
    )


def _counts_from_amplitudes(config, amplitudes, shot_seed):
    dephasing = config.plate is not None and not config.plate.coherent
    if dephasing:
        if shot_seed is None:
            raise MissingSeedError("dephasing mode requires a seed")
        plate_ss, noise_ss = _shot_seed_sequences(shot_seed)
        ls = [key for key in amplitudes if key is not None]
        phases = dephasing_phases(config.plate, plate_ss, ls)
        total = sum(
            amp * np.exp(1j * phases[key]) if key is not None else amp
            for key, amp in amplitudes.items()
        )
    else:
        noise_ss = None
        if shot_seed is not None and config.detector.poisson_noise:
            _, noise_ss = _shot_seed_sequences(shot_seed)
        total = sum(amplitudes.values())
    mean = config.detector.counts_scale * abs(total) ** 2
    if config.detector.poisson_noise:
        if noise_ss is None:
            raise MissingSeedError("poisson noise requires a seed")
        return float(np.random.default_rng(noise_ss).poisson(mean))
    return float(mean)


def run_shot(config: BenchConfig, cgh2_displacement: float, seed=None) -> float:
    """Counts for a single CGH2 position, full field pipeline.

    ``seed`` feeds both the plate dephasing phases and the optional
    Poisson draw; it defaults to the detector seed.  Deterministic when
    noise is off and the plate (if any) is coherent.
    """
    seed = _resolve_seed(config, seed)
    plane = _to_cgh2_plane(config)
    spec = replace(
        config.cgh2, displacement=(cgh2_displacement, config.cgh2.displacement[1])
    )
    analyzer = fiber_mode(config.analyzer_waist, plane.grid)

    dephasing = config.plate is not None and not config.plate.coherent
    noise_ss = None
    if dephasing:
        if seed is None:
            raise MissingSeedError("dephasing mode requires a seed")
        plate_ss, noise_ss = _shot_seed_sequences(seed)
        ls = [key for key in plane.entries if key is not None]
        phases = dephasing_phases(config.plate, plate_ss, ls)
        terms = [
            (np.exp(1j * phases[key]) if key is not None else 1.0, field_out)
            for key, field_out in plane.entries.items()
        ]
        arrived = scale_and_add(terms)
    else:
        if seed is not None and config.detector.poisson_noise:
            _, noise_ss = _shot_seed_sequences(seed)
        arrived = next(iter(plane.entries.values()))

    final = apply_hologram_order(arrived, spec)
    mean = config.detector.counts_scale * abs(inner_product(analyzer, final)) ** 2
    if config.detector.poisson_noise:
        if noise_ss is None:
            raise MissingSeedError("poisson noise requires a seed")
        return float(np.random.default_rng(noise_ss).poisson(mean))
    return float(mean)


def channel_overlap_table(config: BenchConfig, displacements) -> dict:
    """Tabulated per-channel fiber amplitudes over analyzer positions.

    Runs the deterministic model once per channel (no random phases) and
    returns ``key -> complex array`` over ``displacements``, where keys
    are plate channel winding numbers plus ``None`` for deterministic
    content.  The coherent counts are ``scale * |sum_key table[key]|^2``;
    the fully dephased expectation replaces the coherent sum by
    ``sum_l |table[l]|^2`` (cross terms average to zero), which is the
    analytic reference Monte Carlo scans are checked against.
    """
    plane = _to_cgh2_plane(config)
    evaluator = _ScanEvaluator(config, plane)
    table = {key: [] for key in plane.entries}
    for x in displacements:
        amps = evaluator.amplitudes(float(x))
        for key, value in amps.items():
            table[key].append(value)
    return {key: np.asarray(vals) for key, vals in table.items()}


def _interp_extremum(x, c, k):
    """Vertex of the parabola through three samples around index ``k``."""
    if k == 0 or k == len(x) - 1:
        return float(x[k])
    x0, x1, x2 = x[k - 1], x[k], x[k + 1]
    c0, c1, c2 = c[k - 1], c[k], c[k + 1]
    denom = (c0 - 2.0 * c1 + c2)
    if denom == 0:
        return float(x1)
    step = 0.5 * (c0 - c2) / denom
    return float(x1 + step * (x1 - x0))


def run_scan(config: BenchConfig, n_threads: int = 1) -> ScanResult:
    """Scan CGH2 across the configured displacement grid.

    In dephasing mode each displacement averages ``config.n_shots``
    independently seeded shots.  The heavy plate decomposition and relay
    run once; per-displacement work reduces to analyzer overlaps, so the
    result agrees with calling :func:`run_shot` at each grid point (to
    rounding) while being orders of magnitude faster.
    """
    scan = config.scan_or_default()
    displacements = scan.displacements()
    plane = _to_cgh2_plane(config)
    evaluator = _ScanEvaluator(config, plane)
    dephasing = config.plate is not None and not config.plate.coherent
    needs_seed = dephasing or config.detector.poisson_noise
    base_seed = config.detector.seed
    if needs_seed and base_seed is None:
        raise MissingSeedError("scan requires detector.seed for stochastic modes")

    def point_counts(i: int) -> float:
        amps = evaluator.amplitudes(float(displacements[i]))
        if not needs_seed:
            return _counts_from_amplitudes(config, amps, None)
        shots = config.n_shots if dephasing else 1
        acc = 0.0
        for j in range(shots):
            acc += _counts_from_amplitudes(config, amps, _cell_seed(base_seed, i, j))
        return acc / shots

    indices = range(len(displacements))
    if n_threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            counts = np.array(list(pool.map(point_counts, indices)))
    else:
        counts = np.array([point_counts(i) for i in indices])

    vis = visibility(counts)
    k_min = int(np.argmin(counts))
    k_max = int(np.argmax(counts))
    null_position = None
    if counts[k_min] < NULL_THRESHOLD * counts[k_max]:
        null_position = _interp_extremum(displacements, counts, k_min)
    meta = {
        "n_shots": config.n_shots if dephasing else 1,
        "analyzer_waist": config.analyzer_waist,
        "hologram_waist": config.hologram_waist,
    }
    if plane.plate_app is not None:
        app = plane.plate_app
        meta["plate_input_channel_powers"] = dict(app.input_channel_powers)
        meta["plate_output_channel_powers"] = dict(app.output_channel_powers)
        if plane.plate_power_in:
            meta["plate_power_ratio"] = plane.plate_power_out / plane.plate_power_in
    return ScanResult(
        displacements=displacements,
        counts=counts,
        visibility=vis,
        null_position=null_position,
        max_position=float(displacements[k_max]),
        meta=meta,
    )

"""Command-line front end.

    oam-bench <scan|spectrum|calibrate|modes> [--config PATH] [--out DIR]
              [--preset NAME] [--seed N] [--no-plots] [--threads N]

Configs are flat UTF-8 ``key = value`` lines with dotted section prefixes
(``bench.source.l = 1``); ``#`` starts a comment.  A ``--preset`` provides
the base map and ``--config`` overlays it.  ``OAM_BENCH_THREADS`` caps
scan parallelism.  CSV floats are printed with 17 significant digits so a
re-parse reproduces the arrays exactly.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 domain-range error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import plate as plate_mod
from .errors import ConfigError, OamBenchError
from .field import Grid
from .modes import LGIndex, fiber_mode, lg_mode, oam_spectrum
from .optics import HologramSpec, calibrate_phase_depth
from .presets import preset as load_preset

FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_path: str | None
    output_dir: str
    emit_plots: bool = True
    emit_csv: bool = True
    seed: int | None = None
    preset: str | None = None
    threads: int = 1


# ---------------------------------------------------------------------------
# Flat key = value config handling
# ---------------------------------------------------------------------------


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into a flat string map."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_config(manifest: RunManifest) -> dict:
    cfg = {}
    if manifest.preset:
        cfg.update(load_preset(manifest.preset))
    if manifest.config_path:
        path = Path(manifest.config_path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        cfg.update(parse_config_text(path.read_text(encoding="utf-8")))
    if manifest.seed is not None:
        cfg["seed"] = str(manifest.seed)
    if not cfg:
        raise ConfigError("no configuration: pass --preset and/or --config")
    return cfg


class _Conf:
    """Typed accessors over the flat map; errors name the offending key."""

    def __init__(self, raw: dict):
        self.raw = dict(raw)
        self.used = set()

    def has(self, key):
        return key in self.raw

    def _get(self, key, default):
        self.used.add(key)
        if key in self.raw:
            return self.raw[key]
        return default

    def str(self, key, default=None):
        val = self._get(key, default)
        if val is None:
            raise ConfigError(f"missing required key {key}")
        return str(val)

    def float(self, key, default=None):
        val = self._get(key, default)
        if val is None:
            raise ConfigError(f"missing required key {key}")
        try:
            return float(val)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key}: expected a number, got {val!r}") from None

    def int(self, key, default=None):
        val = self._get(key, default)
        if val is None:
            raise ConfigError(f"missing required key {key}")
        try:
            return int(str(val), 0)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key}: expected an integer, got {val!r}") from None

    def bool(self, key, default=None):
        val = self._get(key, default)
        if isinstance(val, bool):
            return val
        if val is None:
            raise ConfigError(f"missing required key {key}")
        lowered = str(val).strip().lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"key {key}: expected a boolean, got {val!r}")


def _hologram_from_conf(conf: _Conf, prefix: str, waist: float) -> HologramSpec:
    if conf.has(f"{prefix}.phase_depth"):
        depth = conf.float(f"{prefix}.phase_depth")
    else:
        depth = calibrate_phase_depth(conf.float(f"{prefix}.efficiency", 0.30))
    if conf.has(f"{prefix}.displacement"):
        disp = conf.float(f"{prefix}.displacement")
    else:
        disp = conf.float(f"{prefix}.displacement_waists", 0.0) * waist
    return HologramSpec(
        charge=conf.int(f"{prefix}.charge"),
        order=conf.int(f"{prefix}.order"),
        phase_depth=depth,
        displacement=(disp, conf.float(f"{prefix}.displacement_y", 0.0)),
    )


def _plate_from_conf(conf: _Conf) -> plate_mod.PlateModel | None:
    if not conf.bool("bench.plate.enabled", False):
        return None
    transmission = {}
    for key in conf.raw:
        if key.startswith("bench.plate.t."):
            suffix = key[len("bench.plate.t.") :]
            try:
                l = int(suffix)
            except ValueError:
                raise ConfigError(f"key {key}: channel suffix must be an integer") from None
            transmission[l] = conf.float(key)
    if not transmission:
        transmission = dict(plate_mod.DEFAULT_CHANNEL_TRANSMISSION)
    default_t = conf.float("bench.plate.default_transmission", -1.0)
    return plate_mod.PlateModel(
        channel_transmission=transmission,
        default_transmission=None if default_t < 0 else default_t,
        coherent=conf.bool("bench.plate.coherent", True),
        aperture_half_width=conf.float("bench.plate.aperture_half_width", 15e-6),
        aperture_shape=conf.str("bench.plate.aperture_shape", "square"),
        calibrated=conf.bool("bench.plate.calibrated", True),
        dephasing_kappa=conf.float("bench.plate.dephasing_kappa", 0.0),
    )


def bench_config_from_map(raw: dict) -> bench_mod.BenchConfig:
    """Build a :class:`BenchConfig` from a flat config map."""
    conf = _Conf(raw)
    wavelength = conf.float("bench.wavelength", bench_mod.DEFAULT_WAVELENGTH)
    plate_waist = conf.float("bench.plate_waist", bench_mod.DEFAULT_PLATE_WAIST)
    relay = bench_mod.RelayConfig(
        focal_length=conf.float("bench.relay.focal_length", bench_mod.DEFAULT_FOCAL_LENGTH),
        plate_defocus=conf.float("bench.relay.plate_defocus", 0.0),
    )
    source_waist = (
        conf.float("bench.source.waist") if conf.has("bench.source.waist") else None
    )
    hologram_waist = (
        source_waist
        if source_waist is not None
        else wavelength * relay.focal_length / (np.pi * plate_waist)
    )
    fiber_waist = (
        conf.float("bench.fiber_waist") if conf.has("bench.fiber_waist") else None
    )
    analyzer_waist = fiber_waist if fiber_waist is not None else hologram_waist

    cgh1 = None
    if conf.bool("bench.cgh1.enabled", True) and conf.has("bench.cgh1.charge"):
        cgh1 = _hologram_from_conf(conf, "bench.cgh1", hologram_waist)
    cgh2 = _hologram_from_conf(conf, "bench.cgh2", analyzer_waist)

    if conf.has("bench.scan.start"):
        scan = bench_mod.ScanConfig(
            start=conf.float("bench.scan.start"),
            stop=conf.float("bench.scan.stop"),
            points=conf.int("bench.scan.points", 201),
        )
    else:
        scan = bench_mod.ScanConfig(
            start=conf.float("bench.scan.start_waists", -3.0) * analyzer_waist,
            stop=conf.float("bench.scan.stop_waists", 3.0) * analyzer_waist,
            points=conf.int("bench.scan.points", 201),
        )

    detector = bench_mod.DetectorConfig(
        counts_scale=conf.float("bench.detector.counts_scale", 1.0),
        poisson_noise=conf.bool("bench.detector.poisson_noise", False),
        seed=conf.int("seed", 0),
    )
    grid = bench_mod.BenchGridConfig(
        n=conf.int("bench.grid.n", 512),
        plate_window_waists=conf.float("bench.grid.plate_window_waists", 32.0),
        crop_waists=conf.float("bench.grid.crop_waists", 8.0),
    )
    return bench_mod.BenchConfig(
        source_index=LGIndex(conf.int("bench.source.p", 0), conf.int("bench.source.l", 0)),
        cgh1=cgh1,
        cgh2=cgh2,
        relay=relay,
        plate=_plate_from_conf(conf),
        scan=scan,
        detector=detector,
        wavelength=wavelength,
        plate_waist=plate_waist,
        source_waist=source_waist,
        fiber_waist=fiber_waist,
        n_shots=conf.int("bench.n_shots", 200),
        project_source_p0=conf.bool("bench.project_source_p0", False),
        grid=grid,
    )


def spectrum_model_from_map(raw: dict):
    conf = _Conf(raw)
    table_ref = conf.str("spectrum.permittivity_table", "builtin:gold")
    if table_ref.startswith("builtin:"):
        if table_ref != "builtin:gold":
            raise ConfigError(f"unknown builtin permittivity table {table_ref!r}")
        table = plate_mod.gold_drude_table()
    else:
        path = Path(table_ref)
        if not path.is_file():
            raise ConfigError(f"permittivity table not found: {path}")
        table = plate_mod.PermittivityTable.from_text(path)
    model = plate_mod.SpectrumModel(
        period=conf.float("spectrum.period", 600e-9),
        hole_radius=conf.float("spectrum.hole_radius", 100e-9),
        metal_permittivity=table,
        eps_glass=conf.float("spectrum.eps_glass", 2.1025),
        film_thickness=conf.float("spectrum.film_thickness", 135e-9),
    )
    orders = []
    for pair in conf.str("spectrum.orders", "1,0;1,1").split(";"):
        i, j = pair.split(",")
        orders.append((int(i), int(j)))
    curve = plate_mod.SpectrumCurveConfig(
        orders=tuple(orders),
        peak_height=conf.float("spectrum.peak_height", 0.03),
        peak_width=conf.float("spectrum.peak_width", 15e-9),
        calibrated=conf.bool("spectrum.calibrated", False),
        operating_wavelength=conf.float("spectrum.operating_wavelength", 670e-9),
        operating_transmittance=conf.float("spectrum.operating_transmittance", 0.025),
    )
    band = (conf.float("spectrum.band_start", 450e-9), conf.float("spectrum.band_stop", 1000e-9))
    samples = conf.int("spectrum.samples", 1101)
    return model, curve, band, samples


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]):
    rows = len(columns[0])
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(FLOAT_FMT % col[i] for col in columns) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Re-parse a CSV emitted by this tool (exact float round-trip)."""
    with Path(path).open("r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.array(
            [[float(tok) for tok in line.strip().split(",")] for line in fh if line.strip()]
        )
    return header, data


def _line_plot(path: Path, x, ys, labels, xlabel, ylabel, vline=None):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for y, label in zip(ys, labels):
        ax.plot(x, y, label=label)
    if vline is not None:
        ax.axvline(vline, linestyle="--", color="gray")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(ys) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_scan(manifest: RunManifest) -> list[Path]:
    raw = load_config(manifest)
    config = bench_config_from_map(raw)
    out_dir = Path(manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    result = bench_mod.run_scan(config, n_threads=manifest.threads)
    waist = config.analyzer_waist
    counts = result.counts
    norm = counts / counts.max() if counts.max() > 0 else counts
    written = []

    csv_path = out_dir / "scan.csv"
    _write_csv(
        csv_path,
        ["displacement_m", "displacement_waists", "counts", "counts_normalized"],
        [result.displacements, result.displacements / waist, counts, norm],
    )
    written.append(csv_path)

    lines = [
        f"visibility = {result.visibility!r}",
        f"max_position_m = {result.max_position!r}",
        f"null_position_m = {result.null_position!r}",
        f"analyzer_waist_m = {waist!r}",
    ]
    if "plate_power_ratio" in result.meta:
        lines.append(f"plate_power_ratio = {result.meta['plate_power_ratio']!r}")
    for key in ("plate_input_channel_powers", "plate_output_channel_powers"):
        if key in result.meta:
            for l in sorted(result.meta[key]):
                lines.append(f"{key}.{l} = {result.meta[key][l]!r}")
    conf = _Conf(raw)
    if conf.has("report.reference_visibility"):
        ref = conf.float("report.reference_visibility")
        lines.append(f"reference_visibility = {ref!r}")
        lines.append(f"visibility_minus_reference = {result.visibility - ref!r}")
    summary = out_dir / "summary.txt"
    summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(summary)

    if manifest.emit_plots:
        svg = out_dir / "scan.svg"
        _line_plot(
            svg,
            result.displacements / waist,
            [counts],
            ["counts"],
            "CGH2 displacement (waists)",
            "counts",
        )
        written.append(svg)
    return written


def cmd_spectrum(manifest: RunManifest) -> list[Path]:
    raw = load_config(manifest)
    model, curve, band, samples = spectrum_model_from_map(raw)
    out_dir = Path(manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    wavelengths, total, baseline, resonances = plate_mod.transmittance_spectrum(
        model, band=band, samples=samples, curve=curve
    )
    written = []
    csv_path = out_dir / "spectrum.csv"
    _write_csv(
        csv_path,
        ["wavelength_nm", "transmittance", "classical_baseline"],
        [wavelengths * 1e9, total, baseline],
    )
    written.append(csv_path)

    lines = []
    for interface in sorted(resonances):
        peaks = resonances[interface]
        for (order, lam) in zip(curve.orders, sorted(peaks, reverse=True)):
            lines.append(f"{interface} ({order[0]},{order[1]}) {FLOAT_FMT % (lam * 1e9)} nm")
    res_path = out_dir / "resonances.txt"
    res_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(res_path)

    if manifest.emit_plots:
        svg = out_dir / "spectrum.svg"
        _line_plot(
            svg,
            wavelengths * 1e9,
            [total, baseline],
            ["transmittance", "classical baseline"],
            "wavelength (nm)",
            "transmittance",
            vline=curve.operating_wavelength * 1e9,
        )
        written.append(svg)
    return written


def cmd_calibrate(manifest: RunManifest) -> list[Path]:
    raw = load_config(manifest)
    conf = _Conf(raw)
    target = conf.float("calibrate.target_efficiency", 0.30)
    out_dir = Path(manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    delta = calibrate_phase_depth(target)
    from scipy.special import j1

    achieved = float(j1(delta) ** 2)
    path = out_dir / "calibration.txt"
    path.write_text(
        "\n".join(
            [
                f"target_efficiency = {target!r}",
                f"phase_depth_rad = {delta!r}",
                f"first_order_efficiency = {achieved!r}",
                f"residual = {achieved - target!r}",
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    return [path]


def cmd_modes(manifest: RunManifest) -> list[Path]:
    raw = load_config(manifest)
    conf = _Conf(raw)
    waist = conf.float("modes.waist", 12.5e-6)
    wavelength = conf.float("modes.wavelength", bench_mod.DEFAULT_WAVELENGTH)
    n = conf.int("modes.grid_n", 256)
    pairs = []
    for pair in conf.str("modes.list", "0,0;0,1").split(";"):
        p, l = pair.split(",")
        try:
            pairs.append(LGIndex(int(p), int(l)))
        except ValueError as exc:
            raise ConfigError(f"modes.list: bad entry {pair!r}: {exc}") from None
    out_dir = Path(manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = Grid.for_waist(waist, wavelength, n=n)
    X, Y = grid.meshgrid()
    written = []
    spectrum_lines = []
    for index in pairs:
        mode = lg_mode(index, waist, grid)
        tag = f"mode_p{index.p}_l{index.l}"
        field_csv = out_dir / f"{tag}_field.csv"
        _write_csv(
            field_csv,
            ["x_m", "y_m", "re", "im"],
            [X.ravel(), Y.ravel(), mode.values.real.ravel(), mode.values.imag.ravel()],
        )
        written.append(field_csv)
        for kind, data in (
            ("intensity", np.abs(mode.values) ** 2),
            ("phase", np.angle(mode.values)),
        ):
            path = out_dir / f"{tag}_{kind}.csv"
            np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",")
            written.append(path)
            if manifest.emit_plots:
                import matplotlib

                matplotlib.use("Agg")
                import matplotlib.pyplot as plt

                png = out_dir / f"{tag}_{kind}.png"
                plt.imsave(png, data, cmap="inferno" if kind == "intensity" else "twilight")
                written.append(png)
        spec = oam_spectrum(mode, l_range=(-4, 4))
        row = " ".join(f"{l}:{spec.fraction(l):.6f}" for l in sorted(spec.powers))
        spectrum_lines.append(f"{tag} power={spec.total_power!r} fractions {row}")
    spec_path = out_dir / "oam_spectra.txt"
    spec_path.write_text("\n".join(spectrum_lines) + "\n", encoding="utf-8")
    written.append(spec_path)
    return written


COMMANDS = {
    "scan": cmd_scan,
    "spectrum": cmd_spectrum,
    "calibrate": cmd_calibrate,
    "modes": cmd_modes,
}


def build_manifest(argv) -> RunManifest:
    parser = argparse.ArgumentParser(
        prog="oam-bench",
        description="Scalar-wave optical bench simulator for OAM transmission experiments",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--preset", help="named preset providing base config")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--no-plots", action="store_true", help="skip SVG/PNG emission")
    parser.add_argument("--threads", type=int, default=1, help="scan worker threads")
    args = parser.parse_args(argv)

    threads = max(1, args.threads)
    env_cap = os.environ.get("OAM_BENCH_THREADS")
    if env_cap:
        try:
            threads = min(threads, max(1, int(env_cap)))
        except ValueError:
            raise ConfigError(f"OAM_BENCH_THREADS={env_cap!r} is not an integer") from None
    return RunManifest(
        command=args.command,
        config_path=args.config,
        output_dir=args.out,
        emit_plots=not args.no_plots,
        seed=args.seed,
        preset=args.preset,
        threads=threads,
    )


def main(argv=None) -> int:
    try:
        manifest = build_manifest(sys.argv[1:] if argv is None else argv)
        COMMANDS[manifest.command](manifest)
    except OamBenchError as exc:
        print(f"oam-bench: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

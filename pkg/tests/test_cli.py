import numpy as np
import pytest

import oam_bench as ob
from oam_bench.cli import (
    RunManifest,
    bench_config_from_map,
    main,
    parse_config_text,
    read_csv,
)
from oam_bench.presets import PRESETS, preset

FAST_SCAN_OVERRIDES = """
bench.scan.points = 11
bench.grid.n = 256
bench.grid.plate_window_waists = 24
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def run_cli(args):
    return main(args)


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def test_parse_config_text_basics():
    cfg = parse_config_text("a.b = 1\n# comment\n  c = hello  # trailing\n\n")
    assert cfg == {"a.b": "1", "c": "hello"}


def test_parse_config_rejects_bad_lines():
    with pytest.raises(ob.ConfigError):
        parse_config_text("not a pair\n")
    with pytest.raises(ob.ConfigError):
        parse_config_text("= value\n")


def test_bench_config_from_preset_map():
    config = bench_config_from_map(preset("fig3b"))
    assert config.cgh1.charge == 1
    assert config.cgh2.order == -1
    assert config.scan.points == 201
    assert config.plate is None
    plated = bench_config_from_map(preset("fig4b"))
    assert plated.plate is not None
    assert plated.plate.channel_transmission[0] == 0.0227


def test_bad_key_names_offending_key():
    bad = dict(preset("fig3a"))
    bad["bench.scan.points"] = "lots"
    with pytest.raises(ob.ConfigError, match="bench.scan.points"):
        bench_config_from_map(bad)


def test_all_presets_load():
    for name in PRESETS:
        assert preset(name)
    with pytest.raises(ob.ConfigError):
        preset("fig9z")


# ---------------------------------------------------------------------------
# commands end to end
# ---------------------------------------------------------------------------


def test_cmd_calibrate(tmp_path):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, "calibrate.target_efficiency = 0.30\n")
    assert run_cli(["calibrate", "--config", cfg, "--out", str(out)]) == 0
    text = (out / "calibration.txt").read_text()
    values = dict(line.split(" = ") for line in text.strip().splitlines())
    assert abs(float(values["residual"])) < 1e-9
    assert float(values["first_order_efficiency"]) == pytest.approx(0.30, abs=1e-9)


def test_cmd_calibrate_unreachable_exit_code(tmp_path):
    cfg = write_config(tmp_path, "calibrate.target_efficiency = 0.5\n")
    assert run_cli(["calibrate", "--config", cfg, "--out", str(tmp_path / "o")]) == 4


def test_cmd_scan_outputs_and_roundtrip(tmp_path):
    out = tmp_path / "scan_out"
    cfg = write_config(tmp_path, FAST_SCAN_OVERRIDES)
    code = run_cli(
        ["scan", "--preset", "fig3b", "--config", cfg, "--out", str(out), "--no-plots"]
    )
    assert code == 0
    header, data = read_csv(out / "scan.csv")
    assert header == ["displacement_m", "displacement_waists", "counts", "counts_normalized"]
    assert data.shape == (11, 4)

    config = bench_config_from_map({**preset("fig3b"), **parse_config_text(FAST_SCAN_OVERRIDES)})
    result = ob.run_scan(config)
    np.testing.assert_array_equal(data[:, 0], result.displacements)
    np.testing.assert_array_equal(data[:, 2], result.counts)

    summary = (out / "summary.txt").read_text()
    assert "visibility = " in summary
    assert not (out / "scan.svg").exists()


def test_cmd_scan_plot_emission(tmp_path):
    out = tmp_path / "plots"
    cfg = write_config(tmp_path, FAST_SCAN_OVERRIDES)
    assert run_cli(["scan", "--preset", "fig3a", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "scan.svg").exists()


def test_cmd_scan_reference_comparison_in_summary(tmp_path):
    out = tmp_path / "ref"
    cfg = write_config(tmp_path, FAST_SCAN_OVERRIDES + "bench.scan.points = 61\n")
    assert run_cli(
        ["scan", "--preset", "fig5a", "--config", cfg, "--out", str(out), "--no-plots"]
    ) == 0
    summary = (out / "summary.txt").read_text()
    assert "reference_visibility = 0.96" in summary
    assert "visibility_minus_reference" in summary


def test_cmd_scan_rerun_byte_identical(tmp_path):
    cfg = write_config(
        tmp_path,
        FAST_SCAN_OVERRIDES + "bench.plate.enabled = true\nbench.plate.coherent = false\nbench.n_shots = 10\n",
    )
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run_cli(
            ["scan", "--preset", "fig5b_dephased", "--config", cfg, "--out", str(out),
             "--no-plots", "--seed", "99"]
        ) == 0
        outs.append((out / "scan.csv").read_bytes())
    assert outs[0] == outs[1]


def test_cmd_scan_thread_byte_identical(tmp_path, monkeypatch):
    cfg = write_config(
        tmp_path,
        FAST_SCAN_OVERRIDES + "bench.plate.enabled = true\nbench.plate.coherent = false\nbench.n_shots = 10\n",
    )
    blobs = []
    for threads, name in ((1, "t1"), (8, "t8")):
        monkeypatch.setenv("OAM_BENCH_THREADS", str(threads))
        out = tmp_path / name
        assert run_cli(
            ["scan", "--preset", "fig5b_dephased", "--config", cfg, "--out", str(out),
             "--no-plots", "--threads", str(threads)]
        ) == 0
        blobs.append((out / "scan.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_cmd_spectrum_outputs(tmp_path):
    out = tmp_path / "spec"
    assert run_cli(["spectrum", "--preset", "fig1", "--out", str(out), "--no-plots"]) == 0
    header, data = read_csv(out / "spectrum.csv")
    assert header == ["wavelength_nm", "transmittance", "classical_baseline"]
    k = np.argmin(np.abs(data[:, 0] - 670.0))
    assert data[k, 0] == pytest.approx(670.0, abs=1e-9)
    assert data[k, 1] == pytest.approx(0.025, rel=1e-6)
    resonances = (out / "resonances.txt").read_text().strip().splitlines()
    assert len(resonances) == 4
    model = ob.SpectrumModel()
    air = ob.sp_resonance_wavelengths(model, [(1, 0), (1, 1)], "air")
    for lam in air:
        assert any(f"{lam * 1e9:.6f}"[:8] in line for line in resonances), lam


def test_cmd_spectrum_zero_peaks_baseline(tmp_path):
    out = tmp_path / "base"
    cfg = write_config(tmp_path, "spectrum.peak_height = 0\nspectrum.calibrated = false\n")
    assert run_cli(
        ["spectrum", "--preset", "fig1", "--config", cfg, "--out", str(out), "--no-plots"]
    ) == 0
    _, data = read_csv(out / "spectrum.csv")
    np.testing.assert_array_equal(data[:, 1], data[:, 2])


def test_cmd_spectrum_band_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, "spectrum.band_start = 200e-9\n")
    code = run_cli(
        ["spectrum", "--preset", "fig1", "--config", cfg, "--out", str(tmp_path / "x"),
         "--no-plots"]
    )
    assert code == 2


def test_cmd_spectrum_no_convergence_exit_code(tmp_path):
    # A band that excludes every glass-side fixed point -> numeric failure.
    table = tmp_path / "metal.txt"
    lams = np.linspace(500, 600, 11)
    rows = "\n".join(
        f"{lam} {ob.DrudeMetal()(lam * 1e-9).real} {ob.DrudeMetal()(lam * 1e-9).imag}"
        for lam in lams
    )
    table.write_text(rows + "\n")
    cfg = write_config(
        tmp_path,
        f"spectrum.permittivity_table = {table}\n"
        "spectrum.band_start = 505e-9\nspectrum.band_stop = 595e-9\n"
        "spectrum.calibrated = false\n",
    )
    code = run_cli(
        ["spectrum", "--preset", "fig1", "--config", cfg, "--out", str(tmp_path / "y"),
         "--no-plots"]
    )
    assert code == 3


def test_cmd_modes_outputs(tmp_path):
    out = tmp_path / "modes"
    cfg = write_config(tmp_path, "modes.list = 0,0;0,1\nmodes.grid_n = 64\n")
    assert run_cli(["modes", "--config", cfg, "--out", str(out), "--no-plots"]) == 0
    header, data = read_csv(out / "mode_p0_l1_field.csv")
    assert header == ["x_m", "y_m", "re", "im"]
    assert data.shape == (64 * 64, 4)
    power = np.sum(data[:, 2] ** 2 + data[:, 3] ** 2)
    # dA from the first two x samples
    dx = abs(data[1, 0] - data[0, 0])
    assert power * dx * dx == pytest.approx(1.0, abs=1e-3)
    spectra = (out / "oam_spectra.txt").read_text()
    assert "mode_p0_l1" in spectra
    intensity = np.loadtxt(out / "mode_p0_l1_intensity.csv", delimiter=",")
    assert intensity.shape == (64, 64)
    assert intensity[32, 32] == 0.0


def test_cmd_modes_bad_mode_exit_code(tmp_path):
    cfg = write_config(tmp_path, "modes.list = 0,x\n")
    assert run_cli(["modes", "--config", cfg, "--out", str(tmp_path / "m")]) == 2


def test_missing_config_exit_code(tmp_path):
    assert run_cli(["scan", "--out", str(tmp_path / "none")]) == 2
    assert run_cli(
        ["scan", "--config", str(tmp_path / "missing.cfg"), "--out", str(tmp_path / "x")]
    ) == 2
    assert run_cli(["scan", "--preset", "nope", "--out", str(tmp_path / "y")]) == 2


def test_manifest_threads_env_cap(monkeypatch):
    from oam_bench.cli import build_manifest

    monkeypatch.setenv("OAM_BENCH_THREADS", "2")
    manifest = build_manifest(["scan", "--out", "o", "--preset", "fig3a", "--threads", "8"])
    assert manifest.threads == 2
    monkeypatch.delenv("OAM_BENCH_THREADS")
    manifest = build_manifest(["scan", "--out", "o", "--preset", "fig3a", "--threads", "4"])
    assert manifest.threads == 4


def test_csv_float_roundtrip_extremes(tmp_path):
    from oam_bench.cli import _write_csv

    values = np.array([1.0 / 3.0, 1e-300, 123456789.123456789, 0.1 + 0.2])
    path = tmp_path / "vals.csv"
    _write_csv(path, ["v"], [values])
    _, data = read_csv(path)
    np.testing.assert_array_equal(data[:, 0], values)

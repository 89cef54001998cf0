import shutil
import subprocess
import sys

import numpy as np
import pytest

from conftest import device
from kpospec import io
from kpospec.calibration import DriveLine, TransitionModel, synthetic_observations
from kpospec.cli import main
from kpospec.operators import mhz

SMALL = """
[device]
delta_mhz = -8.1
chi_mhz = 17.0
kappa_e_mhz = 0.27
kappa_i_mhz = 0.45
dim = 20

[drive]
beta_min_mhz = 0
beta_max_mhz = 1
beta_steps = 3
domega_di_mhz_per_ua = 8.27
attenuation_db = -57

[probe]
min_mhz = -15
max_mhz = 15
steps = 61

[output]
directory = {out}
"""


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL.format(out=tmp_path / "default_out"))
    return path


def _csv(path):
    return np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")


@pytest.mark.parametrize(
    "sub,files",
    [
        ("spectrum", ["spectrum.csv"]),
        ("levels", ["levels.csv"]),
        ("steady", ["populations.csv", "matrix_elements.csv"]),
        ("transitions", ["transitions.json"]),
        ("analytic", ["analytic.csv"]),
        ("fit", ["loss_comparison.csv"]),
    ],
)
def test_subcommands_write_outputs(small_cfg, tmp_path, sub, files):
    out = tmp_path / "o"
    assert main([sub, "--config", str(small_cfg), "--out", str(out)]) == 0
    for f in files:
        assert (out / f).stat().st_size > 0


def test_headers(small_cfg, tmp_path):
    out = tmp_path / "o"
    for sub in ("spectrum", "levels", "steady", "analytic", "fit"):
        main([sub, "--config", str(small_cfg), "--out", str(out)])
    expect = {
        "spectrum.csv": io.SPECTRUM_HEADER,
        "levels.csv": io.LEVELS_HEADER,
        "populations.csv": io.POPULATIONS_HEADER,
        "analytic.csv": io.ANALYTIC_HEADER,
        "loss_comparison.csv": io.COMPARISON_HEADER,
    }
    for name, header in expect.items():
        assert (out / name).read_text().splitlines()[0] == ",".join(header)
    assert io.SPECTRUM_HEADER == ("beta_mhz", "probe_detuning_mhz", "re_gamma", "im_gamma", "abs_gamma")


def test_default_output_directory(small_cfg, tmp_path):
    assert main(["levels", "--config", str(small_cfg)]) == 0
    assert (tmp_path / "default_out" / "levels.csv").exists()


def test_deterministic_bytes(small_cfg, tmp_path):
    for d in ("a", "b"):
        assert main(["spectrum", "--config", str(small_cfg), "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "spectrum.csv").read_bytes() == (tmp_path / "b" / "spectrum.csv").read_bytes()
    assert b"\r" not in (tmp_path / "a" / "spectrum.csv").read_bytes()


def test_levels_preset_zero_drive(tmp_path):
    assert main(["levels", "--config", "delta_plus", "--beta-mhz", "0", "--out", str(tmp_path)]) == 0
    rows = _csv(tmp_path / "levels.csv")
    energies = {int(r["label"]): float(r["energy_mhz"]) for r in rows}
    assert [energies[n] for n in range(4)] == pytest.approx([0.0, 8.20, -0.60, -26.40], abs=1e-9)


def test_dim_override(small_cfg, tmp_path):
    assert main(["steady", "--config", str(small_cfg), "--dim", "24", "--beta-mhz", "0.5", "--out", str(tmp_path)]) == 0
    pops = _csv(tmp_path / "populations.csv")
    assert len(pops) == 6
    assert pops["population"].sum() == pytest.approx(1.0, abs=1e-6)


def test_spectrum_preset_zero_has_no_gain(tmp_path):
    assert main(["spectrum", "--config", "delta_zero", "--out", str(tmp_path)]) == 0
    data = _csv(tmp_path / "spectrum.csv")
    assert data["abs_gamma"].max() <= 1 + 1e-6


def test_calibrate_from_observation_file(tmp_path):
    params = device(8.2)
    line = DriveLine(domega_di=mhz(8.27), attenuation_db=-58.0)
    obs = synthetic_observations(params, line, np.arange(-45.0, -27.0, 3.0), [(1, 0), (0, 1)], TransitionModel(params))
    obs_file = io.write_observations(tmp_path / "obs.csv", obs)
    out = tmp_path / "cal"
    assert main(["calibrate", "--config", "delta_plus", "--observations", str(obs_file), "--out", str(out)]) == 0
    first = (out / "calibration.txt").read_text().splitlines()[0]
    assert first.startswith("attenuation_db=")
    assert float(first.split("=")[1]) == pytest.approx(-58.0, abs=0.1)


def test_fit_measured_spectrum(small_cfg, tmp_path):
    from kpospec.fitting import lineshape

    probe = np.linspace(-3, 3, 121)
    g = lineshape(mhz(probe), mhz(0.4), mhz(0.27), mhz(0.45))
    f = tmp_path / "meas.csv"
    io.write_csv(f, ("probe_freq_mhz", "abs_gamma"), zip(probe, np.abs(g)))
    assert main(["fit", "--config", str(small_cfg), "--spectrum", str(f), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "fit.txt").read_text()
    assert "converged=1" in text
    assert float(text.splitlines()[1].split("=")[1]) == pytest.approx(0.27, rel=1e-4)


def test_errors_exit_nonzero(small_cfg, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("p_rt_dbm,m_label,n_label,freq_mhz\n-30,1,zero,8\n")
    assert main(["calibrate", "--config", str(small_cfg), "--observations", str(bad), "--out", str(tmp_path)]) == 1
    assert "bad.csv:2:" in capsys.readouterr().err
    assert main(["levels", "--config", str(tmp_path / "missing.cfg")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["nonsense", "--config", str(small_cfg)])
    assert exc.value.code != 0


@pytest.mark.skipif(shutil.which("kpo") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(
        ["kpo", "levels", "--config", "delta_minus", "--beta-mhz", "0.5", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "kpospec.cli", "bogus", "--config", "x"], capture_output=True, text=True)
    assert proc.returncode != 0

import json

import pytest

from squidqkd import cli
from squidqkd.config import default_config, load_config, parse_config
from squidqkd.device import junction_for_regime
from squidqkd.errors import ConfigError
from squidqkd.protocol import SchemeKind
from squidqkd.validation import Check

EFFECTIVE = "[device.effective]\nOmega = 10000\nnu = 100\nmu = 10000000\n"

TIME_STAMPED = EFFECTIVE + """
[source]
phi_0 = 4
v_0 = 4
n_trials = 2000

[channel]
eta = 0.8

[scheme]
kind = time-stamped

[run]
seed = 42
"""


# -- config ------------------------------------------------------------------------

def test_default_config():
    cfg = default_config()
    assert cfg.seed == 1 and cfg.eff.ratio == pytest.approx(100.0)
    assert cfg.scheme.kind is SchemeKind.ARBITRARY_TIME
    assert cfg.reconcile.n_slices == 1 and cfg.reconcile.postselect == 1.25


def test_parse_time_stamped():
    cfg = parse_config(TIME_STAMPED)
    assert cfg.scheme.kind is SchemeKind.TIME_STAMPED
    assert cfg.channel.eta == 0.8 and cfg.source.n_trials == 2000
    assert cfg.protocol_spec().seed == 42


def test_physical_device_section():
    p = junction_for_regime(1e4, 100.0)
    text = (f"[device.physical]\nC = {p.C!r}\nL = {p.L!r}\nE_J = {p.E_J!r}\nphi_x = {p.phi_x!r}\n"
            "[run]\nseed = 3\n")
    cfg = parse_config(text)
    assert cfg.physical == p
    assert cfg.eff.Omega == pytest.approx(1e4, rel=1e-12)


@pytest.mark.parametrize("text,match", [
    ("[run]\nseed = 1\n", "exactly one"),
    (EFFECTIVE + "[device.physical]\nC = 1\n[run]\nseed = 1\n", "exactly one"),
    (EFFECTIVE, "seed is mandatory"),
    (EFFECTIVE + "[run]\nseed = -1\n", "seed"),
    (EFFECTIVE + "[run]\nseed = 1\n[bogus]\nx = 1\n", "unknown section"),
    (EFFECTIVE + "[run]\nseed = 1\ncolour = red\n", "unknown key"),
    (EFFECTIVE + "[run]\nseed = one\n", "seed"),
    (EFFECTIVE + "[scheme]\nkind = sometimes\n[run]\nseed = 1\n", "scheme.kind"),
    ("[device.effective]\nOmega = 10\n[run]\nseed = 1\n", "missing"),
    ("[device.effective]\nOmega = 10\nnu = 1\nmu = 1e4\n[run]\nseed = 1\n", "device"),
    (EFFECTIVE + "[channel]\neta = 1.5\n[run]\nseed = 1\n", "eta"),
    (EFFECTIVE + "[reconcile]\nn_slices = 9\n[run]\nseed = 1\n", "n_slices"),
    (TIME_STAMPED.replace("phi_0 = 4", "phi_0 = 0.5"), "centres"),
    (TIME_STAMPED.replace("nu = 100", "nu = 101"), "mod 4"),
    ("not an ini file", "unreadable"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_digest_ignores_layout(tmp_path):
    a = parse_config(TIME_STAMPED)
    b = parse_config(TIME_STAMPED.replace("eta = 0.8", "eta   =   0.8\n\n"))
    c = parse_config(TIME_STAMPED.replace("seed = 42", "seed = 43"))
    assert a.digest == b.digest != c.digest
    path = tmp_path / "x.ini"
    path.write_text(TIME_STAMPED)
    assert load_config(path).digest == a.digest
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_overrides():
    cfg = parse_config(TIME_STAMPED).with_overrides(seed=7, n_trials=10, full_numeric=True)
    assert cfg.seed == 7 and cfg.source.n_trials == 10 and cfg.options.full_numeric


# -- CLI ----------------------------------------------------------------------------

def test_cli_figures(tmp_path, capsys):
    assert cli.main(["figures", "--id", "variance-evolution", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "variance-evolution.csv").read_text()
    assert text.startswith("# squidqkd") and "seed 1" in text.splitlines()[0]


def test_cli_all_figures(tmp_path):
    assert cli.main(["figures", "--out", str(tmp_path)]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"variance-evolution.csv", "cat-distribution.csv", "ensemble-noise-ratio5.csv",
            "ensemble-noise-ratio6.csv", "contour-even-grid.csv", "contour-odd-lines.csv"} <= names


def test_cli_sweep(tmp_path, capsys):
    assert cli.main(["sweep-eta", "--out", str(tmp_path), "--points", "50"]) == 0
    out = capsys.readouterr().out
    assert "0.500000" in out and "0.707107" in out
    assert (tmp_path / "sweep-eta-time-stamped.csv").exists()


def test_cli_contour(tmp_path):
    assert cli.main(["contour", "--parity", "odd", "--n", "41", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "contour-odd-grid.csv").exists()
    assert not (tmp_path / "contour-even-grid.csv").exists()


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(EFFECTIVE)
    assert cli.main(["figures", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "seed is mandatory" in capsys.readouterr().err


def test_cli_runtime_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "few.ini"
    cfg.write_text(TIME_STAMPED.replace("n_trials = 2000", "n_trials = 50"))
    assert cli.main(["run-protocol", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "TooFewSamples" in capsys.readouterr().err


def test_cli_validation_failure_exit_code(monkeypatch, capsys):
    import squidqkd.validation as v
    monkeypatch.setattr(v, "run_all", lambda seed, quick: [Check("probe", False, 1.0, 0.1)])
    assert cli.main(["validate", "--quick"]) == 3
    assert "[FAIL]" in capsys.readouterr().out


def test_cli_validate_quick(capsys):
    assert cli.main(["validate", "--quick"]) == 0
    out = capsys.readouterr().out
    assert "[FAIL]" not in out and "checks passed" in out


def test_cli_run_protocol(tmp_path, capsys):
    cfg = tmp_path / "ts.ini"
    cfg.write_text(TIME_STAMPED)
    runs = []
    for sub in ("a", "b"):
        assert cli.main(["run-protocol", "--config", str(cfg), "--out", str(tmp_path / sub)]) == 0
        runs.append(((tmp_path / sub / "trials.csv").read_bytes(),
                     (tmp_path / sub / "report.json").read_text()))
    assert runs[0] == runs[1]
    report = json.loads(runs[0][1])
    assert report["n_rounds"] == 2000
    # Time-stamped runs estimate the channel gain from the data.
    assert report["eta"] == pytest.approx(0.8, abs=0.05)
    assert report["chi"] < 1 and report["secure"]
    assert "key bits" in capsys.readouterr().out

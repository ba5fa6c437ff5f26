import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from ctrw import __version__
from ctrw.cli import KEYS, build_config, run, write_csv
from ctrw.errors import ConfigError


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    assert "\r" not in text
    header = [l[2:] for l in text.splitlines() if l.startswith("#")]
    body = [l for l in text.splitlines() if not l.startswith("#")]
    rows = list(csv.reader(body))
    return header, rows[0], rows[1:]


def numeric(rows):
    return np.array([[float(v) for v in r] for r in rows])


def test_build_config_priority():
    text = "# comment\nwaiting.lambda = 2.0\njump.kappa = 0.1\n"
    cfg = build_config(text, ["jump.kappa=0.3"], {"waiting.lambda": "5"})
    assert cfg["waiting.lambda"] == 5.0 and cfg["jump.kappa"] == 0.3
    assert cfg["tau"] == KEYS["tau"][1]
    with pytest.raises(ConfigError) as info:
        build_config("bogus.key = 1")
    assert info.value.key == "bogus.key"
    with pytest.raises(ConfigError) as info:
        build_config(None, ["tau=abc"])
    assert info.value.key == "tau"


def test_write_csv_round_trip():
    buf = io.StringIO()
    vals = [1 / 3, np.pi * 1e-300, -2.5e17]
    write_csv(buf, ["a", "b", "c"], [vals], {"tau": 0.1})
    lines = buf.getvalue().splitlines()
    assert lines[0] == f"# ctrw {__version__}"
    assert "# tau = 0.10000000000000001" in lines
    back = [float(v) for v in lines[-1].split(",")]
    assert back == vals


def test_renewal_command(tmp_path):
    out = tmp_path / "m.csv"
    assert run(["renewal", "--kind", "erlang", "--nu-num", "2", "--lambda", "1", "-o", str(out)]) == 0
    header, cols, rows = read_csv(out)
    assert cols == ["t", "m", "m_prime"]
    assert f"ctrw {__version__}" in header
    assert "waiting.kind = erlang" in header
    t, m, dm = numeric(rows).T
    np.testing.assert_allclose(m, t / 2 - (1 - np.exp(-2 * t)) / 4, atol=1e-12)


def test_excess_life_exponential(tmp_path):
    out = tmp_path / "e.csv"
    assert run(["excess-life", "--lambda", "1.7", "--set", "r_list=0,2.5", "-o", str(out)]) == 0
    _, cols, rows = read_csv(out)
    data = numeric(rows)
    r, tau, phi, Phi = data[:, 0], data[:, 1], data[:, 2], data[:, 3]
    assert set(r) == {0.0, 2.5}
    np.testing.assert_allclose(Phi, 1 - np.exp(-1.7 * tau), atol=1e-14)
    np.testing.assert_allclose(phi, 1.7 * np.exp(-1.7 * tau), rtol=1e-12)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("waiting.kind = erlang\nwaiting.nu_num = 2\nwaiting.lambda = 1\na = 0\nb = 4\nn_x = 5\n")
    out = tmp_path / "met.csv"
    assert run(["met", "--config", str(cfg), "--r", "1", "--b", "2", "-o", str(out)]) == 0
    header, cols, rows = read_csv(out)
    assert "b = 2" in header or "b = 2.0" in header
    data = numeric(rows)
    assert data[-1, 0] == 2.0
    np.testing.assert_allclose(data[:, 2], -(1 - np.exp(-2.0)) / 2, atol=1e-14)
    np.testing.assert_allclose(data[:, 3], data[:, 1] + data[:, 2], rtol=1e-15)


@pytest.mark.parametrize("variant", ["after_jump", "general", "conditioned"])
def test_propagator_command(tmp_path, variant):
    out = tmp_path / "p.csv"
    args = ["propagator", "--kind", "erlang", "--nu-num", "2", "--kappa", "0.2", "--r", "1", "--tau", "1.5",
            "--variant", variant, "-o", str(out)]
    assert run(args) == 0
    header, cols, rows = read_csv(out)
    assert cols == ["x", "density", "F"]
    x, d, F = numeric(rows).T
    assert np.all(d >= 0) and np.all(np.diff(F) >= -1e-15)
    delta = float(next(h for h in header if h.startswith("delta_weight")).split("=")[1])
    assert 0 < delta < 1
    assert F[-1] == pytest.approx(1.0, abs=1e-3)


def test_stationary_command(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["stationary", "--kind", "erlang", "--nu-num", "3", "--tau", "0.5", "-o", str(out)]) == 0
    _, cols, rows = read_csv(out)
    assert numeric(rows).shape[1] == 3


def test_exit_codes(tmp_path, capsys):
    assert run(["renewal", "--set", "waiting.lamda=1"]) == 2
    assert "waiting.lamda" in capsys.readouterr().err
    assert run(["renewal", "--lambda", "-1"]) == 2
    assert run(["met", "--a", "3", "--b", "1"]) == 2
    assert run(["propagator", "--variant", "sideways"]) == 2
    assert "variant" in capsys.readouterr().err
    assert run(["renewal", "--config", str(tmp_path / "missing.cfg")]) == 2
    # survival to r = 1000 mean waits underflows: the conditioning event is empty
    assert run(["propagator", "--kind", "erlang", "--nu-num", "2", "--variant", "conditioned",
                "--r", "2000", "-o", str(tmp_path / "c.csv")]) == 3
    assert "numerical failure" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        run(["nonsense"])
    assert info.value.code == 2


def test_mc_validate_small(tmp_path):
    out = tmp_path / "v.csv"
    status = run(["mc-validate", "--n-paths", "2000", "--seed", "1", "-o", str(out)])
    header, cols, rows = read_csv(out)
    assert cols == ["statistic", "analytic", "mc", "se", "verdict"]
    verdicts = [r[4] for r in rows]
    assert set(verdicts) <= {"PASS", "FAIL"}
    assert status == (1 if "FAIL" in verdicts else 0)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ctrw", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout

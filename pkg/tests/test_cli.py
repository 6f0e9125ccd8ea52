import csv
import json
import subprocess
import sys

import pytest

from pvspdc import cli
from pvspdc.cli import COLUMNS, CliError, parse_pump, run
from pvspdc.special_math import QuadratureError

FAST = {
    "fig3": ["--wp-min", "0.5", "--wp-max", "1.0", "--wp-step", "0.1"],
    "fig4": ["--lmax", "8"],
    "fig5a": ["--lmax", "10"],
    "fig5b": ["--lmax", "20"],
    "spectrum": ["--pump", "2:1,-2:1i", "--lmax", "5"],
    "state": ["--pump", "12:0.7071,-12:0.7071"],
    "schmidt": ["--lmax", "10"],
    "diagram": [],
}


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("cmd", list(FAST))
def test_every_command_writes_documented_columns(cmd, tmp_path, capsys):
    out = tmp_path / f"{cmd}.csv"
    assert run([cmd, *FAST[cmd], "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == COLUMNS[cmd]
    assert len(rows) > 1 and all(len(r) == len(rows[0]) for r in rows)
    line = capsys.readouterr().out.strip()
    assert line.startswith(cmd) and "\n" not in line


@pytest.mark.parametrize("cmd", ["fig4", "state", "schmidt", "diagram"])
def test_deterministic(cmd, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run([cmd, *FAST[cmd], "--out", str(a)])
    run([cmd, *FAST[cmd], "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("cmd", list(FAST))
def test_help_lists_columns(cmd, capsys):
    with pytest.raises(SystemExit) as info:
        run([cmd, "--help"])
    assert info.value.code == 0
    text = " ".join(capsys.readouterr().out.split())
    assert "CSV columns: " + ", ".join(COLUMNS[cmd]) in text


def test_state_json(tmp_path):
    out = tmp_path / "s.json"
    assert run(["state", "--pump", "12:0.7071,-12:0.7071", "--format", "json",
                "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["command"] == "state"
    cols = doc["columns"]
    assert list(zip(cols["ell1"], cols["ell2"])) == [(-6, -6), (6, 6)]
    assert cols["prob"] == pytest.approx([0.5, 0.5], abs=1e-11)
    assert doc["summary"]["schmidt_number"] == pytest.approx(2.0, abs=1e-9)


def test_fig3_summary(tmp_path):
    out = tmp_path / "f.json"
    assert run(["fig3", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    s = doc["summary"]
    assert abs(s["grid_argmax_pv_opt"] - 0.7071) <= 0.02
    assert 2.5 <= s["peak_ratio"] <= 3.1
    assert doc["columns"]["w_p"][0] == 0.1 and doc["columns"]["w_p"][-1] == 4.0
    assert len(doc["columns"]["w_p"]) == 196


def test_fig5a_defaults(tmp_path):
    out = tmp_path / "f.json"
    assert run(["fig5a", "--format", "json", "--out", str(out)]) == 0
    s = json.loads(out.read_text())["summary"]
    assert s["fraction_pv_band_15"] == pytest.approx(0.81, abs=0.05)
    assert s["fraction_gauss_band_6"] == pytest.approx(0.19, abs=0.05)


def test_twelve_significant_digits(tmp_path):
    out = tmp_path / "s.csv"
    run(["spectrum", "--lmax", "2", "--out", str(out)])
    for row in read_csv(out)[1:]:
        for cell in row[3:]:
            mant = cell.split("e")[0].lstrip("-").replace(".", "").lstrip("0")
            assert len(mant) <= 12


@pytest.mark.parametrize("text,expected", [
    ("12:0.7071,-12:0.7071", {12: 0.7071, -12: 0.7071}),
    ("3:1+2i", {3: 1 + 2j}),
    (" -4 : -0.5i , 0:1", {-4: -0.5j, 0: 1}),
    ("+2:1e-3", {2: 1e-3}),
])
def test_parse_pump(text, expected):
    assert parse_pump(text) == expected


@pytest.mark.parametrize("text", ["", "12", "a:1", "1:x", "1:1,1:2", "0:0"])
def test_parse_pump_errors(text):
    with pytest.raises(CliError):
        parse_pump(text)


@pytest.mark.parametrize("argv", [
    ["nosuch"],
    ["fig3", "--wp", "-1"],
    ["fig3", "--format", "xml"],
    ["state"],
    ["fig4", "--lmax", "-3"],
])
def test_bad_flags_exit_1(argv):
    with pytest.raises(SystemExit) as info:
        run(argv)
    assert info.value.code == 1


@pytest.mark.parametrize("argv", [
    ["state", "--pump", "13:1"],
    ["state", "--pump", "1:x"],
    ["schmidt", "--pump", "1:1,2:1"],
    ["fig3", "--wp-min", "2", "--wp-max", "1"],
])
def test_invalid_requests_exit_1(argv, tmp_path, capsys):
    assert run([*argv, "--out", str(tmp_path / "o.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_nonconvergence_exits_2(monkeypatch, tmp_path):
    def boom(args):
        raise QuadratureError("did not converge", 0.0, 1.0)
    monkeypatch.setitem(cli.COMMANDS, "fig4", boom)
    assert run(["fig4", "--out", str(tmp_path / "o.csv")]) == 2


def test_console_entry_point(tmp_path):
    out = tmp_path / "d.csv"
    res = subprocess.run([sys.executable, "-m", "pvspdc", "diagram", "--pump", "12:1",
                          "--out", str(out)], capture_output=True, text=True)
    assert res.returncode == 0
    assert "1 occupied" in res.stdout
    res = subprocess.run([sys.executable, "-m", "pvspdc", "fig3", "--bogus"],
                         capture_output=True, text=True)
    assert res.returncode == 1

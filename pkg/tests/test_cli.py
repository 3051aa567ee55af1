import json
import math
import subprocess
import sys

import pytest

from etk.cli import CSV_HEADER, main, parse_grid, read_csv, table_to_csv, write_csv, UsageError
from etk.experiments import SweepRow, SweepTable
from etk.model import ParameterError, VariationalCharacter

BASE = ["--potential", "power", "--beta", "-1", "--G", "1", "--N", "3", "--m", "1", "--D", "3", "--state", "bgs"]


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


def table(n):
    rows = [
        SweepRow(
            param=0.1 * i + 1 / 3,
            E_oracle=-1.0717793402556106 * (i + 1),
            oracle_converged=i % 2 == 0,
            E_et=math.pi * 1e-7,
            E_improved=-1.125,
            phi=math.sqrt(2) if i else math.nan,
            rho0_et=3.0,
            character=list(VariationalCharacter)[i % 4],
            rel_err_et=1.23456789012345e-5,
            rel_err_improved=0.5,
        )
        for i in range(n)
    ]
    return SweepTable("npp", "beta", rows)


def test_solve_example(capsys):
    code, out, _ = run(["solve"] + BASE, capsys)
    rec = kv(out)
    assert code == 0
    assert float(rec["E"]) == pytest.approx(-0.5, abs=1e-11)
    assert float(rec["rho0"]) == pytest.approx(3.0, abs=1e-11)
    assert rec["character"] == "UpperBound"


def test_phi_example(capsys):
    code, out, _ = run(["phi"] + BASE, capsys)
    assert code == 0 and float(kv(out)["phi"]) == pytest.approx(1.0, abs=1e-11)


def test_improve_json(capsys):
    code, out, _ = run(["improve"] + BASE + ["--format", "json"], capsys)
    rec = json.loads(out)
    assert code == 0 and rec["E"] == pytest.approx(-1.125) and rec["character"] == "Undefined"


def test_classify_csv(capsys):
    code, out, _ = run(["classify", "--potential", "cubic-linear", "--C", "1", "--format", "csv"], capsys)
    assert code == 0 and out == "character\nLowerBound\n"


def test_d1_improvement_error(capsys):
    argv = ["improve", "--potential", "power", "--beta", "-1", "--D", "1", "--state", "0,0;0,0"]
    code, out, err = run(argv, capsys)
    assert code == 1 and out == ""
    assert "improvement unavailable at D=1" in err
    assert len(err.strip().splitlines()) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--potential", "quartic"],
        ["solve", "--potential", "power"],
        ["solve", "--potential", "power", "--beta", "-1", "--d", "2"],
        ["sweep", "--figure", "npp", "--grid", "1:0:0.1"],
        ["sweep", "--figure", "npp", "--grid", "a,b"],
        ["sweep"],
        ["solve"],
        ["frobnicate"],
        ["solve", "--potential", "power", "--beta", "-1", "--state", "0,0"],
        ["solve", "--potential", "power", "--beta", "-1", "--N", "1"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err


def test_no_bound_state_exit_1(capsys):
    code, _, err = run(["solve", "--potential", "gauss", "--beta", "1.1"], capsys)
    assert code == 1 and "no stationary point" in err


def test_oracle_nonconvergence_exit_1(capsys):
    code, out, err = run(["oracle", "--potential", "power", "--beta", "-1.7"], capsys)
    assert code == 1 and kv(out)["converged"] == "false" and "did not converge" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"potential": "power", "beta": -1.0, "N": 3, "format": "json"}))
    code, out, _ = run(["solve", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out)["E"] == pytest.approx(-0.5)
    code, out, _ = run(["solve", "--config", str(cfg), "--beta", "-0.5"], capsys)
    assert json.loads(out)["E"] != pytest.approx(-0.5)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"potential": "power", "colour": "red"}))
    assert run(["solve", "--config", str(bad)], capsys)[0] == 2
    assert run(["solve", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.txt"
    assert run(["solve"] + BASE + ["--output", str(path)], capsys)[1] == ""
    assert kv(path.read_text())["character"] == "UpperBound"


def test_unwritable_output_exit_1(tmp_path, capsys):
    code, _, err = run(["solve"] + BASE + ["--output", str(tmp_path / "no" / "such" / "f")], capsys)
    assert code == 1 and err


def test_csv_format(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(table(3), str(path))
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").split("\n")
    assert lines[-1] == "" and len(lines) - 1 == 4
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].split(",")[0] == "%.12g" % (1 / 3)
    assert "nan" in lines[1] and "true" in lines[1] and "false" in lines[2]


def test_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    t = table(4)
    write_csv(t, str(path))
    back = read_csv(str(path))
    for rec, r in zip(back, t.rows):
        for k in CSV_HEADER:
            v = getattr(r, k)
            if k in ("character", "oracle_converged"):
                assert rec[k] == v
            elif math.isnan(v):
                assert math.isnan(rec[k])
            else:
                # 12 significant digits: exact to the rounded value, within half a unit of the 12th digit
                assert rec[k] == float("%.12g" % v)
                assert abs(rec[k] - v) <= 5e-12 * abs(v)


def test_empty_table_creates_no_file(tmp_path):
    path = tmp_path / "empty.csv"
    with pytest.raises(ParameterError):
        write_csv(SweepTable("npp", "beta", []), str(path))
    assert not path.exists()


def test_parse_grid():
    assert parse_grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("-1.5,-1,-0.5") == [-1.5, -1.0, -0.5]
    assert len(parse_grid("0:1:0.02")) == 51
    for bad in ("", "1:0:1", "0:1:0", "0:1", "x"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_sweep_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        csv_path, js = tmp_path / f"s{k}.csv", tmp_path / f"s{k}.json"
        cmd = [sys.executable, "-m", "etk", "sweep", "--figure", "tcoulomb", "--grid", "1,2",
               "--output", str(csv_path), "--summary", str(js)]
        subprocess.run(cmd, check=True, env={"ETK_THREADS": str(k + 1), "PATH": ""})
        outs.append((csv_path.read_bytes(), js.read_bytes()))
    assert outs[0] == outs[1]
    rows = outs[0][0].decode().strip().split("\n")
    assert len(rows) == 3 and rows[1].startswith("1,")
    summary = json.loads(outs[0][1])
    assert summary["figure"] == "tcoulomb" and summary["points"] == 2


def test_sweep_json_stdout(capsys):
    code, out, _ = run(["sweep", "--figure", "npp", "--grid", "-1", "--format", "json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["rows"][0]["character"] == "UpperBound"
    assert doc["rows"][0]["E_et"] == pytest.approx(-0.5)


def test_table_to_csv_matches_write(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(table(2), str(path))
    assert path.read_text(encoding="utf-8") == table_to_csv(table(2))


def test_negative_grid_with_equals(capsys):
    code, out, _ = run(["sweep", "--figure", "npp", "--grid=-1,-0.5"], capsys)
    assert code == 0 and len(out.strip().split("\n")) == 3

import csv
import io
import json

import pytest

from connint import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(lines))))


@pytest.fixture(autouse=True)
def no_out_dir(monkeypatch):
    monkeypatch.delenv(cli.OUT_DIR_ENV, raising=False)


def test_moments_csv_has_routes_and_config(capsys):
    code, out, _ = run(capsys, "moments", "--kind", "linear", "--kmax", "2")
    assert code == 0
    assert out.splitlines()[1].startswith("# config: ")
    rows = parse_csv(out)
    header = rows[0]
    assert "moment_closed_unit [closed_form; unit_mass]" in header
    assert "moment_density_unit [quadrature; unit_mass]" in header
    unit = [float(r[header.index("moment_closed_unit [closed_form; unit_mass]")]) for r in rows[1:]]
    assert unit == pytest.approx([1.0, -4.5, 75.0], rel=1e-12)


def test_moments_json_arcsin(capsys):
    code, out, _ = run(capsys, "moments", "--kmax", "3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["kind"] == "arcsin" and doc["config"]["kmax"] == 3
    assert {c["route"] for c in doc["columns"]} >= {"closed_form", "generating_function", "quadrature"}
    assert doc["rows"][0]["moment_closed_unit"] == pytest.approx(2.386294361, rel=1e-9)
    assert doc["meta"]["route_constant"]["value"] == pytest.approx(-1.0, rel=1e-10)


def test_density_complex_columns_split(capsys):
    code, out, _ = run(capsys, "density", "--points", "3", "--vmax", "2")
    assert code == 0
    header = parse_csv(out)[0]
    assert "v2.re [input]" in header and "v2.im [input]" in header
    first = parse_csv(out)[1]
    assert float(first[header.index("n0 [closed_form]")]) == pytest.approx(0.0253303, abs=1e-7)


def test_euclidean_json_complex_values(capsys):
    code, out, _ = run(capsys, "euclidean-density", "--points", "2", "--vmin", "0.5", "--vmax", "1",
                       "--gamma-e-re", "0.8", "--gamma-e-im", "-0.3", "--vminus", "0.9", "--format", "json")
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert set(row["n0_euclidean"]) == {"re", "im"}


def test_maxima_reports_shortfall(capsys):
    code, out, err = run(capsys, "maxima", "--gamma", "0.1", "--n", "5")
    assert code == 1 and "found 3 of 5" in err
    code, out, _ = run(capsys, "maxima", "--gamma", "0.05", "--n", "5", "--format", "json")
    assert code == 0
    assert [r["n"] for r in json.loads(out)["rows"]] == [1, 2, 3, 4, 5]


def test_measure_scan_defaults(capsys):
    code, out, _ = run(capsys, "measure-scan", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    assert [r["n"] for r in rows] == [0, 4, 10, 18, 19, 20, 22]
    verdicts = {r["n"]: r["verdict"] for r in rows}
    assert verdicts[19] == "convergent" and verdicts[20] == "marginal" and verdicts[22] == "divergent"


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kmax": 1, "moments": {"kind": "linear"}, "format": "json"}))
    code, out, _ = run(capsys, "moments", "--config", str(cfg))
    doc = json.loads(out)
    assert code == 0 and doc["config"]["kind"] == "linear" and len(doc["rows"]) == 2
    # flags win over the file
    code, out, _ = run(capsys, "moments", "--config", str(cfg), "--kmax", "2")
    assert len(json.loads(out)["rows"]) == 3


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run(capsys, "moments", "--config", str(bad))[0] == 2
    assert run(capsys, "moments", "--config", str(tmp_path / "missing.json"))[0] == 2


@pytest.mark.parametrize("argv", [
    ["moments", "--gamma", "-1"],
    ["moments", "--kmin", "3", "--kmax", "1"],
    ["density", "--points", "1"],
    ["frobnicate"],
    ["moments", "--kind", "cubic"],
    ["verify", "--check", "11"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(capsys, *argv)[0] == 2


def test_out_dir_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path))
    code, out, _ = run(capsys, "measure-scan", "--n", "0")
    assert code == 0 and out == ""
    assert (tmp_path / "measure-scan.csv").read_text().startswith("# connint")


def test_explicit_out_file(tmp_path, capsys):
    target = tmp_path / "sub" / "m.json"
    assert run(capsys, "moments", "--kmax", "0", "--format", "json", "--out", str(target))[0] == 0
    assert json.loads(target.read_text())["rows"][0]["k"] == 0


def test_verify_single_check_deterministic(capsys):
    code1, out1, err1 = run(capsys, "verify", "--check", "10", "--check", "2")
    code2, out2, _ = run(capsys, "verify", "--check", "10", "--check", "2")
    assert code1 == 0 and out1 == out2
    assert "[PASS] 10" in err1 and "[PASS]  2" in err1
    assert "runtime" not in out1


def test_verify_failure_exit_code(capsys):
    code, out, err = run(capsys, "verify", "--check", "6", "--timings", "--format", "json")
    assert code == 1 and "[FAIL]  6" in err
    assert "runtime" in json.loads(out)["rows"][0]

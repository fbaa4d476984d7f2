import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from funkhilbert.cli import flatten, format_number, main, to_json

ROOT = Path(__file__).resolve().parents[1]
DOMAINS = ROOT / "domains"
GOLDEN = Path(__file__).with_name("golden")

GOLDEN_CASES = {
    "dist_funk_disk": ["dist", "--domain", str(DOMAINS / "disk.json"), "--metric", "funk", "--from", "0,0", "--to", "0.5,0"],
    "wricci_funk_disk": ["wricci", "--metric", "funk", "--point", "0.2,0.1", "--vector", "1,0.3", "--N", "3,4,inf"],
    "domain_info_ellipse": ["domain-info", "--domain", str(DOMAINS / "ellipse.json")],
    "verify_hilbert_ellipse": ["verify", "--domain", str(DOMAINS / "ellipse.json"), "--metric", "hilbert",
                               "--samples", "5", "--seed", "7"],
}


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden(name, capsys):
    code, out, _ = run(GOLDEN_CASES[name], capsys)
    assert code == 0
    assert out == (GOLDEN / f"{name}.json").read_text()


def test_dist_hand_values(capsys):
    code, out, _ = run(GOLDEN_CASES["dist_funk_disk"], capsys)
    rep = json.loads(out)
    assert rep["d_xy"] == pytest.approx(0.693147, abs=1e-6)
    assert rep["d_yx"] == pytest.approx(0.405465, abs=1e-6)


def test_dist_same_point_zero(capsys):
    code, out, _ = run(["dist", "--metric", "hilbert", "--from", "0,0", "--to", "0,0"], capsys)
    assert code == 0 and json.loads(out)["d_xy"] == 0


def test_outside_exit_3(capsys):
    code, out, err = run(["dist", "--from", "2,0", "--to", "0,0"], capsys)
    assert code == 3 and out == "" and "E_OUTSIDE" in err


@pytest.mark.parametrize(
    "args",
    [
        ["wricci", "--point", "0,0", "--vector", "1,0", "--N", "1"],
        ["dist", "--from", "a,b", "--to", "0,0"],
        ["dist", "--from", "0,0"],
        ["dist", "--from", "0,0,0", "--to", "0,0"],
        ["dist", "--metric", "euclid", "--from", "0,0", "--to", "0,0"],
        ["bgcheck", "--K", "1"],
        [],
    ],
)
def test_usage_exit_2(args, capsys):
    code, out, err = run(args, capsys)
    assert code == 2 and out == ""


def test_bad_spec_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"type": "ellipsoid", "center": [0, 0], "semi_axes": [1, -1]}')
    code, _, err = run(["domain-info", "--domain", str(path)], capsys)
    assert code == 2 and "E_BAD_SPEC" in err


def test_wricci_hilbert_center(capsys):
    code, out, _ = run(["wricci", "--metric", "hilbert", "--point", "0,0", "--vector", "1,0", "--N", "inf"], capsys)
    assert json.loads(out)["ric_inf"] == pytest.approx(2.0, abs=2e-3)


def test_wricci_strict(capsys):
    args = ["wricci", "--point", "0.1,0", "--vector", "1,0", "--N", "4", "--tol", "1e-30"]
    assert run(args, capsys)[0] == 0
    assert run(args + ["--strict"], capsys)[0] == 4


def test_verify_failure_exit_4(capsys):
    code, out, _ = run(["verify", "--samples", "2", "--tol", "1e-30"], capsys)
    assert code == 4 and json.loads(out)["status"] == "FAIL"


def test_verify_p4_warning(capsys):
    code, out, err = run(["verify", "--domain", str(DOMAINS / "p4ball.json"), "--samples", "3"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "PASS-with-warning"
    assert rep["strong_convexity_margin"] == pytest.approx(0.0, abs=1e-12)
    assert "warning" in err


def test_ballvol_disk(capsys):
    code, out, _ = run(["ballvol", "--metric", "funk", "--center", "0,0", "--r", "1"], capsys)
    ball = json.loads(out)["balls"][0]
    assert abs(ball["value"] - math.pi * (1 - math.exp(-1)) ** 2) <= 3 * ball["std_error"]


def test_bgcheck_hilbert(capsys):
    code, out, _ = run(["bgcheck", "--metric", "hilbert", "--N", "4", "--samples", "50000"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["summary"] == "0 violations"
    assert rep["K"] == pytest.approx(-5.5)


def test_tensor_and_ricci(capsys):
    code, out, _ = run(["tensor", "--metric", "funk", "--point", "0,0", "--vector", "0,1"], capsys)
    g = json.loads(out)["g_graph"]
    assert g == [[1, 0], [0, 1]] or g == pytest.approx([[1, 0], [0, 1]])
    code, out, _ = run(["ricci", "--metric", "hilbert", "--point", "0,0", "--vector", "0,1"], capsys)
    assert json.loads(out)["ricci_value"] == pytest.approx(-1.0, abs=1e-6)


def test_domain_info_classify(capsys):
    code, out, _ = run(["domain-info", "--domain", str(DOMAINS / "ellipse.json"), "--point", "2,0"], capsys)
    rep = json.loads(out)
    assert rep["classification"] == "boundary"
    assert rep["strong_convexity_margin"] == pytest.approx(0.25, abs=1e-12)


def test_csv_matches_json(capsys):
    args = GOLDEN_CASES["wricci_funk_disk"]
    _, js, _ = run(args, capsys)
    _, cs, _ = run(args + ["--format", "csv"], capsys)
    rows = list(csv.reader(io.StringIO(cs)))
    assert rows[0] == ["key", "value"]
    from_csv = {k: v for k, v in rows[1:]}
    from_json = dict(flatten(json.loads(js)))
    assert list(from_csv) == list(from_json)
    for key, val in from_json.items():
        text = val if isinstance(val, str) else format_number(val)
        assert from_csv[key] == text.strip('"')


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.json"
    code, out, _ = run(GOLDEN_CASES["dist_funk_disk"] + ["--output", str(path)], capsys)
    assert code == 0 and out == ""
    assert path.read_text() == (GOLDEN / "dist_funk_disk.json").read_text()


def test_number_format():
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(-math.inf) == '"-inf"'
    assert format_number(3) == "3"
    assert to_json({"a": [1.5, -math.inf]}) == '{\n  "a": [1.5, "-inf"]\n}\n'


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "funkhilbert", "dist", "--from", "0,0", "--to", "0.5,0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    # the default domain is the unit disk, so this reproduces the golden report
    assert proc.stdout == (GOLDEN / "dist_funk_disk.json").read_text()

import csv
import io
import json
import math
from fractions import Fraction

import pytest

from gtliquid.cli import main
from gtliquid.density import DensitySpec, builtin, poly
from gtliquid.finite import kernel_tilde


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def quartic_path(tmp_path):
    p = tmp_path / "quartic.json"
    p.write_text(builtin("quartic").to_json())
    return str(p)


def test_validate_exit_codes(capsys, tmp_path, quartic_path):
    code, out, _ = run(capsys, "validate", "--spec", quartic_path)
    assert code == 0 and json.loads(out)["valid"]
    bad = tmp_path / "unit.json"
    bad.write_text(DensitySpec((poly(0, 1, 1.0),)).to_json())
    code, out, _ = run(capsys, "validate", "--spec", str(bad))
    assert code == 1 and json.loads(out)["violations"][0]["invariant"] == "hull"
    broken = tmp_path / "broken.json"
    broken.write_text("{nope")
    assert run(capsys, "validate", "--spec", str(broken))[0] == 2
    assert run(capsys, "validate")[0] == 2
    assert run(capsys, "no-such-command")[0] == 2


def test_map_grid_and_single_point(capsys):
    code, out, _ = run(capsys, "map", "--builtin", "uniform-half", "--u-range", "-1", "3", "--v-range", "0.01", "2", "--nu", "20", "--nv", "20")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 400
    assert list(rows[0]) == ["u", "v", "chi", "eta", "re_omega", "im_omega", "rho", "residual"]
    assert max(float(r["residual"]) for r in rows) < 1e-8
    code, out, _ = run(capsys, "map", "--builtin", "uniform-half", "--u-range", "0", "0", "--v-range", "1", "1", "--nu", "1", "--nv", "1")
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert (float(row["chi"]), float(row["eta"]), float(row["rho"])) == pytest.approx((1.2263, 0.1198, 0.1762), abs=1e-4)
    assert run(capsys, "map", "--builtin", "uniform-half", "--u-range", "0", "1", "--v-range", "1", "2", "--nu", "0")[0] == 2


def test_boundary_json_and_svg(capsys, tmp_path):
    code, out, _ = run(capsys, "boundary", "--builtin", "quartic")
    assert code == 0
    doc = json.loads(out)
    assert doc["infinity"] == pytest.approx([0.5, 0.0])
    ends = sorted(s["endpoint"][0] for s in doc["singular"])
    assert ends == pytest.approx([-0.003863, 0.714602], abs=1e-5)
    svg = tmp_path / "q.svg"
    assert run(capsys, "boundary", "--builtin", "quartic", "--format", "svg", "--out", str(svg))[0] == 0
    text = svg.read_text()
    assert text.startswith("<svg") or text.startswith("<?xml")
    assert "blue" in text and "red" in text
    code, out, _ = run(capsys, "boundary", "--builtin", "two-interval")
    doc = json.loads(out)
    assert code == 0 and doc["singular"] == [] and doc["edge"]
    bad = tmp_path / "unit.json"
    bad.write_text(DensitySpec((poly(0, 1, 1.0),)).to_json())
    assert run(capsys, "boundary", "--spec", str(bad))[0] == 1


def test_classify_points(capsys):
    code, out, _ = run(capsys, "classify", "--builtin", "quartic", "0", "1", "5")
    assert code == 0
    doc = json.loads(out)
    kinds = [d["kind"] for d in doc]
    assert kinds == ["Generic", "SingularIII", "EdgePoint"]
    assert math.pi * doc[1]["H_f"] == pytest.approx(1.25)


def test_sample_is_byte_identical_per_seed(capsys, tmp_path):
    a = run(capsys, "sample", "--toprow", "6,4,2,0", "--count", "5", "--seed", "9")
    b = run(capsys, "sample", "--toprow", "6,4,2,0", "--count", "5", "--seed", "9")
    c = run(capsys, "sample", "--toprow", "6,4,2,0", "--count", "5", "--seed", "10")
    assert a[0] == 0 and a[1] == b[1] and a[1] != c[1]
    assert a[1].startswith("sample_id,r,i,y\n")
    code, out, _ = run(capsys, "sample", "--builtin", "uniform-half", "--n", "8", "--count", "2")
    assert code == 0 and out.count("\n") == 1 + 2 * 36
    assert run(capsys, "sample", "--toprow", "3,3,1")[0] == 1


def test_compare_and_depth_mismatch(capsys, tmp_path):
    path = tmp_path / "s.csv"
    assert run(capsys, "sample", "--builtin", "uniform-half", "--n", "20", "--count", "40", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "compare", "--builtin", "uniform-half", "--samples", str(path), "--n", "20", "--chi-bins", "4", "--eta-bins", "4")
    assert code == 0
    doc = json.loads(out)
    assert doc["sup_error"] < 0.25
    assert run(capsys, "compare", "--builtin", "uniform-half", "--samples", str(path), "--n", "21")[0] == 1


def test_kernel_values(capsys):
    code, out, _ = run(capsys, "kernel", "--toprow", "2,0", "--query", "1,1,1,1")
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["value"] == "1/2" and rec["float"] == 0.5
    assert run(capsys, "kernel", "--toprow", "4,2,0", "--query", "0,1,2,1")[0] == 1
    # s <= r subtracts nothing, so K equals the residue sum
    code, out, _ = run(capsys, "kernel", "--toprow", "4,2,0", "--query", "3,2,2,1")
    assert code == 0
    assert Fraction(json.loads(out)[0]["value"]) == kernel_tilde((4, 2, 0), (3, 2), (2, 1))


def test_burgers_order(capsys):
    code, out, _ = run(capsys, "burgers", "--builtin", "uniform-half", "--point", "1,1")
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["order"] == pytest.approx([2, 2], abs=0.1)

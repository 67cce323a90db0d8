import csv
import io
import json
import math

import numpy as np
import pytest

from splitgen.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _gen(tmp_path, capsys, *flags, name="c.json"):
    path = tmp_path / name
    code, _, err = _run(capsys, "gen", *flags, "-o", str(path))
    assert code == 0, err
    return path, json.loads(path.read_text()), err


# ---- gen ----


def test_gen_4a(tmp_path, capsys):
    _, doc, _ = _gen(tmp_path, capsys, "--family", "4a")
    assert doc["t"] == [0.0, 0.5, 0.5]
    assert np.allclose(doc["v"], [1 / 6, 2 / 3, 1 / 6], atol=1e-15)
    assert doc["e_vtv"] == pytest.approx(-1 / 72, abs=1e-15)
    assert doc["positivity"]["forward"] is True


def test_gen_forest_ruth(tmp_path, capsys):
    _, doc, _ = _gen(tmp_path, capsys, "--family", "forest-ruth")
    assert doc["t"][1] == 1.3512071919596578
    assert doc["positivity"]["goldman_kaper"] is True


def test_gen_flags_non_forward(tmp_path, capsys):
    _, doc, err = _gen(tmp_path, capsys, "--family", "4bda", "--t2", "0.9")
    assert doc["positivity"]["forward"] is False
    assert 0 in doc["positivity"]["negative_v"]
    assert "not forward" in err


def test_gen_stdout(capsys):
    code, out, _ = _run(capsys, "gen", "--family", "4d")
    assert code == 0
    assert json.loads(out)["e_vtv"] == pytest.approx(-1 / 192, abs=1e-15)


@pytest.mark.parametrize(
    "argv",
    [
        ("gen", "--family", "nope"),
        ("gen", "--family", "4bda"),
        ("gen", "--family", "4bda", "--t2", "1.5"),
        ("gen", "--family", "4a", "--t2", "0.3"),
        ("gen",),
        ("bogus",),
    ],
)
def test_gen_usage_errors(capsys, argv):
    code, _, _ = _run(capsys, *argv)
    assert code == 2


FAMILY_GRID = (
    [("4a",), ("4b",), ("4c",), ("4d",), ("forest-ruth",), ("leapfrog",)]
    + [("4bda", "--t2", str(x)) for x in (0.1, 0.25, 1 / 3, 0.5, 0.9)]
    + [("4acb", "--v2", str(x)) for x in (0.1, 1 / 6, 0.375, 0.45)]
    + [("min-velocity", "--n", str(n)) for n in (3, 4, 7)]
    + [("min-position", "--n", str(n)) for n in (3, 4, 7)]
    + [("velocity-9", "--t2", str(x)) for x in (0.0, 0.25, 0.4)]
    + [("position-9", "--v2", str(x)) for x in (0.1, 0.25, 0.5)]
    + [("velocity-11", "--t2", "0.2029", "--t3", "0.1926"), ("position-11", "--v2", "0.1518", "--v3", "0.2158")]
    + [("fr-even", "--alphas", "1"), ("fr-even", "--alphas", "1", "0.5", "2"), ("fr-odd", "--alphas", "1", "1")]
)


@pytest.mark.parametrize("family", FAMILY_GRID, ids=lambda f: "-".join(f))
def test_gen_check_round_trip(tmp_path, capsys, family):
    path, _, _ = _gen(tmp_path, capsys, "--family", *family)
    code, out, _ = _run(capsys, "check", str(path))
    assert code == 0, out
    assert "status: ok" in out


# ---- check ----


def test_check_4a_reports_orders(tmp_path, capsys):
    path, _, _ = _gen(tmp_path, capsys, "--family", "4a")
    code, out, _ = _run(capsys, "check", str(path))
    assert code == 0
    assert "order (bare splitting): 2" in out
    effective = next(l for l in out.splitlines() if l.startswith("order (with gradient term"))
    assert "weight 0.013888888888888" in effective and effective.endswith(": 4")
    assert "e_VTV: -0.01388888888888" in out


def test_check_corrupted_v(tmp_path, capsys):
    path, doc, _ = _gen(tmp_path, capsys, "--family", "4a")
    doc["v"][1] += 0.01
    path.write_text(json.dumps(doc))
    code, out, _ = _run(capsys, "check", str(path))
    assert code == 1
    assert "e_V = sum(v)" in out


def test_check_wrong_e_vtv(tmp_path, capsys):
    path, doc, _ = _gen(tmp_path, capsys, "--family", "4d")
    doc["e_vtv"] = -1 / 72
    path.write_text(json.dumps(doc))
    code, out, _ = _run(capsys, "check", str(path))
    assert code == 1
    assert "e_VTV mismatch" in out


def test_check_claimed_order_too_high(tmp_path, capsys):
    path, doc, _ = _gen(tmp_path, capsys, "--family", "leapfrog")
    doc["claimed_order"] = 4
    path.write_text(json.dumps(doc))
    assert _run(capsys, "check", str(path))[0] == 1


def test_check_bad_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert _run(capsys, "check", str(path))[0] == 2
    path.write_text("[1, 2]")
    assert _run(capsys, "check", str(path))[0] == 2
    assert _run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2


def test_check_oracle_forest_ruth(tmp_path, capsys):
    path, _, _ = _gen(tmp_path, capsys, "--family", "forest-ruth")
    code, out, _ = _run(capsys, "check", str(path), "--oracle")
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("oracle agreement"))
    assert float(line.split()[2]) <= 1e-6


def test_check_oracle_seed_from_environment(tmp_path, capsys, monkeypatch):
    path, _, _ = _gen(tmp_path, capsys, "--family", "4a")
    monkeypatch.setenv("SPLITGEN_SEED", "11")
    env = _run(capsys, "check", str(path), "--oracle")[1]
    explicit = _run(capsys, "check", str(path), "--oracle", "--seed", "11")[1]
    default = _run(capsys, "--seed", "20050", "check", str(path), "--oracle")[1]
    assert env == explicit
    assert env != default


# ---- converge ----


def _slope(text):
    last = text.strip().splitlines()[-1]
    assert last.startswith("# slope=")
    return float(last.split()[1].split("=")[1])


def test_converge_leapfrog(capsys):
    code, out, _ = _run(capsys, "converge", "--family", "leapfrog", "--system", "harmonic")
    assert code == 0
    assert _slope(out) == pytest.approx(2, abs=0.1)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["eps", "global_error"]
    assert len(rows) == 11


def test_converge_4d_default_gradient(capsys):
    code, out, _ = _run(capsys, "converge", "--family", "4d")
    assert code == 0
    assert _slope(out) == pytest.approx(4, abs=0.1)


def test_converge_4d_central_rejected(capsys):
    code, _, err = _run(capsys, "converge", "--family", "4d", "--gradient", "central")
    assert code == 2
    assert "odd number of nonzero kicks" in err


def test_converge_bad_grid(capsys):
    assert _run(capsys, "converge", "--family", "4a", "--eps-min", "0.5", "--eps-max", "0.1")[0] == 2


def test_converge_forest_ruth_kepler(capsys):
    code, out, _ = _run(capsys, "converge", "--family", "forest-ruth", "--system", "kepler")
    assert code == 0
    assert _slope(out) == pytest.approx(4, abs=0.1)


# ---- figure ----


def _figure(capsys, *argv):
    code, out, _ = _run(capsys, "figure", *argv)
    assert code == 0
    return list(csv.DictReader(io.StringIO(out)))


def test_figure1_symmetric_point(capsys):
    rows = _figure(capsys, "fig1")
    grid = [r for r in rows if r["kind"] == "grid"]
    assert len(grid) == 51
    mid = next(r for r in grid if float(r["t2"]) == 0.25)
    assert float(mid["phi"]) == pytest.approx(15 / 16, abs=1e-15)


def test_figure2_symmetric_point(capsys):
    rows = _figure(capsys, "fig2")
    mid = next(r for r in rows if r["kind"] == "grid" and float(r["v2"]) == 0.25)
    assert float(mid["phi_prime"]) == pytest.approx(math.sqrt(15 / 16), abs=1e-15)


def test_figure_eleven_stage_overlay(capsys):
    row = next(r for r in _figure(capsys, "fig1") if r["kind"] == "omf11")
    assert abs(float(row["v1_predicted"]) - 0.0848) <= 5e-5
    assert abs(float(row["v2_predicted"]) - 0.2060) <= 5e-5
    assert float(row["v1_reference"]) == 0.0667 and float(row["v2_reference"]) == 0.2620
    row = next(r for r in _figure(capsys, "fig2") if r["kind"] == "omf11")
    assert abs(float(row["t1_predicted"]) - 0.0659) <= 5e-5
    assert abs(float(row["t2_predicted"]) - 0.1881) <= 5e-5


def test_figure_user_overlay(tmp_path, capsys):
    path = tmp_path / "points.json"
    path.write_text(json.dumps({"fig1": {"points": [{"label": "mine", "t2": 0.3, "v1": 0.1, "v2": 0.3}]}}))
    rows = [r for r in _figure(capsys, "fig1", "--overlay", str(path)) if r["kind"] == "omf9"]
    assert len(rows) == 1 and rows[0]["label"] == "mine"
    assert rows[0]["v1_residual"] != ""


def test_figure_unknown(capsys):
    assert _run(capsys, "figure", "fig3")[0] == 2


# ---- determinism ----


@pytest.mark.parametrize(
    "argv",
    [
        ("gen", "--family", "4bda", "--t2", "0.3"),
        ("figure", "fig2", "--grid-count", "7"),
        ("converge", "--family", "4a", "--eps-count", "3"),
    ],
)
def test_outputs_are_byte_identical(tmp_path, capsys, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([*argv, "-o", str(a)]) == 0
    assert main([*argv, "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()

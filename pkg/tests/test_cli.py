import csv
import json
from pathlib import Path

import pytest

from medialkit.main import run


def _report(path: Path) -> dict:
    return json.loads(path.read_text(encoding="utf-8"))


def test_distance(tmp_path: Path):
    out = tmp_path / "distance.json"
    rc = run(["distance", "wristwatch", "--at", "0,0", "--report", str(out)])
    assert rc == 0
    report = _report(out)
    assert report["command"] == "distance"
    assert report["scene"] == "wristwatch"
    assert report["results"]["distance"] == pytest.approx(2.0)
    assert report["assertions"] == []


def test_nearest(tmp_path: Path):
    out = tmp_path / "nearest.json"
    assert run(["nearest", "two_points.scene", "--at", "0,0", "--report", str(out)]) == 0
    results = _report(out)["results"]
    assert results["multiplicity"] == 2
    assert results["diameter"] == pytest.approx(2.0)


def test_medial_writes_the_bisector(tmp_path: Path):
    cloud = tmp_path / "medial.csv"
    rc = run(["medial", "two_points.scene", "--box=-2,-2,2,2", "--step", "0.05", "--out", str(cloud)])
    assert rc == 0
    with open(cloud, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert rows
    assert set(rows[0]) == {"x", "y", "distance", "multiplicity", "diameter", "refined", "continuum"}
    assert all(abs(float(r["x"])) <= 0.05 for r in rows)


def test_dim_writes_the_spectra_of_the_nearest_circle(tmp_path: Path):
    spectra = tmp_path / "spectra.csv"
    out = tmp_path / "dim.json"
    rc = run(["dim", "circle", "--at", "0,0", "--box=-0.5,-0.5,0.5,0.5", "--step", "0.05",
              "--spectra-out", str(spectra), "--report", str(out)])
    assert rc == 0
    with open(spectra, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    assert set(rows[0]) == {"scale", "rank", "eigenvalue"}
    assert len(rows) == sum(len(eig) for eig in _report(out)["results"]["dim_m_spectra"])
    assert all(int(r["rank"]) in (0, 1) for r in rows)


def test_derivative_passes_its_cross_checks(tmp_path: Path):
    out = tmp_path / "derivative.json"
    assert run(["derivative", "two_points", "--at", "0,0", "--dir", "1,0", "--report", str(out)]) == 0
    report = _report(out)
    assert report["results"]["value"] == pytest.approx(-1.0)
    assert all(a["pass"] for a in report["assertions"])


def test_radius(tmp_path: Path):
    out = tmp_path / "radius.json"
    assert run(["radius", "circle", "--at", "1,0", "--dir=-1,0", "--report", str(out)]) == 0
    results = _report(out)["results"]
    assert results["r_v"] == pytest.approx(1.0, abs=1e-6)
    assert results["r_reach"] == pytest.approx(1.0, abs=1e-4)


def test_outward_radius_prints_unbounded(tmp_path: Path):
    out = tmp_path / "radius.json"
    assert run(["radius", "circle", "--at", "1,0", "--dir", "1,0", "--report", str(out)]) == 0
    assert _report(out)["results"]["r_v"] == "unbounded"


@pytest.mark.slow
def test_frontier_on_chazal(tmp_path: Path):
    out = tmp_path / "frontier.json"
    assert run(["frontier", "chazal", "--at", "0,0,1.5", "--report", str(out)]) == 0
    assert _report(out)["results"]["verdict"] == "in_closure"


def test_reports_are_deterministic(tmp_path: Path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["sphere-medial", "two_points", "--at", "0,0"]
    assert run([*argv, "--report", str(first)]) == 0
    assert run([*argv, "--report", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["distance", "circle"],
        ["distance", "circle", "--at", "0,zero"],
        ["distance", "circle", "--at", "1"],
        ["verify", "nope"],
        ["teleport"],
    ],
)
def test_usage_errors_exit_2(argv):
    assert run(argv) == 2


def test_geometry_errors_exit_2():
    assert run(["derivative", "circle", "--at", "1,0", "--dir", "1,0"]) == 2
    assert run(["distance", "missing_scene", "--at", "0,0"]) == 2


@pytest.mark.slow
def test_verify_mises(tmp_path: Path):
    out = tmp_path / "mises.json"
    assert run(["verify", "mises", "--report", str(out)]) == 0
    report = _report(out)
    assert report["command"] == "verify"
    assert next(a for a in report["assertions"] if a["name"] == "mises:agreements")["actual"] >= 3000

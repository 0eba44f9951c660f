import json

import numpy as np
import pytest
import typer

from medialkit.api.dependencies.reporting import emit_report
from medialkit.schemas.report import CheckReport, Report


def test_report_field_order_and_alias(capsys):
    report = Report(command="distance", scene="circle", parameters={"at": [0.0, 0.0]})
    report.results["distance"] = np.float64(1.0)
    report.check("unit", expected=1.0, actual=1.0, tolerance=1e-9, passed=True)
    emit_report(report)

    text = capsys.readouterr().out
    doc = json.loads(text)
    assert list(doc) == ["command", "scene", "parameters", "results", "assertions"]
    assert doc["assertions"][0]["pass"] is True
    assert doc["results"]["distance"] == 1.0


def test_numpy_values_become_plain_json(capsys):
    report = Report(command="nearest", scene="two_points")
    report.results["representatives"] = np.array([[1.0, 0.0], [-1.0, 0.0]])
    report.results["flag"] = np.bool_(True)
    emit_report(report)
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"]["representatives"] == [[1.0, 0.0], [-1.0, 0.0]]
    assert doc["results"]["flag"] is True


def test_failed_assertion_exits_1(tmp_path, capsys):
    report = Report(command="verify", scene="golden")
    report.check("broken", expected=0, actual=1, tolerance=0, passed=False)
    path = tmp_path / "report.json"
    with pytest.raises(typer.Exit) as exc:
        emit_report(report, path)
    assert exc.value.exit_code == 1
    assert json.loads(path.read_text(encoding="utf-8"))["assertions"][0]["pass"] is False


def test_absorb_turns_a_probe_into_one_assertion():
    report = Report(command="verify", scene="golden")
    probe = CheckReport(name="lipschitz", checked=10, violations=[{"x": np.zeros(2)}], details={"tolerance": 0.0})
    assert not report.absorb(probe, prefix="circle:")
    assertion = report.assertions[0]
    assert assertion.name == "circle:lipschitz"
    assert assertion.actual["violations"] == 1
    assert assertion.actual["first"] == [{"x": [0.0, 0.0]}]
    assert not report.passed

"""Tests for report serialization, loading and the best-constant summary."""
import json
import math

import pytest

from smoothlab.harness.reports import (
    Refinement,
    Row,
    VerificationReport,
    best_constant,
    format_summary,
    load_report,
    relative_change,
    summary_csv,
    trend_of,
    write_report,
)
from smoothlab.shared.config import ConfigError


def _report(label="A", case_id="MARCHAUD_CLASSIC", sup=2.0, verdict="PASS", parameters=None, **kw) -> VerificationReport:
    return VerificationReport(case_id=case_id, label=label, anchor="anchor", parameters=parameters or {},
                              family="g", verdict=verdict, ceiling=100.0, sup_ratio=sup, **kw)


def test_infinity_is_written_as_a_string():
    """inf -> "inf" in JSON and back to float on load."""
    report = _report(sup=math.inf, verdict="FAIL",
                     rows=[Row(f_id="g-0", t=0.5, lhs=1.0, rhs=0.0, ratio=math.inf, status="zero_rhs")])
    data = json.loads(report.to_json())
    assert data["sup_ratio"] == "inf"
    assert data["rows"][0]["ratio"] == "inf"
    back = VerificationReport.model_validate(data)
    assert math.isinf(back.sup_ratio)


def test_canonical_json_shape():
    """Sorted keys, two-space indent, trailing newline; no timing."""
    report = _report()
    report.set_seconds(12.5)
    text = report.to_json()
    assert text.endswith("}\n")
    keys = list(json.loads(text))
    assert keys == sorted(keys)
    assert "seconds" not in text


def test_csv_rows():
    """Empty ratio cell for rows without a ratio."""
    report = _report(rows=[Row(f_id="g-0", t=0.5, lhs=0.0, rhs=math.inf, status="infinite_rhs")])
    assert report.to_csv() == "t,lhs,rhs,ratio,f_id\n0.5,0.0,inf,,g-0\n"


def test_write_and_load(tmp_path):
    """JSON, CSV and the timing sidecar; the JSON loads back unchanged."""
    report = _report(label="case-1")
    report.set_seconds(0.25)
    paths = write_report(report, tmp_path)
    assert sorted(p.name for p in paths) == ["case-1.csv", "case-1.json", "case-1.timing.json"]
    timing = json.loads((tmp_path / "case-1.timing.json").read_text())
    assert timing == {"label": "case-1", "seconds": 0.25}
    assert load_report(tmp_path / "case-1.json").to_json() == report.to_json()


def test_load_report_errors(tmp_path):
    """Missing files, bad JSON and schema mismatches are config errors."""
    with pytest.raises(ConfigError):
        load_report(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_report(bad)
    old = tmp_path / "old.json"
    data = json.loads(_report().to_json())
    data["schema_version"] = "0"
    old.write_text(json.dumps(data))
    with pytest.raises(ConfigError) as exc:
        load_report(old)
    assert exc.value.key == "schema_version"


def test_relative_change_and_trend():
    """Relative change of the sup ratio under refinement."""
    assert relative_change(2.0, 2.1) == pytest.approx(0.05)
    assert relative_change(None, 1.0) is None
    assert relative_change(0.0, 0.0) == 0.0
    assert trend_of(2.0, 2.02) == "flat"
    assert trend_of(2.0, 3.0) == "up"
    assert trend_of(2.0, 1.0) == "down"
    assert trend_of(math.inf, 1.0) == "unknown"


def test_best_constant_groups_by_case_and_stratum():
    """THM68 constants are kept apart per b; other cases pool their families."""
    reports = [
        _report("m1", sup=1.5),
        _report("m2", sup=2.5, verdict="FAIL"),
        _report("t1", case_id="THM68", sup=3.0, parameters={"b": "logplus^0.5"}),
        _report("t2", case_id="THM68", sup=4.0, parameters={"b": "logplus^1"}),
    ]
    rows = best_constant(reports)
    assert [(r.case_id, r.stratum) for r in rows] == [
        ("MARCHAUD_CLASSIC", "-"), ("THM68", "b=logplus^0.5"), ("THM68", "b=logplus^1")]
    assert rows[0].best_constant == 2.5
    assert rows[0].verdicts == ["PASS", "FAIL"]
    assert rows[0].stability == "unrefined"


def test_best_constant_stability_from_refinement():
    """Any unstable refinement makes the row unstable and reports its trend."""
    stable = Refinement(cells=64, refined_cells=128, sup_ratio=2.0, refined_sup_ratio=2.02,
                        relative_change=0.01, stable=True, trend="flat")
    drifting = Refinement(cells=64, refined_cells=128, sup_ratio=2.0, refined_sup_ratio=3.0,
                          relative_change=0.5, stable=False, trend="up")
    rows = best_constant([_report("a", refinement=stable), _report("b", refinement=drifting)])
    assert rows[0].stability == "unstable"
    assert rows[0].trend == "up"
    assert rows[0].max_relative_change == 0.5
    assert best_constant([_report("a", refinement=stable)])[0].stability == "stable"


def test_summary_outputs():
    """CSV and fixed-width table; infinite constants print as +inf."""
    rows = best_constant([_report("a", sup=math.inf, verdict="FAIL"), _report("b", case_id="TIMAN", sup=None,
                                                                              verdict="DEGENERATE")])
    csv = summary_csv(rows)
    assert csv.splitlines()[0].startswith("case_id,stratum,best_constant")
    assert "MARCHAUD_CLASSIC,-,inf,unrefined,unknown,,FAIL,a" in csv
    table = format_summary(rows)
    assert "+inf" in table
    assert table.splitlines()[-1].split()[2] == "-"

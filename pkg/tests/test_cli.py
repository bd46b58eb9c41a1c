"""CLI: exit codes 0/1/2, stdout results, stderr errors."""
import json

import numpy as np
import pytest
import yaml

from smoothlab.cli.main import format_value, main
from smoothlab.core.gridfn import GridFunction


@pytest.fixture
def indicator_csv(tmp_path):
    f = GridFunction.from_callable(lambda x: (np.abs(x) < 0.5).astype(float), [(-1.0, 1.0)], [100])
    path = tmp_path / "chi.csv"
    f.save(path)
    return path


def _suite_file(tmp_path, *cases):
    path = tmp_path / "suite.yaml"
    path.write_text(yaml.safe_dump({
        "version": "1",
        "grid": {"cells": 128},
        "tgrid": {"lo": 0.25, "hi": 0.5},
        "families": {"g": {"kind": "gaussians", "count": 2}},
        "cases": list(cases),
    }))
    return path


TRIVIAL = {"id": "TRIVIAL_BOUND", "family": "g", "params": {"k": 1, "m": 1, "p": 2}, "ceiling": 1.000001}


def test_format_value():
    """Twelve significant digits; +inf for divergence."""
    assert format_value(float("inf")) == "+inf"
    assert format_value(1 / 3) == "0.333333333333"


def test_norm_command(indicator_csv, capsys):
    """‖χ(-1/2,1/2)‖_{L^{2,2}} = 1."""
    assert main(["norm", "Lorentz(p=2,r=2)", str(indicator_csv)]) == 0
    assert capsys.readouterr().out.strip() == "1"


def test_bad_space_literal_exits_2(indicator_csv, capsys):
    """Input errors are one stderr line and exit 2."""
    assert main(["norm", "Sobolev(p=2)", str(indicator_csv)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: ")
    assert "Sobolev" in err


def test_missing_file_exits_2(tmp_path, capsys):
    assert main(["norm", "Lebesgue(p=2)", str(tmp_path / "nope.csv")]) == 2
    assert "no such file" in capsys.readouterr().err


def test_usage_errors_exit_2():
    """argparse usage errors map to 2; --version to 0."""
    assert main(["frobnicate"]) == 2
    assert main(["--version"]) == 0


def test_weights_command(capsys):
    """B_r for the constant weight at r = 2."""
    assert main(["weights", "Br", "t^0", "--r", "2"]) == 0
    out = capsys.readouterr().out
    assert "holds" in out
    assert main(["weights", "Br", "t^1", "--r", "2"]) == 0
    assert "fails" in capsys.readouterr().out


def test_kfun_command(indicator_csv, capsys):
    """One CSV row per t-grid point."""
    assert main(["kfun", str(indicator_csv), "--space", "Lebesgue(p=2)", "--t-lo", "0.25", "--t-hi", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,K"
    assert [line.split(",")[0] for line in lines[1:]] == ["0.25", "0.5"]


def test_empty_tgrid_exits_2(indicator_csv, capsys):
    assert main(["modulus", str(indicator_csv), "--space", "Lebesgue(p=2)", "--t-lo", "0.3", "--t-hi", "0.35"]) == 2
    assert "empty t-grid" in capsys.readouterr().err


def test_modulus_command_writes_to_out(indicator_csv, tmp_path):
    """--out writes modulus.csv instead of printing."""
    out = tmp_path / "out"
    assert main(["modulus", str(indicator_csv), "--space", "Lebesgue(p=1)", "--t-lo", "0.125", "--t-hi", "0.25",
                 "--out", str(out)]) == 0
    lines = (out / "modulus.csv").read_text().splitlines()
    assert lines[0] == "t,omega"
    # largest lattice shift below 1/8 is 0.12 at spacing 0.02
    assert float(lines[1].split(",")[1]) == pytest.approx(0.24)


def test_rearrange_command(indicator_csv, tmp_path):
    """f* and f** CSVs land in --out."""
    out = tmp_path / "r"
    assert main(["rearrange", str(indicator_csv), "--out", str(out)]) == 0
    assert (out / "chi.fstar.csv").exists()
    assert (out / "chi.fstarstar.csv").exists()


def test_verify_and_report(tmp_path, capsys):
    """A passing suite exits 0; report aggregates its JSON."""
    out = tmp_path / "reports"
    assert main(["verify", str(_suite_file(tmp_path, TRIVIAL)), "--out", str(out), "--no-plots"]) == 0
    assert "TRIVIAL_BOUND: PASS" in capsys.readouterr().out
    assert main(["report", str(out / "TRIVIAL_BOUND.json"), "--out", str(out)]) == 0
    assert "TRIVIAL_BOUND" in capsys.readouterr().out
    assert (out / "summary.csv").read_text().startswith("case_id,stratum,best_constant")


def test_verify_fails_on_violation(tmp_path, capsys):
    """A hypothesis violation makes the run exit 1."""
    timan = {"id": "TIMAN", "family": "g", "params": {"k": 1, "m": 1, "p": 3, "q": 1}}
    assert main(["verify", str(_suite_file(tmp_path, timan)), "--out", str(tmp_path / "o"), "--no-plots"]) == 1
    assert "TIMAN: VIOLATION" in capsys.readouterr().out


def test_verify_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("version: '9'\nfamilies: {}\ncases: []\n")
    assert main(["verify", str(bad)]) == 2
    assert capsys.readouterr().err.startswith("error: invalid run config")


def test_schema_command(capsys):
    assert main(["schema"]) == 0
    assert "cases" in json.loads(capsys.readouterr().out)["properties"]


def test_metrics_file(indicator_csv, tmp_path):
    """--metrics-file dumps the registry after the command."""
    pytest.importorskip("prometheus_client")
    path = tmp_path / "metrics.prom"
    assert main(["norm", "Lebesgue(p=2)", str(indicator_csv), "--metrics-file", str(path)]) == 0
    assert "smoothlab_norm_evaluations_total" in path.read_text()

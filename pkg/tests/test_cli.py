import csv
import json
import os

import numpy as np
import pytest

from walras_equilibrium.cli import EXIT_CONVERGED, EXIT_ERROR, EXIT_MAX_ITER, main, parse_start
from walras_equilibrium.economy_io import list_fixtures

SYMMETRIC_START = ["--start", "0.12,0.56,0.32"]


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for variable in [name for name in os.environ if name.startswith("WALRAS_")]:
        monkeypatch.delenv(variable)


def test_solve_writes_reports(tmp_path, capsys):
    trajectory = tmp_path / "trajectory.csv"
    summary = tmp_path / "summary.json"
    code = main(["solve", "symmetric", *SYMMETRIC_START, "--trajectory", str(trajectory), "--summary", str(summary)])
    assert code == EXIT_CONVERGED

    out = capsys.readouterr().out
    assert out.startswith("Status: Converged after ")
    assert "Prices (x100):" in out
    assert "p0: g1=33.33, g2=33.33, g3=33.33" in out

    with open(trajectory, newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0][:5] == ["nu", "r", "residual", "W_value", "Waug_value"]
    assert float(rows[-1][2]) <= 1e-6

    document = json.loads(summary.read_text())
    assert document["status"] == "Converged"
    assert document["iterations"] == len(rows) - 1
    np.testing.assert_allclose(document["prices"]["p0"], np.full(3, 1 / 3), atol=1e-5)


def test_trajectory_is_reproducible(tmp_path):
    paths = [tmp_path / "first.csv", tmp_path / "second.csv"]
    for path in paths:
        assert main(["-q", "solve", "symmetric", *SYMMETRIC_START, "--trajectory", str(path)]) == EXIT_CONVERGED
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_iteration_limit_exit_code(capsys):
    code = main(["solve", "symmetric", *SYMMETRIC_START, "--epsilon", "1e-14", "--max-iters", "2"])
    assert code == EXIT_MAX_ITER
    assert "Status: MaxIter after 2 iterations" in capsys.readouterr().out


def test_economy_path_is_accepted(tmp_path, capsys):
    assert main(["fixtures", "--export", str(tmp_path)]) == 0
    assert main(["validate", str(tmp_path / "scarf.json")]) == 0
    assert "scarf: valid exchange economy with 10 goods, 5 agents" in capsys.readouterr().out


def test_validate_fixture(capsys):
    assert main(["validate", "returns_stochastic"]) == 0
    assert "valid stochastic economy with 7 goods" in capsys.readouterr().out


def test_invalid_economy_file(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"model": "exchange", "goods": ["x"], "agents": [{"e0": [1.0]}]}', encoding="utf-8")
    assert main(["solve", str(path)]) == EXIT_ERROR
    err = capsys.readouterr().err
    assert f"Invalid economy {path}:" in err
    assert "agents[0].utility0" in err


def test_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "absent.json")]) == EXIT_ERROR


def test_invalid_option_value(capsys):
    assert main(["solve", "symmetric", "--delta", "0.5"]) == EXIT_ERROR
    assert "Error:" in capsys.readouterr().err


def test_recourse(capsys):
    assert main(["recourse", "two_stage_storage"]) == 0
    out = capsys.readouterr().out
    assert "farmer: ok" in out and "weaver: ok" in out


def test_fixtures_listing(capsys):
    assert main(["fixtures"]) == 0
    assert capsys.readouterr().out.split() == list_fixtures()


def test_no_command():
    assert main([]) == EXIT_ERROR


@pytest.mark.parametrize(
    "value, expected",
    [("centroid", "centroid"), ("random", "random"), ("1,2, 3", [1.0, 2.0, 3.0])],
)
def test_parse_start(value, expected):
    assert parse_start(value) == expected


def test_parse_start_rejects_words():
    with pytest.raises(ValueError, match="--start"):
        parse_start("middle")


@pytest.mark.slow
def test_scarf_prices(tmp_path):
    summary = tmp_path / "scarf.json"
    assert main(["-q", "solve", "scarf", "--epsilon", "1e-2", "--summary", str(summary)]) == EXIT_CONVERGED
    prices = json.loads(summary.read_text())["prices_x100"]["p0"]
    published = [18.4, 11.0, 9.9, 4.4, 12.5, 7.7, 11.7, 10.2, 9.9, 4.3]
    np.testing.assert_allclose(prices, published, atol=0.5)

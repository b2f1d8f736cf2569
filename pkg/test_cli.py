import importlib
import json

import pytest

import config as settings
from cli import build_parser, config_from_args, run
from models import RunConfig


def _rows(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_config_from_args():
    args = build_parser().parse_args(["chart", "--A", "0,1", "--B", "range:10:20:3", "--mu", "2"])
    config = config_from_args(args)
    assert isinstance(config, RunConfig)
    assert config.A == [0.0, 1.0]
    assert config.B == [10.0, 15.0, 20.0]
    assert config.mu == [2]
    assert json.loads(config.echo())["command"] == "chart"


@pytest.mark.parametrize("argv", [
    ["chart", "--A", ""],
    ["chart", "--B", "-1"],
    ["compare", "--mu", "-1"],
    ["chart", "--sector", "sideways"],
    ["integrands", "--order", "11"],
])
def test_invalid_configuration_exits_with_2(argv, tmp_path):
    assert run(argv + ["--out", str(tmp_path / "out.csv")]) == 2


def test_shallow_well_under_strict_exits_with_4(tmp_path):
    assert run(["compare", "--B", "4", "--strict", "--out", str(tmp_path / "out.csv")]) == 4


def test_chart_is_deterministic(tmp_path):
    path = tmp_path / "chart.csv"
    argv = ["chart", "--A", "0,1", "--B", "20", "--n-max", "2", "--out", str(path)]
    assert run(argv + ["--threads", "1"]) == 0
    first = path.read_text()
    assert run(argv + ["--threads", "1"]) == 0
    assert path.read_text() == first

    assert run(argv + ["--threads", "3"]) == 0
    assert _rows(path.read_text()) == _rows(first)
    assert _rows(first)[0] == "A,B,n,a,b"
    assert len(_rows(first)) == 1 + 2 * 3


def test_chart_at_a_floquet_exponent(tmp_path):
    path = tmp_path / "floquet.json"
    assert run(["chart", "--B", "1", "--sector", "0.3", "--n-max", "2", "--format", "json",
                "--out", str(path)]) == 0
    results = json.loads(path.read_text())["results"]
    assert [row["level"] for row in results] == [0, 1, 2]
    assert all(row["nu"] == pytest.approx(0.3) for row in results)


def test_compare_reports_every_order(tmp_path):
    path = tmp_path / "compare.json"
    assert run(["compare", "--B", "2500", "--order", "2", "--format", "json", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    assert [row["order"] for row in data["results"]] == [0, 1, 2]
    assert data["metadata"]["orders"] == {"series": 2}
    assert data["results"][-1]["error"] < data["results"][0]["error"]


def test_tunneling_reports_the_gap_ratio(tmp_path):
    path = tmp_path / "tunneling.json"
    assert run(["tunneling", "--B", "400", "--action", "semiclassical", "--format", "json",
                "--out", str(path)]) == 0
    row = json.loads(path.read_text())["results"][0]
    assert row["action"] == "semiclassical"
    assert 0.5 <= row["gap_ratio"] <= 2.0


def test_mathieu_rows(tmp_path):
    path = tmp_path / "mathieu.json"
    assert run(["mathieu", "--B", "4", "--n-max", "1", "--format", "json", "--out", str(path)]) == 0
    rows = json.loads(path.read_text())["results"]
    assert [row["n"] for row in rows] == [0, 1]
    for row in rows:
        assert row["h"] == pytest.approx(1.0)
        assert row["oracle_a"] == pytest.approx(row["scipy_a"], abs=1e-7)


def test_wavefunction_dump(tmp_path):
    path = tmp_path / "psi.json"
    assert run(["wavefunction", "--B", "400", "--samples", "41", "--format", "json", "--out", str(path)]) == 0
    rows = json.loads(path.read_text())["results"]
    assert len(rows) == 41
    assert rows[0]["region"] == "well" and rows[0]["psi_barrier"] is None
    assert rows[20]["region"] == "barrier" and rows[20]["psi_well"] is None
    assert {row["region"] for row in rows} == {"well", "overlap", "barrier"}
    assert all(row["estimate"] >= 0.0 for row in rows)


def test_wavefunction_csv_carries_the_estimate_column(tmp_path):
    path = tmp_path / "psi.csv"
    assert run(["wavefunction", "--B", "400", "--samples", "11", "--out", str(path)]) == 0
    header, *rows = _rows(path.read_text())
    columns = header.split(",")
    assert columns[-1] == "estimate"
    assert len(rows) == 11
    assert all(float(row.split(",")[-1]) >= 0.0 for row in rows)


def test_integrands_are_written_as_json(tmp_path):
    path = tmp_path / "integrands.csv"
    assert run(["integrands", "--order", "2", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    assert [entry["l"] for entry in data["results"]["orders"]] == [-1, 0, 1, 2]


def test_result_constants_ignore_the_environment(monkeypatch):
    monkeypatch.setenv("KAPITZA_TUNNELING_ACTION", "semiclassical")
    monkeypatch.setenv("KAPITZA_DEEP_WELL_EPSILON", "5")
    monkeypatch.setenv("KAPITZA_MAX_RICCATI_ORDER", "3")
    reloaded = importlib.reload(settings)
    try:
        assert reloaded.TUNNELING_ACTION == "leading"
        assert reloaded.DEEP_WELL_EPSILON == 0.1
        assert reloaded.MAX_RICCATI_ORDER == 9
    finally:
        monkeypatch.undo()
        importlib.reload(settings)


def test_tunneling_action_is_echoed_in_the_metadata(tmp_path):
    path = tmp_path / "tunneling.json"
    assert run(["tunneling", "--B", "100", "--action", "per_well", "--format", "json", "--out", str(path)]) == 0
    metadata = json.loads(path.read_text())["metadata"]
    assert metadata["orders"]["action"] == "per_well"
    assert json.loads(metadata["config"])["action"] == "per_well"

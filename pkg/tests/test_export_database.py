import json
from fractions import Fraction

import pytest

from database.operations import ExperimentRunOperations, SystemLogOperations
from utils.export import ExportManager, dumps_canonical, pattern_rows, to_jsonable
from utils.helpers import INF


def test_to_jsonable():
    data = {1: Fraction(1, 4), "b": [INF, 2, 0.5], "c": {3, 1, 2}, "d": (True, None)}
    assert to_jsonable(data) == {"1": "1/4", "b": ["inf", 2, 0.5], "c": [1, 2, 3], "d": [True, None]}
    with pytest.raises(TypeError):
        to_jsonable(object())


def test_canonical_dump_is_key_order_independent():
    assert dumps_canonical({"b": 1, "a": Fraction(1, 2)}) == dumps_canonical({"a": Fraction(1, 2), "b": 1})
    assert dumps_canonical({}).endswith("\n")


def test_write_result_keeps_volatile_fields_in_the_sidecar(tmp_path):
    manager = ExportManager(tmp_path / "exports")
    path = tmp_path / "out" / "result.json"
    manager.write_result({"value": Fraction(5, 4)}, path, run_id="RUN1", command="solve")
    assert json.loads(path.read_text()) == {"value": "5/4"}
    meta = json.loads((tmp_path / "out" / "result.json.meta.json").read_text())
    assert meta["run_id"] == "RUN1"
    assert meta["command"] == "solve"
    assert "written_at" in meta


def test_render_table():
    text = ExportManager.render_table([{"T": 4, "ratio": Fraction(8, 5)}, {"T": 8, "ratio": Fraction(2)}])
    lines = text.splitlines()
    assert lines[0].split() == ["T", "ratio"]
    assert "8/5 (~1.6)" in lines[1]
    assert lines[2].split() == ["8", "2"]
    assert ExportManager.render_table([]) == "(no rows)"


def test_spreadsheet_exports(tmp_path):
    manager = ExportManager(tmp_path)
    rows = [{"T": 4, "price": Fraction(8, 5)}]
    xlsx = manager.export_to_excel(rows, "sweep.xlsx")
    csv = manager.export_to_csv(rows, "sweep.csv")
    assert xlsx == str(tmp_path / "sweep.xlsx")
    assert (tmp_path / "sweep.xlsx").exists()
    assert (tmp_path / "sweep.csv").read_text().splitlines() == ["T,price", "4,8/5"]


def test_plot_and_pattern_rows(tmp_path):
    patterns = {"undirected": {0: Fraction(0), 1: Fraction(1)}, "best": {0: Fraction(0), 1: Fraction(1, 2)}}
    assert pattern_rows(patterns) == [
        {"theta": 0, "undirected": 0, "best": 0},
        {"theta": 1, "undirected": 1, "best": Fraction(1, 2)},
    ]
    path = ExportManager(tmp_path).plot_arrival_patterns(patterns, tmp_path / "pattern.png")
    assert path is not None
    assert (tmp_path / "pattern.png").stat().st_size > 0


def test_run_lifecycle(db_path):
    ok, _ = ExperimentRunOperations.start_run("RUN1", "solve", target="fig1", parameters={"T": 4})
    assert ok
    ok, message = ExperimentRunOperations.start_run("RUN1", "solve")
    assert not ok
    assert message == "Run ID already exists"

    ok, _ = ExperimentRunOperations.finish_run("RUN1", "completed", 0, value="2")
    assert ok
    run = ExperimentRunOperations.get_run("RUN1")
    assert run.status == "completed"
    assert run.value == "2"
    assert json.loads(run.parameters) == {"T": 4}
    assert run.finished_at is not None

    assert ExperimentRunOperations.finish_run("missing", "completed", 0) == (False, "Run not found")


def test_recent_runs_filter_by_command(db_path):
    ExperimentRunOperations.start_run("A", "solve")
    ExperimentRunOperations.start_run("B", "orient")
    ExperimentRunOperations.start_run("C", "solve")
    assert {r.run_id for r in ExperimentRunOperations.get_recent_runs(command="solve")} == {"A", "C"}
    assert len(ExperimentRunOperations.get_recent_runs(limit=2)) == 2


def test_system_log(db_path):
    SystemLogOperations.log("WARNING", "app", "gap does not hold", run_id="RUN1")
    logs = SystemLogOperations.get_recent_logs()
    assert len(logs) == 1
    assert logs[0].level == "WARNING"
    assert logs[0].run_id == "RUN1"

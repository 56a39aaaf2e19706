import json

import pytest

import app


@pytest.fixture
def fig1_file(tmp_path):
    path = tmp_path / "fig1.json"
    assert app.main(["generate", "fig1", "--T", "4", "--out", str(path), "--no-record"]) == 0
    return path


@pytest.fixture
def unit_tree_file(tmp_path):
    path = tmp_path / "tree.json"
    assert app.main(["generate", "unit-tree", "--k", "2", "--T", "2", "--out", str(path), "--no-record"]) == 0
    return path


def run_json(capsys, *argv):
    capsys.readouterr()
    code = app.main(list(argv) + ["--no-record"])
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith(("{", "[")) else out


def test_generate_writes_exact_capacities(fig1_file):
    data = json.loads(fig1_file.read_text())
    assert data["horizon"] == 4
    assert "1/4" in [e["capacity"] for e in data["edges"]]
    assert (fig1_file.parent / "fig1.json.meta.json").exists()


def test_generate_prints_a_summary_line_with_out(tmp_path, capsys):
    path = tmp_path / "lb.json"
    assert app.main(["generate", "flow-lb", "--T", "8", "--delta", "1/4", "--eps", "1",
                     "--out", str(path), "--no-record"]) == 0
    assert capsys.readouterr().out.startswith("generate: ")


def test_solve_maxfot(fig1_file, capsys):
    code, payload = run_json(capsys, "solve", str(fig1_file))
    assert code == 0
    assert payload["value"] == "2"
    assert payload["witness_on_gadget"] is True


def test_solve_quickest(unit_tree_file, capsys):
    code, payload = run_json(capsys, "solve", str(unit_tree_file), "--mode", "quickest")
    assert code == 0
    assert payload["time"] == 3


def test_orient_bruteforce(fig1_file, capsys):
    code, payload = run_json(capsys, "orient", str(fig1_file))
    assert code == 0
    assert payload["oriented"] == "5/4"
    assert payload["ratio"] == "8/5"
    assert payload["evaluated"] == 32


def test_orient_fixedpoint(fig1_file, capsys):
    code, payload = run_json(capsys, "orient", str(fig1_file), "--algorithm", "fixedpoint")
    assert code == 0
    assert payload["status"] == "converged"
    assert payload["certified_value"] == "5/4"
    assert payload["meets_bound"] is True


def test_orient_fixedpoint_reports_non_convergence(fig1_file, tmp_path, capsys):
    out = tmp_path / "fp.json"
    code = app.main(["orient", str(fig1_file), "--algorithm", "fixedpoint", "--max-iter", "1",
                     "--out", str(out), "--no-record"])
    assert code == 4
    assert json.loads(out.read_text())["status"] == "max-iter"


def test_orient_bicriteria(fig1_file, capsys):
    code, payload = run_json(capsys, "orient", str(fig1_file), "--algorithm", "bicriteria")
    assert code == 0
    assert payload["horizon"] == 8


def test_cap_and_validation_exit_codes(fig1_file, tmp_path, capsys):
    assert app.main(["orient", str(fig1_file), "--max-m", "2", "--no-record"]) == 3
    assert app.main(["solve", str(fig1_file), "--T", "5000", "--no-record"]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert app.main(["solve", str(bad), "--no-record"]) == 2
    assert app.main(["solve", str(tmp_path / "missing.json"), "--no-record"]) == 2
    assert app.main(["orient", str(fig1_file), "--max-m", "0", "--no-record"]) == 2
    assert "error:" in capsys.readouterr().err


def test_outputs_are_byte_identical(fig1_file, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        assert app.main(["orient", str(fig1_file), "--out", str(out), "--no-record"]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_table_output(fig1_file, capsys):
    assert app.main(["orient", str(fig1_file), "--table", "--no-record"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["undirected", "oriented", "ratio", "evaluated"]
    assert "5/4 (~1.25)" in out


def test_pattern_with_orientation_and_plot(fig1_file, tmp_path, capsys):
    best = tmp_path / "best.json"
    assert app.main(["orient", str(fig1_file), "--out", str(best), "--no-record"]) == 0
    plot = tmp_path / "pattern.png"
    code, payload = run_json(capsys, "pattern", str(fig1_file), "--orientation", str(best), "--plot", str(plot))
    assert code == 0
    assert payload["pattern"][-1] == "2"
    assert payload["oriented"]["pattern"][-1] == "5/4"
    assert plot.exists()


def test_verify_sat_quickest_from_cnf(tmp_path, capsys):
    cnf = tmp_path / "one.cnf"
    cnf.write_text("p cnf 3 1\n1 2 3 0\n")
    code, payload = run_json(capsys, "verify-reduction", "sat-quickest", "--cnf", str(cnf))
    assert code == 0
    assert payload["label"] == "YES"
    assert payload["measured"] == "2"
    assert payload["holds"] is True


def test_verify_reduction_needs_its_input(capsys):
    assert app.main(["verify-reduction", "sat-quickest", "--no-record"]) == 2


def test_price_sweep_with_excel(tmp_path, capsys):
    excel = tmp_path / "sweep.xlsx"
    code, payload = run_json(capsys, "price", "--family", "single-sink-lb", "--sweep", "T=4,delta=1/2",
                             "--excel", str(excel))
    assert code == 0
    assert payload["sweep"][0]["report"]["ratio"] == "4/3"
    assert payload["strictly_increasing"] is True
    assert excel.exists()


def test_bad_sweep_entry(capsys):
    assert app.main(["price", "--family", "fig1", "--sweep", "Q=1", "--no-record"]) == 2


def test_history_lists_recorded_runs(fig1_file, db_path, capsys):
    assert app.main(["solve", str(fig1_file)]) == 0
    assert app.main(["orient", str(fig1_file), "--max-m", "2"]) == 3
    capsys.readouterr()
    assert app.main(["history"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [(r["command"], r["status"]) for r in rows] == [("orient", "failed"), ("solve", "completed")]
    assert rows[1]["value"] == "2"


def test_eaf_experiment_with_plot(tmp_path, capsys):
    instance = tmp_path / "eaf.json"
    assert app.main(["generate", "eaf", "--U", "36", "--T", "4", "--out", str(instance), "--no-record"]) == 0
    plot = tmp_path / "eaf.png"
    code, payload = run_json(capsys, "eaf-experiment", str(instance), "--plot", str(plot))
    assert code == 0
    assert payload["reference_T"] == 4
    assert len(payload["rows"]) == 32
    assert plot.exists()


def test_price_exports_csv(tmp_path, capsys):
    csv = tmp_path / "sweep.csv"
    code, _ = run_json(capsys, "price", "--family", "single-sink-lb", "--sweep", "T=4,delta=1/2",
                       "--csv", str(csv))
    assert code == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "T,delta,undirected,oriented,ratio"
    assert lines[1] == "4,1/2,2,3/2,4/3"


def test_history_shows_one_run_and_the_logs(fig1_file, db_path, tmp_path, capsys):
    out = tmp_path / "solved.json"
    assert app.main(["solve", str(fig1_file), "--out", str(out)]) == 0
    run_id = json.loads((tmp_path / "solved.json.meta.json").read_text())["run_id"]
    capsys.readouterr()

    assert app.main(["history", "--run-id", run_id]) == 0
    run = json.loads(capsys.readouterr().out)
    assert (run["command"], run["status"], run["value"]) == ("solve", "completed", "2")
    assert run["result_path"] == str(out)
    assert run["parameters"]["mode"] == "maxfot"

    assert app.main(["history", "--logs"]) == 0
    logs = json.loads(capsys.readouterr().out)
    assert [(entry["module"], entry["run_id"]) for entry in logs] == [("solve", run_id)]
    assert logs[0]["message"] == "completed: 2"

    assert app.main(["history", "--run-id", "missing"]) == 2

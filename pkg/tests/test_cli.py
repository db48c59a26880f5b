import csv
import io
import json
import subprocess
import sys

import pytest

from flagkneser.cli import (
    EXIT_CONSISTENCY,
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_USAGE,
    ResultCache,
    ResultRecord,
    load_config,
    main,
    report_rows,
    RunConfig,
)
from flagkneser.graph import read_edge_list


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def run_json(*argv):
    code, text = run(*argv, "--format", "json")
    return code, json.loads(text) if text else None


def test_graph_command(tmp_path):
    code, res = run_json("graph", "-n", "8", "-T", "2,5")
    assert code == EXIT_OK
    assert res["verdict"]["vertices"] == "560" and res["verdict"]["degree"] == "9"
    assert set(res) == {"params", "verdict", "provenance", "support", "version"}
    _, res = run_json("graph", "-n", "6", "-T", "2,4")
    assert res["verdict"]["bipartite"] is True
    path = tmp_path / "g.dimacs"
    _, res = run_json("graph", "-n", "2", "-T", "1", "--export", str(path))
    assert res["verdict"]["vertices"] == "2" and res["verdict"]["edges"] == "1"
    assert read_edge_list(path.read_text()) == (2, [(0, 1)])


def test_alpha_modes():
    code, res = run_json("alpha", "-n", "6", "-T", "1,4", "--mode", "both")
    assert code == EXIT_OK and res["verdict"]["value"] == "22" and res["verdict"]["agree"] is True
    code, res = run_json("alpha", "-n", "8", "-T", "2,5", "--mode", "dispatch")
    assert code == EXIT_OK
    assert (res["verdict"]["lower"], res["verdict"]["upper"]) == ("230", "240")
    code, res = run_json("alpha", "-n", "5", "-T", "1,3", "--mode", "solve")
    assert res["verdict"]["value"] == "12"


def test_alpha_budget_exit_code():
    code, res = run_json("alpha", "-n", "7", "-T", "2,4", "--mode", "solve", "--max-nodes", "20")
    assert code == EXIT_RESOURCE
    assert res["verdict"]["status"] == "interval"
    assert int(res["verdict"]["lower"]) <= 90 <= int(res["verdict"]["upper"])


def test_family_command():
    _, res = run_json("family", "-n", "8", "-a", "2", "-b", "5", "-i", "1")
    assert res["verdict"]["size"] == "230" and res["verdict"]["maximal"] is True
    _, res = run_json("family", "-n", "7", "-a", "2", "-b", "4", "-i", "2")
    assert res["verdict"]["maximal"] is False
    assert res["verdict"]["barred_superset_size"] == "90"
    _, res = run_json("family", "-n", "6", "-a", "1", "-b", "4", "-i", "0")
    assert res["verdict"]["size"] == "20"
    code, _ = run("family", "-n", "8", "-a", "2", "-b", "6", "-i", "0")
    assert code == EXIT_USAGE


def test_classify_command():
    _, res = run_json("classify", "-n", "5", "-T", "1,3")
    assert res["verdict"]["classes"] == "3" and res["verdict"]["maximum_sets"] == "45"
    assert res["support"]["classes"][0]["representative"][0].startswith("({")
    _, res = run_json("classify", "-n", "2", "-T", "1")
    assert (res["verdict"]["alpha"], res["verdict"]["maximum_sets"], res["verdict"]["classes"]) == (
        "1", "2", "1")


def test_bounds_command():
    _, res = run_json("bounds", "-n", "8", "-T", "2,5")
    by_name = {b["name"]: b for b in res["support"]["bounds"]}
    assert by_name["hoffman"]["value"] == "257"
    assert by_name["deletion"]["value"] == "240"
    assert by_name["ekr"]["applicable"] is False


def test_usage_and_resource_errors():
    assert run("graph", "-n", "3", "-T", "3")[0] == EXIT_USAGE
    assert run("graph", "-n", "20", "-T", "1,10")[0] == EXIT_RESOURCE
    with pytest.raises(SystemExit) as exc:
        main(["alpha", "-n", "5"])
    assert exc.value.code == 2


def test_selftest():
    code, res = run_json("selftest")
    assert code == EXIT_OK and res["verdict"]["passed"] is True


def test_cache_round_trip_is_byte_identical(tmp_path):
    rec = ResultRecord(8, (2, 5), "alpha-dispatch", "abc", {"verdict": {"lower": "230"}}, 1.5)
    text = rec.to_json()
    assert ResultRecord.from_json(text).to_json() == text
    cache = ResultCache(tmp_path)
    path = cache.put(rec)
    assert path.read_text() == text
    assert cache.get(8, (2, 5), "alpha-dispatch", "abc").to_json() == text
    assert not list(path.parent.glob(".tmp-*"))


def test_cache_hit_matches_recomputation(tmp_path):
    args = ("alpha", "-n", "6", "-T", "1,4", "--mode", "both", "--cache-dir", str(tmp_path))
    first = run(*args, "--format", "json")
    files = list(tmp_path.rglob("*.json"))
    assert len(files) == 1
    second = run(*args, "--format", "json")
    fresh = run("alpha", "-n", "6", "-T", "1,4", "--mode", "both", "--format", "json")
    assert first == second
    assert json.loads(first[1])["verdict"] == json.loads(fresh[1])["verdict"]


def test_config_file_and_digest(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("# budgets\nbudget_seconds = 30\nworkers=2\neig_tol=1e-10\n")
    cfg = load_config(cfg_path)
    assert cfg.budget_seconds == 30.0 and cfg.workers == 2
    assert cfg.digest() != RunConfig().digest()
    _, res = run_json("graph", "-n", "5", "-T", "1,3", "--config", str(cfg_path))
    assert res["provenance"]["config_digest"] == cfg.digest()
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run("graph", "-n", "5", "-T", "1,3", "--config", str(bad))[0] == EXIT_USAGE


def test_determinism():
    assert run("bounds", "-n", "7", "-T", "2,4", "--format", "json") == run(
        "bounds", "-n", "7", "-T", "2,4", "--format", "json")


def test_report(tmp_path):
    code, text = run("report", "--max-n", "6", "--out-dir", str(tmp_path), "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == sum(2 ** (n - 1) - 1 for n in range(2, 7))
    assert {r["status"] for r in rows} == {"exact"}
    assert (tmp_path / "report.csv").exists() and (tmp_path / "report.json").exists()
    table = {(r["n"], r["T"]): r for r in report_rows(6, RunConfig())}
    assert table[(5, "{1,3}")]["lower"] == 12 and table[(5, "{1,3}")]["settled_by"] == "cycle"
    assert table[(6, "{1,4}")]["lower"] == 22
    assert all(r["status"] == "exact" for r in table.values())


def test_report_interval_row():
    rows = {(r["n"], r["T"]): r for r in report_rows(8, RunConfig(graph_cap=0))}
    row = rows[(8, "{2,5}")]
    assert (row["status"], row["lower"], row["upper"]) == ("interval", 230, 240)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "flagkneser.cli", "graph", "-n", "4", "-T", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "verdict.vertices" in proc.stdout


def test_csv_and_text_formats():
    code, text = run("graph", "-n", "4", "-T", "2", "--format", "csv")
    assert text.startswith("field,value\n") and "verdict.vertices,6" in text
    assert "verdict.degree" in run("graph", "-n", "4", "-T", "2")[1]


def test_consistency_exit_code(monkeypatch):
    import flagkneser.cli as cli

    def broken(*a, **k):
        raise cli.ConsistencyError("forced")

    monkeypatch.setattr(cli, "cmd_graph", broken)
    monkeypatch.setitem(cli.COMMANDS, "graph", broken)
    assert run("graph", "-n", "4", "-T", "2")[0] == EXIT_CONSISTENCY

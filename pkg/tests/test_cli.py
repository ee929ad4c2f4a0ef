from io import StringIO

import pytest

from core.exact import point
from core.models import EdgeSpec, NodeSpec
from interfaces.cli import EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, main
from services.instance_kit import fr_trap, save
from storage.instance_file import InstanceFile, loads
from storage.records_exporter import parse_records


def run(*argv):
    out = StringIO()
    code = main(list(argv), stream=out)
    return code, out.getvalue()


@pytest.fixture
def trap_file(tmp_path):
    path = tmp_path / "trap.yaml"
    save(fr_trap(), str(path))
    return str(path)


@pytest.fixture
def crossing_file(tmp_path):
    positions = {0: point(0, 0), 1: point(2, 2), 2: point(0, 2), 3: point(2, 0)}
    edges = [EdgeSpec(u, v, ((positions[u], positions[v]),)) for u, v in [(0, 1), (2, 3), (0, 2)]]
    instance = InstanceFile(nodes=[NodeSpec(n, p) for n, p in positions.items()], edges=edges)
    path = tmp_path / "crossing.yaml"
    save(instance, str(path))
    return str(path)


def test_gen_to_stdout_is_a_loadable_instance():
    code, text = run("gen", "--kind", "fig2")
    assert code == EXIT_OK
    assert loads(text).genus == 4


def test_gen_writes_the_out_file(tmp_path):
    path = tmp_path / "random.yaml"
    code, text = run("gen", "--genus", "1", "--nodes", "10", "--seed", "4", "--out", str(path),
                     "--format", "records")
    assert code == EXIT_OK
    (record,) = parse_records(text)
    assert record["generated"] == "true"
    assert record["nodes"] == "10"
    assert loads(path.read_text(encoding="utf-8")).seed == 4


def test_validate_reports_counts(trap_file):
    code, text = run("validate", "--instance", trap_file, "--format", "records")
    assert code == EXIT_OK
    (record,) = parse_records(text)
    assert record["valid"] == "true"
    assert (record["border_walks"], record["regions"], record["ntbws"]) == ("2", "1", "2")


def test_validate_rejects_crossing_edges(crossing_file):
    code, text = run("validate", "--instance", crossing_file, "--format", "records")
    assert code == EXIT_NEGATIVE
    (record,) = parse_records(text)
    assert record["valid"] == "false"
    assert record["error"] == "EdgeCrossing"
    assert record["witness"]


def test_gfr_delivers_on_the_trap(trap_file):
    code, text = run("route", "--instance", trap_file, "--algo", "gfr", "--format", "records")
    assert code == EXIT_OK
    (record,) = parse_records(text)
    assert record["outcome"] == "Delivered"
    assert record["traversal_count"] == "11"


def test_classic_fr_loops_on_the_trap(trap_file):
    code, text = run("route", "--instance", trap_file, "--algo", "fr")
    assert code == EXIT_NEGATIVE
    assert "LoopDetected" in text


def test_msfr_stops_on_the_trap(trap_file):
    code, text = run("route", "--instance", trap_file, "--algo", "msfr", "--format", "records")
    assert code == EXIT_NEGATIVE
    record = parse_records(text)[0]
    assert record["outcome"] == "StoppedAtNTBW"
    assert record["stop_walk"] == "0,2,6,7,4"


def test_route_trace_lines(trap_file):
    code, text = run("route", "--instance", trap_file, "--trace")
    assert code == EXIT_OK
    steps = [line for line in text.splitlines() if line.startswith("step=")]
    assert len(steps) == 11
    assert steps[0].startswith("step=1 node=3 edge=3->1 phase=MSFR")


def test_verify_passes_on_the_trap(trap_file):
    code, text = run("verify", "--instance", trap_file, "--format", "records")
    assert code == EXIT_OK
    records = parse_records(text)
    assert {r["check_id"] for r in records} >= {"proposition", "gamma_star", "gfr_delivers"}
    assert len({r["instance_hash"] for r in records}) == 1


def test_verify_corpus_flags_the_invalid_instance(tmp_path, trap_file, crossing_file):
    code, text = run("verify", "--corpus", str(tmp_path), "--format", "records")
    assert code == EXIT_NEGATIVE
    failed = [r for r in parse_records(text) if r["check_id"] == "valid_instance"]
    assert len(failed) == 1
    assert failed[0]["passed"] == "false"
    assert "EdgeCrossing" in failed[0]["witness"]


def test_verify_empty_corpus_is_a_usage_error(tmp_path):
    code, _ = run("verify", "--corpus", str(tmp_path))
    assert code == EXIT_USAGE


def test_bench_small_table(tmp_path):
    csv_path = tmp_path / "bench.csv"
    code, text = run("bench", "--genus-list", "0,1", "--size-list", "8", "--seed", "3",
                     "--csv", str(csv_path), "--format", "records")
    assert code == EXIT_OK
    records = parse_records(text)
    rows = [r for r in records if "traversals" in r]
    assert [r["genus"] for r in rows] == ["0", "1"]
    assert records[-1]["summary"] == "bench"
    assert records[-1]["all_delivered"] == "true"
    assert len(csv_path.read_text().splitlines()) == 3


def test_render_writes_svg(tmp_path, trap_file):
    out = tmp_path / "trap.svg"
    code, _ = run("render", "--instance", trap_file, "--trace", "--out", str(out))
    assert code == EXIT_OK
    assert b"<svg" in out.read_bytes()


def test_unparseable_file_is_a_usage_error(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("format_version: 1\ngraph: [unclosed\n", encoding="utf-8")
    code, _ = run("validate", "--instance", str(path))
    assert code == EXIT_USAGE


def test_missing_file_is_a_usage_error(tmp_path):
    code, _ = run("route", "--instance", str(tmp_path / "absent.yaml"))
    assert code == EXIT_USAGE


@pytest.mark.parametrize("argv", [[], ["route"], ["route", "--instance", "x", "--algo", "bfs"],
                                  ["bench", "--size-list", "a,b"]])
def test_usage_errors(argv):
    code, _ = run(*argv)
    assert code == EXIT_USAGE


def test_route_rejects_an_invalid_drawing(crossing_file):
    code, text = run("route", "--instance", crossing_file, "--format", "records")
    assert code == EXIT_USAGE
    (record,) = parse_records(text)
    assert record["error"] == "EdgeCrossing"


def test_render_rejects_an_invalid_drawing(tmp_path, crossing_file):
    code, _ = run("render", "--instance", crossing_file, "--out", str(tmp_path / "crossing.svg"))
    assert code == EXIT_USAGE
    assert not (tmp_path / "crossing.svg").exists()


def test_exhausted_step_budget_is_a_negative_result(tmp_path, trap_file, monkeypatch):
    monkeypatch.delenv("GFRSIM_STEP_BUDGET_FACTOR", raising=False)
    config = tmp_path / "tight.yaml"
    config.write_text("step_budget_factor: 0\n", encoding="utf-8")
    code, text = run("route", "--instance", trap_file, "--algo", "gfr", "--config", str(config),
                     "--format", "records")
    assert code == EXIT_NEGATIVE
    (record,) = parse_records(text)
    assert record["outcome"] == "Failed"
    assert record["error"] == "StepBudgetExceeded"

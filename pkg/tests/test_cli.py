import json

import pytest

from freelab import run_command
from services.spaces import build_circle
from utils.serialization import write_space, write_system


def _run(argv, capsys):
    code = run_command(argv)
    captured = capsys.readouterr()
    return code, captured


@pytest.fixture
def c4_files(tmp_path, c4_system):
    space, system = tmp_path / "c4.json", tmp_path / "c4_system.json"
    write_space(c4_system.space, str(space))
    write_system(c4_system, str(system))
    return str(space), str(system)


def test_space_circle(capsys):
    code, out = _run(["space", "circle", "--n", "4"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["points"] == ["x0", "x1", "x2", "x3", "x4"]
    assert data["dist"][0][1] == "4"


def test_space_report_can_be_read_back(tmp_path, capsys):
    code, _ = _run(["--out", str(tmp_path), "space", "circle", "--n", "6"], capsys)
    assert code == 0
    code, out = _run(["space", "validate", "--file", str(tmp_path / "space_circle.json")], capsys)
    assert code == 0
    assert json.loads(out.out)["params"] == {"n": 6}


def test_bad_triangle_fails_with_message(tmp_path, capsys):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps({"points": ["0", "a", "b"], "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}))
    code, out = _run(["norm", "--space", str(path), "--measure", "a:1"], capsys)
    assert code == 1
    assert "triangle" in out.err
    code, out = _run(["space", "validate", "--file", str(path)], capsys)
    assert code == 1
    assert json.loads(out.out)["violations"][0]["kind"] == "triangle"


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["space", "circle", "--n", "4", "--bogus"],
        ["space", "circle"],
        ["space", "circle", "--n", "four"],
        ["--log-level", "loud", "space", "circle", "--n", "4"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    code, out = _run(argv, capsys)
    assert code == 1
    assert "freelab:" in out.err


def test_norm_reports_primal_dual_and_witness(tmp_path, capsys):
    path = tmp_path / "c4.json"
    write_space(build_circle(4), str(path))
    code, out = _run(["norm", "--space", str(path), "--measure", "x1:1,x3:-1"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["primal"] == data["dual"] == "2"
    assert data["witness"]["x0"] == "0"


def test_system_and_basis_commands(c4_files, capsys):
    space, system = c4_files
    code, out = _run(["system", "lip", "--space", space, "--system", system], capsys)
    assert code == 0
    assert json.loads(out.out)["lip"] == ["0", "1", "1", "2", "1"]
    code, out = _run(["system", "chain", "--space", space, "--system", system, "--point", "x3"], capsys)
    assert json.loads(out.out)["chain"] == ["x0", "x1", "x2", "x3"]
    code, out = _run(["basis", "const", "--space", space, "--system", system], capsys)
    assert json.loads(out.out)["value"] == "2"
    code, out = _run(["basis", "uncond", "--space", space, "--system", system, "--exhaustive"], capsys)
    data = json.loads(out.out)
    assert (code, data["value"], data["eps"]) == (0, "3", [1, 1, 1, -1])


def test_system_validate_flags_bad_phi_rows(tmp_path, c4_files, capsys):
    space, _ = c4_files
    labels = ["x0", "x1", "x2", "x3", "x4"]
    phi = [
        ["x0"] * 5,
        ["x0", "x1", "x1", "x1", "x1"],
        ["x0", "x1", "x2", "x0", "x1"],
        ["x0", "x1", "x2", "x3", "x1"],
        labels,
    ]
    path = tmp_path / "bad_system.json"
    path.write_text(json.dumps({"order": labels, "phi": phi}))
    code, out = _run(["system", "validate", "--space", space, "--system", str(path)], capsys)
    assert code == 1
    assert "commutation" in out.err


def test_search_counterexample_exits_zero(capsys):
    code, out = _run(["search", "circle", "--n", "12", "--target", "5"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["outcome"] == "counterexample"
    assert data["system"]["order"][0] == "x0"


def test_search_budget_exhaustion_exits_two(tmp_path, capsys):
    checkpoint = tmp_path / "frontier.json"
    argv = ["search", "circle", "--n", "12", "--budget-nodes", "1", "--checkpoint", str(checkpoint)]
    code, out = _run(argv, capsys)
    assert code == 2
    assert json.loads(out.out)["outcome"] == "indeterminate"
    assert json.loads(checkpoint.read_text())["n"] == 12
    code, out = _run(["search", "circle", "--n", "10", "--resume", str(checkpoint)], capsys)
    assert code == 1
    assert "n=12" in out.err


def test_search_heuristic(capsys):
    code, out = _run(["search", "heuristic", "--n", "4", "--strategy", "peel-one-arc"], capsys)
    assert code == 0
    assert json.loads(out.out)["achieved"] == "2"
    code, _ = _run(["search", "heuristic", "--n", "4", "--strategy", "spiral"], capsys)
    assert code == 1


def test_extensional_verify_range(capsys):
    code, out = _run(["extensional", "verify", "--k", "2", "--i-range", "0..6", "--samples", "3"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["passed"]
    assert [row["rank"] for row in data["rows"]] == list(range(7))


def test_extensional_apply(tmp_path, capsys):
    f = tmp_path / "f.json"
    f.write_text(json.dumps({"c2_1": 0, "c2_2": 15}))
    code, out = _run(["extensional", "apply", "--k", "2", "--i", "6", "--f", str(f)], capsys)
    assert code == 0
    assert json.loads(out.out)["values"]["c2_5"] == "12"


def test_cor33_experiment(capsys):
    code, out = _run(["experiment", "cor33", "--k", "2"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["passed"]
    assert len(data["rows"]) == 5
    assert "numpy" in data["versions"]


def test_out_writes_json_and_csv(tmp_path, c4_files, capsys):
    space, system = c4_files
    out_dir = tmp_path / "reports"
    code, _ = _run(["--out", str(out_dir), "system", "lip", "--space", space, "--system", system], capsys)
    assert code == 0
    report = json.loads((out_dir / "system_lip.json").read_text())
    assert report["max"] == "2"
    rows = (out_dir / "system_lip.csv").read_text().splitlines()
    assert rows[0] == "i,lip"
    assert rows[4] == "3,2"


def test_log_level_is_case_insensitive(capsys):
    code, _ = _run(["--log-level", "error", "space", "circle", "--n", "3"], capsys)
    assert code == 0


def test_bad_log_level_from_environment_exits_one(monkeypatch, capsys):
    monkeypatch.setattr("utils.cli.FREELAB_LOG_LEVEL", "chatty")
    code, out = _run(["space", "circle", "--n", "3"], capsys)
    assert code == 1
    assert "log level" in out.err

import json
import math

import pytest
from click.testing import CliRunner

from mcpgap.cli import cli


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(cli, [str(a) for a in args])

    return invoke


def test_compute_flat(run):
    res = run("compute", "--K", 0, "--N", 5, "--D", 1, "--n", 1024)
    assert res.exit_code == 0, res.output
    out = json.loads(res.output)
    c = 25 * 2 ** -4
    assert c / 4 <= out["value"] <= math.pi ** 2 * c
    assert out["method"] == "direct"
    for key in ("intro_lower_bound", "closed_form_bounds", "sturm_constant", "von_renesse_constant"):
        assert key in out


def test_compute_at_bonnet_myers_and_capping(run):
    at = json.loads(run("compute", "--K", 1, "--N", 2, "--D", math.pi, "--n", 256).output)
    assert at["value"] <= 2.0
    assert at["model"]["value"] == 2.0
    capped = json.loads(run("compute", "--K", 1, "--N", 2, "--D", 10, "--n", 256).output)
    assert capped["value"] == at["value"]
    assert capped["D_effective"] == pytest.approx(math.pi)


def test_numbers_have_twelve_significant_digits(run):
    out = json.loads(run("compute", "--K", -1, "--N", 3, "--D", 2, "--n", 256).output)
    for key in ("value", "sturm_constant", "intro_lower_bound"):
        assert float(f"{out[key]:.12g}") == out[key]


def test_scan_csv_and_verdict(run):
    res = run("scan", "--K", 0, "--N", 3, "--D", 4, "--count", 16, "--n", 256)
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert lines[0] == "D_prime,lambda,scaled,error"
    assert len(lines) == 18
    assert lines[-1] == "# verdict: lambda strictly decreasing; scaled constant"
    assert all(len(line.split(",")) == 4 for line in lines[1:-1])


def test_scan_examples(run):
    res = run("scan", "--K", 1, "--N", 13, "--count", 32, "--n", 512)
    assert res.output.strip().splitlines()[-1].startswith("# verdict: lambda not monotone")
    res = run("scan", "--K", -1, "--N", 2, "--D", 5, "--count", 16, "--n", 256)
    assert "lambda strictly decreasing" in res.output.strip().splitlines()[-1]


def test_scan_json_output(run):
    out = json.loads(run("scan", "--K", 0, "--N", 2, "--D", 1, "--count", 8, "--n", 64,
                         "--output", "json").output)
    assert len(out["rows"]) == 8 and out["scaled_verdict"] == "constant"


def test_scan_requires_D_for_nonpositive_K(run):
    res = run("scan", "--K", 0, "--N", 3)
    assert res.exit_code == 2


def test_density_validate_gap_pipeline(run, tmp_path):
    res = run("density", "--K", 0, "--N", 3, "--D", 1, "--seed", 7, "--n", 128)
    assert res.exit_code == 0
    path = tmp_path / "h.json"
    path.write_text(res.output)
    data = json.loads(res.output)
    assert set(data) == {"a", "b", "n", "samples"} and data["n"] == 128
    val = json.loads(run("validate", "--K", 0, "--N", 3, "--density", path).output)
    assert val["passed"] is True
    gap = json.loads(run("gap", "--density", path).output)
    assert set(gap) == {"lambda", "error", "zero", "n"} and gap["lambda"] > 0
    both = json.loads(run("bounds", "--K", 0, "--N", 3, "--D", 1, "--density", path).output)
    assert "muckenhoupt" in both


def test_bounds_command(run):
    out = json.loads(run("bounds", "--K", 1, "--N", 3, "--D", 2).output)
    assert out["sphere_eigenvalue"] == 1.5
    assert out["closed_form_bounds"]["lower"] <= out["closed_form_bounds"]["upper"]


@pytest.mark.parametrize("args", [
    ("compute", "--K", 0, "--N", 0.5, "--D", 1),
    ("compute", "--K", 0, "--N", 2, "--D", -1),
    ("compute", "--K", 0, "--N", 2, "--D", 1, "--n", 7),
    ("gap", "--density", "/nonexistent/h.json"),
])
def test_domain_errors_exit_2_with_single_line(args, run):
    res = run(*args)
    assert res.exit_code == 2
    assert res.output.count("\n") <= 1 and res.output.startswith("error:")


def test_solver_failure_exits_3(run, monkeypatch):
    from mcpgap import cli as cli_mod
    from mcpgap.spectral import SolverError

    def boom(*a, **k):
        raise SolverError("no convergence\ndetails")

    monkeypatch.setattr(cli_mod, "sharp_poincare", boom)
    res = run("compute", "--K", 0, "--N", 2, "--D", 1)
    assert res.exit_code == 3
    assert res.output.strip() == "error: no convergence"


def test_selftest_exit_status(run, monkeypatch):
    from mcpgap import cli as cli_mod
    from mcpgap.acceptance import CriterionResult

    monkeypatch.setattr(cli_mod, "run_all",
                        lambda cfg: [CriterionResult(1, "x", True, "ok"),
                                     CriterionResult(2, "y", False, "bad")])
    res = run("selftest", "--n", 64)
    assert res.exit_code == 1
    assert "[FAIL]  2. y: bad" in res.output


def test_compute_deterministic(run):
    args = ("compute", "--K", 1, "--N", 5, "--D", 2, "--n", 128)
    assert run(*args).output == run(*args).output

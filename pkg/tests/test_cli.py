import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from seqcontract import gen_critpoints_instance, instance_to_doc
from seqcontract.cli import main

I1_DOC = {"rewards": ["0", "1"], "costs": ["1/10"], "probs": [["1/2", "1/2"]]}


@pytest.fixture
def i1_path(tmp_path):
    path = tmp_path / "i1.json"
    path.write_text(json.dumps(I1_DOC))
    return str(path)


def run_cli(capsys, *argv) -> tuple[int, dict]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else {})


class TestValidate:
    def test_valid(self, capsys, i1_path):
        code, report = run_cli(capsys, "validate", i1_path)
        assert code == 0
        assert report["valid"] is True
        assert report["outcome_order"] == [1, 2]
        assert "instance_digest" in report

    def test_row_sum_error_exits_1(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(
            json.dumps(
                {"rewards": ["0", "1"], "costs": ["1/10"], "probs": [["1/2", "1/3"]]}
            )
        )
        assert main(["validate", str(bad)]) == 1
        assert "row sum" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["validate", "/nonexistent/file.json"]) == 1


class TestSolvers:
    def test_solve_linear(self, capsys, i1_path):
        code, report = run_cli(capsys, "solve-linear", i1_path)
        assert code == 0
        assert report["alpha"] == "1/5"
        assert report["utility"] == "2/5"
        assert {c["alpha"] for c in report["candidates"]} == {"0", "1/5", "1"}

    def test_solve_general(self, capsys, i1_path):
        code, report = run_cli(capsys, "solve-general", i1_path)
        assert code == 0
        assert report["contract"]["payments"] == ["0", "1/5"]
        assert report["utility"] == "2/5"
        assert set(report["hyperplane_counts"]) == {"A1", "A2", "A3", "A4"}

    def test_eval_and_best_response(self, capsys, i1_path, tmp_path):
        contract = tmp_path / "t.json"
        contract.write_text(json.dumps({"payments": ["0", "2/5"]}))
        code, report = run_cli(capsys, "eval", i1_path, str(contract))
        assert code == 0
        assert report["utility"] == "3/10"
        code, report = run_cli(capsys, "best-response", i1_path, str(contract))
        assert code == 0
        assert report["agent_utility"] == "1/10"
        assert report["strategy"]["sigma"] == [1]

    def test_vertex_budget_exit_2(self, capsys, i1_path):
        assert main(["--budget-vertices", "2", "solve-general", i1_path]) == 2

    def test_approx_flag(self, capsys, i1_path):
        code, report = run_cli(capsys, "--approx", "solve-linear", i1_path)
        assert code == 0
        assert report["approx"]["utility"] == pytest.approx(0.4)


class TestOracleCommand:
    def test_linear_mode(self, capsys, i1_path):
        code, report = run_cli(capsys, "oracle", i1_path)
        assert code == 0
        assert report["mode"] == "linear"
        assert (report["alpha"], report["utility"]) == ("1/5", "2/5")

    def test_best_response_mode(self, capsys, i1_path, tmp_path):
        contract = tmp_path / "t.json"
        contract.write_text(json.dumps({"payments": ["0", "1/5"]}))
        code, report = run_cli(capsys, "oracle", i1_path, str(contract))
        assert code == 0
        assert report["principal_value"] == "2/5"
        assert report["best_agent_utility"] == "0"
        assert report["maximizer_count"] >= 1

    def test_grid_mode(self, capsys, i1_path):
        code, report = run_cli(capsys, "--grid-step", "1/10", "oracle", i1_path)
        assert code == 0
        assert report["mode"] == "grid"
        assert report["utility"] == "2/5"

    def test_oracle_budget_exit_2(self, capsys, i1_path):
        assert main(["--budget-oracle", "1", "oracle", i1_path]) == 2


class TestGen:
    def test_critpoints_matches_library(self, capsys):
        code, report = run_cli(capsys, "gen", "critpoints", "--m", "3")
        assert code == 0
        meta = report.pop("meta")
        assert meta["family"] == "critpoints"
        assert report == instance_to_doc(gen_critpoints_instance(3))

    def test_gen_output_is_valid_instance(self, capsys, tmp_path):
        for argv in (
            ["gen", "random", "--n", "3", "--m", "3", "--seed", "7"],
            ["gen", "gap", "--n", "4", "--eps", "1/100"],
            ["gen", "superpoly", "--n", "4", "--m", "3"],
            ["gen", "partition", "--a", "1/20,1/20,1/25,3/50"],
        ):
            code, report = run_cli(capsys, *argv)
            assert code == 0
            from seqcontract import validate_instance

            meta = report.pop("meta")
            validate_instance(report)
            assert meta["family"] == argv[1]

    def test_partition_meta_records_constants(self, capsys):
        code, report = run_cli(
            capsys, "gen", "partition", "--a", "1/20,1/20,1/25,3/50"
        )
        assert code == 0
        assert report["meta"]["epsilon"] == "1/2500"
        assert "q" in report["meta"] and "c" in report["meta"]

    def test_correlated_hardness(self, capsys):
        code, report = run_cli(
            capsys, "gen", "correlated-hardness", "--k", "2", "--gamma", "1/2"
        )
        assert code == 0
        assert report["costs"]["0"] == "15/16"
        assert set(report["actions"]["0"]) == {"u1", "u2"}

    def test_missing_params_exit_1(self, capsys):
        assert main(["gen", "critpoints"]) == 1


class TestConvert:
    def test_coverage_to_bernoulli_round_trip(self, capsys, tmp_path):
        coverage = {
            "universe": [
                {"id": "u1", "weight": "3/10"},
                {"id": "u2", "weight": "1/2"},
            ],
            "actions": {"a": ["u1"], "b": ["u1", "u2"]},
        }
        src = tmp_path / "cov.json"
        src.write_text(json.dumps(coverage))
        code, bern = run_cli(capsys, "convert", "coverage", str(src))
        assert code == 0
        assert bern["kind"] == "bernoulli"
        mid = tmp_path / "bern.json"
        mid.write_text(json.dumps(bern))
        code, back = run_cli(capsys, "convert", "bernoulli", str(mid))
        assert code == 0
        weights = {
            entry["id"]: entry["weight"] for entry in back["universe"]
        }
        covered = set(back["actions"]["a"]) | set(back["actions"]["b"])
        assert sum(F(weights[u]) for u in covered) == F(4, 5)
        assert sum(F(weights[u]) for u in back["actions"]["a"]) == F(3, 10)

    def test_corrmax(self, capsys, tmp_path):
        doc = {
            "actions": ["a"],
            "support": [
                {"values": ["1"], "prob": "1/2"},
                {"values": ["0"], "prob": "1/2"},
            ],
        }
        src = tmp_path / "vj.json"
        src.write_text(json.dumps(doc))
        code, cov = run_cli(capsys, "convert", "corrmax", str(src))
        assert code == 0
        total = sum(F(e["weight"]) for e in cov["universe"])
        assert total == F(1, 2)


class TestDeterminismAndUsage:
    def test_identical_reports(self, i1_path, tmp_path):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        assert main(["-o", str(out1), "solve-linear", i1_path]) == 0
        assert main(["-o", str(out2), "solve-linear", i1_path]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_unknown_subcommand_exits_64(self):
        with pytest.raises(SystemExit) as info:
            main(["frobnicate"])
        assert info.value.code == 64

    def test_console_script_runs(self, i1_path):
        result = subprocess.run(
            [sys.executable, "-m", "seqcontract.cli", "solve-linear", i1_path],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0
        assert json.loads(result.stdout)["alpha"] == "1/5"

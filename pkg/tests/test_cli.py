"""Tests for the command-line front end."""

import json
import sys
import types

import numpy as np
import pytest

from dgwave.cli import RunSpec, load_config, main
from dgwave.dg_solver import ProblemConfig
from dgwave.errors import ValidationError
from dgwave.reference_element import MAX_DEGREE


def _csv_lines(path) -> list:
    return path.read_text().splitlines()


class TestRun:
    """dgwave run."""

    def test_explicit_budget_completes(self, tmp_path, capsys):
        out = tmp_path / "h.csv"
        code = main(["run", "--case", "1", "--cells", "4", "--max-steps", "10", "-o", str(out)])
        assert code == 0
        lines = _csv_lines(out)
        assert lines[0] == "n,t,dt,sup_u,sup_phi,K_u,K_phi,scheme"
        assert len(lines) == 11
        assert [line.split(",")[0] for line in lines[1:]] == [str(n) for n in range(1, 11)]
        summary = json.loads(capsys.readouterr().out)
        assert summary["status"] == "completed"
        assert summary["steps"] == 10

    def test_fd_run(self, tmp_path, capsys):
        out = tmp_path / "fd.csv"
        code = main(["run", "--scheme", "fd", "--case", "3", "--cells", "16", "--threshold", "1e3", "-o", str(out)])
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["status"] == "blown_up"
        assert summary["scheme"] == "fd"
        assert _csv_lines(out)[-1].endswith(",fd")

    def test_summary_file(self, tmp_path, capsys):
        summary = tmp_path / "summary.json"
        argv = ["run", "--case", "1", "--cells", "4", "--max-steps", "3", "-o", str(tmp_path / "h.csv")]
        assert main(argv + ["--summary", str(summary)]) == 0
        assert summary.read_text().strip() == capsys.readouterr().out.strip()

    def test_bad_degree_exits_2(self, tmp_path, capsys):
        code = main(["run", "--k", "9", "-o", str(tmp_path / "h.csv")])
        assert code == 2
        assert "polynomial degree must lie in 0..7, got: 9" in capsys.readouterr().err

    def test_fd_rejects_inflow_case(self, tmp_path, capsys):
        code = main(["run", "--scheme", "fd", "--case", "2", "--cells", "8", "-o", str(tmp_path / "h.csv")])
        assert code == 2
        assert "periodic" in capsys.readouterr().err

    def test_case_and_data_conflict(self, capsys):
        assert main(["run", "--case", "1", "--data", "x:y"]) == 2
        assert "either case or data" in capsys.readouterr().err

    def test_data_factory(self, tmp_path, monkeypatch, capsys):
        module = types.ModuleType("custom_problems")

        def constant(p: float) -> ProblemConfig:
            return ProblemConfig(p=p, u0=lambda x: 1.0, u1=lambda x: 1.0, du0=lambda x: 0.0)

        module.constant = constant
        monkeypatch.setitem(sys.modules, "custom_problems", module)
        out = tmp_path / "h.csv"
        code = main(["run", "--data", "custom_problems:constant", "--cells", "4", "--max-steps", "5", "-o", str(out)])
        assert code == 0
        assert len(_csv_lines(out)) == 6

    def test_missing_factory(self, capsys):
        assert main(["run", "--data", "no_such_module_here:factory"]) == 2


class TestConfigFile:
    """Defaults < TOML < flags."""

    def test_run_table_overrides_top_level(self, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text("cells = 4\ncase = 1\nmax_steps = 5\n\n[run]\nmax_steps = 3\n")
        assert load_config(str(config)) == {"cells": 4, "case": 1, "max_steps": 3}

    def test_flags_override_file(self, tmp_path, capsys):
        config = tmp_path / "run.toml"
        config.write_text("cells = 4\ncase = 1\n\n[run]\nmax_steps = 3\n")
        out = tmp_path / "h.csv"
        assert main(["--config", str(config), "run", "-o", str(out)]) == 0
        assert len(_csv_lines(out)) == 4
        assert main(["--config", str(config), "run", "--max-steps", "2", "-o", str(out)]) == 0
        assert len(_csv_lines(out)) == 3

    def test_unknown_key(self, tmp_path, capsys):
        config = tmp_path / "run.toml"
        config.write_text("cels = 4\n")
        assert main(["--config", str(config), "run"]) == 2
        assert "cels" in capsys.readouterr().err

    def test_unknown_table(self, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text("[other]\ncells = 4\n")
        with pytest.raises(ValidationError):
            load_config(str(config))

    def test_missing_file(self, capsys):
        assert main(["--config", "/nonexistent/run.toml", "run"]) == 2


class TestRunSpec:
    """Validated settings."""

    def test_lists_from_strings(self):
        spec = RunSpec(exponents="5, 6", levels="300,600")
        assert spec.exponents == [5, 6]
        assert spec.levels == [300.0, 600.0]

    def test_budget_status(self):
        assert RunSpec().budget_status.value == "max_steps"
        assert RunSpec(max_steps=5).budget_status.value == "completed"

    def test_policy_falls_back_to_case(self):
        spec = RunSpec(case=2, p=3.0)
        policy = spec.policy(spec.benchmark_case().desk_policy())
        assert (policy.sigma, policy.nu) == (0.5, 0.1)
        assert RunSpec(sigma=1.0).policy().sigma == 1.0


class TestOtherCommands:
    """benchmark, convergence, dump-matrices, validate."""

    def test_dump_matrices(self, capsys):
        assert main(["dump-matrices", "--k", "1"]) == 0
        data = json.loads(capsys.readouterr().out)
        np.testing.assert_allclose(data["E"], [[3.0, 1.0], [-3.0, 1.0]], atol=1e-12)
        np.testing.assert_allclose(data["alpha"], [1.0, 1.0], atol=1e-12)

    def test_benchmark_needs_case(self, capsys):
        assert main(["benchmark"]) == 2

    def test_benchmark_markdown(self, tmp_path, capsys):
        md = tmp_path / "case3.md"
        argv = ["benchmark", "--case", "3", "--cells", "16", "--threshold", "1e3", "-o", str(tmp_path / "b.csv")]
        assert main(argv + ["--markdown", str(md)]) == 0
        assert md.read_text().startswith("# Case 3")
        assert json.loads(capsys.readouterr().out)["case_id"] == 3

    def test_convergence_small(self, tmp_path, capsys):
        out = tmp_path / "conv.csv"
        code = main(["convergence", "--p", "3", "--exponents", "3,4", "--threshold", "1e4", "-o", str(out)])
        assert code in (0, 1)
        lines = _csv_lines(out)
        assert lines[0].startswith("h,k,sigma,nu,T_h_dg")
        assert [line.split(",")[0] for line in lines[1:]] == ["0.125", "0.0625"]

    def test_convergence_reports_unfinished_rows(self, tmp_path, capsys):
        out = tmp_path / "conv.csv"
        argv = ["convergence", "--p", "3", "--exponents", "3", "--threshold", "1e4", "--max-steps", "5"]
        assert main(argv + ["-o", str(out)]) == 1
        err = capsys.readouterr().err.splitlines()
        assert [line for line in err if line.startswith("FAIL")] == ["FAIL h=0.125: dg max_steps, fd max_steps"]
        assert _csv_lines(out)[0].endswith(",fd_refine")

    def test_sweep_skips_pairs_over_budget(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        argv = ["convergence", "--sweep", "--p", "3", "--exponents", "3", "--threshold", "1e4", "--max-steps", "5"]
        assert main(argv + ["-o", str(out)]) == 1
        assert json.loads(capsys.readouterr().out) == {"best": None}
        lines = _csv_lines(out)
        assert lines[0] == "sigma,nu,complete,screened_out,max_deviation,failures"
        assert len(lines) == 10
        assert all(line.split(",")[2:4] == ["false", "true"] for line in lines[1:])

    def test_validate_writes_matrices(self, tmp_path, capsys):
        directory = tmp_path / "matrices"
        assert main(["validate", "--dump-matrices", str(directory)]) == 0
        assert sorted(p.name for p in directory.iterdir()) == [f"k{k}.json" for k in range(MAX_DEGREE + 1)]
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 7
        assert all(line.startswith("PASS ") for line in lines)

    def test_validate_is_deterministic(self, capsys):
        assert main(["validate", "--seed", "3"]) == 0
        first = capsys.readouterr().out
        assert main(["validate", "--seed", "3"]) == 0
        assert capsys.readouterr().out == first

"""Tests for the command line entry point."""

import csv
import json
from pathlib import Path

import pytest

from skdv_cli.__main__ import main
from skdv_cli.commands import EXIT_MISMATCH, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE
from skdv_core.config.loader import load_config
from skdv_core.config.models import AppConfig


@pytest.fixture(autouse=True)
def no_config_env(monkeypatch):
    monkeypatch.delenv("SKDV_CONFIG_PATH", raising=False)


def write_sim_config(directory: Path, body: str) -> Path:
    path = directory / "run.yaml"
    path.write_text(body)
    return path


class TestExpandSuper:
    """Test ``expand-super``."""

    def test_text(self, capsys):
        assert main(["expand-super", "--expr", "D(Phi)"]) == EXIT_OK
        assert capsys.readouterr().out == "theta0: u, theta1: xi_x\n"

    def test_json(self, capsys):
        assert main(["expand-super", "--expr", "D(Phi)", "--format", "json"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out) == {"theta0": "u", "theta1": "xi_x"}

    def test_syntax_error(self, capsys):
        assert main(["expand-super", "--expr", "D(Phi"]) == EXIT_USAGE
        assert capsys.readouterr().out == ""

    def test_missing_expression(self):
        assert main(["expand-super"]) == EXIT_USAGE


class TestDerive:
    """Test ``derive``."""

    def test_json_transcript(self, tmp_path):
        out = tmp_path / "derive.json"
        assert main(["derive", "--model", "kdv_potential", "--out", str(out)]) == EXIT_OK
        report = json.loads(out.read_text())
        assert report["model"] == "kdv_potential"
        assert report["closed"] is True
        assert [record["id"] for record in report["constraints"]] == ["c1"]

    def test_deterministic(self, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        main(["derive", "--model", "kdv_potential", "--out", str(first)])
        main(["derive", "--model", "kdv_potential", "--out", str(second)])
        assert first.read_bytes() == second.read_bytes()

    def test_text(self, capsys):
        assert main(["derive", "--model", "kdv_potential", "--format", "text"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("Momenta:\n")
        assert "Closed: yes" in out

    def test_model_without_lagrangian(self):
        assert main(["derive", "--model", "kdv"]) == EXIT_USAGE

    def test_unknown_model(self):
        assert main(["derive", "--model", "nope"]) == EXIT_USAGE

    def test_bad_param(self):
        assert main(["derive", "--model", "skdv2_lagrangian", "--param", "a"]) == EXIT_USAGE

    def test_iteration_limit(self, tmp_path):
        config = write_sim_config(tmp_path, "derivation:\n  max_generations: 1\n")
        assert main(["derive", "--config", str(config)]) == EXIT_MISMATCH


@pytest.mark.slow
def test_golden_suite(capsys):
    assert main(["verify-paper"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.rstrip().endswith("checks passed")


class TestSimulate:
    """Test ``simulate`` on short runs."""

    CONFIG = """
simulation:
  model: kdv
  grid:
    length: 40.0
    points: 64
  dt: 0.001
  t_final: 0.01
  output_interval: 0.005
  initial:
    solitons:
      - kappa: 0.5
"""

    def test_writes_csv(self, tmp_path, capsys):
        config = write_sim_config(tmp_path, self.CONFIG)
        out = tmp_path / "out"
        args = ["simulate", "--config", str(config), "--out", str(out), "--format", "json"]
        assert main(args) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["steps"] == 10
        assert set(summary["drift"]) == {"mass", "momentum", "hamiltonian"}

        with open(out / "timeseries.csv", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["t", "hamiltonian", "mass", "momentum"]
        assert len(rows) == 4

    def test_saves_settings_for_rerun(self, tmp_path, capsys):
        config = write_sim_config(tmp_path, self.CONFIG)
        out = tmp_path / "out"
        args = [
            "simulate",
            "--config", str(config),
            "--out", str(out),
            "--model", "skdv_a",
            "--param", "a=2",
            "--format", "json",
        ]
        assert main(args) == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        saved = Path(summary["settings"])
        assert saved == out / "simulation.yaml"

        rerun = load_config(saved, AppConfig).simulation
        assert rerun.model == "skdv_a"
        assert rerun.params == {"a": "2"}
        assert rerun.grid.points == 64
        assert rerun.t_final == 0.01


    def test_model_override(self, tmp_path, capsys):
        config = write_sim_config(tmp_path, self.CONFIG)
        args = [
            "simulate",
            "--config", str(config),
            "--out", str(tmp_path / "out"),
            "--model", "skdv_a",
            "--param", "a=2",
        ]
        assert main(args) == EXIT_OK
        assert "mass: relative drift" in capsys.readouterr().out

    def test_invalid_override(self, tmp_path):
        config = write_sim_config(tmp_path, self.CONFIG)
        args = ["simulate", "--config", str(config), "--param", "b=2", "--model", "skdv_a"]
        assert main(args) == EXIT_USAGE

    def test_blow_up(self, tmp_path):
        config = write_sim_config(
            tmp_path,
            "simulation:\n  grid:\n    length: 10.0\n    points: 64\n"
            "  dt: 0.5\n  t_final: 50.0\n  output_interval: 10.0\n",
        )
        args = ["simulate", "--config", str(config), "--out", str(tmp_path / "out")]
        assert main(args) == EXIT_NUMERICAL

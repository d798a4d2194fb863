import json
import logging

import pytest
from click.testing import CliRunner

from src.main import EXIT_CONFIG, EXIT_DIVERGED, cli


@pytest.fixture(autouse=True)
def _detach_log_handler():
    yield
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, "_pso_handler", False)]:
        root.removeHandler(handler)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def _optimize_args(out, *extra):
    return ["--log-level", "WARNING", "optimize", "--function", "ackley", "--dim", "2", "--domain=-3,3",
            "--particles", "50", "--seed", "1", "--n-max", "200", "--out", str(out), *extra]


def test_schema(runner):
    result = runner.invoke(cli, ["schema"])
    assert result.exit_code == 0
    assert "experiment" in json.loads(result.output)["properties"]


class TestOptimize:

    def test_memory_scheme(self, runner, tmp_path):
        result = runner.invoke(cli, _optimize_args(tmp_path, "--mode", "cbo_mem"))
        assert result.exit_code == 0, result.output
        assert "consensus:" in result.output
        assert "evaluations:" in result.output

    def test_trace_is_reproducible(self, runner, tmp_path):
        for name in ("a", "b"):
            result = runner.invoke(cli, _optimize_args(tmp_path / name, "--trace"))
            assert result.exit_code == 0, result.output
        stem = "trajectory_ackley_sdpso_nomem_seed1.csv"
        assert (tmp_path / "a" / stem).read_text() == (tmp_path / "b" / stem).read_text()

    def test_unknown_function(self, runner, tmp_path):
        result = runner.invoke(cli, ["optimize", "--function", "nope", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_CONFIG

    def test_bad_domain(self, runner, tmp_path):
        result = runner.invoke(cli, ["optimize", "--domain", "1,2,3", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_CONFIG

    def test_missing_section(self, runner, tmp_path):
        path = tmp_path / "doc.json"
        path.write_text('{"limit": {}}')
        result = runner.invoke(cli, ["optimize", "--config", str(path), "--out", str(tmp_path)])
        assert result.exit_code == EXIT_CONFIG

    def test_divergence(self, runner, tmp_path):
        result = runner.invoke(cli, _optimize_args(tmp_path, "--sigma", "1e300", "--lam", "0", "--m", "0",
                                                   "--gamma", "1"))
        assert result.exit_code == EXIT_DIVERGED


def test_benchmark_config(runner, tmp_path):
    path = tmp_path / "doc.json"
    path.write_text(json.dumps({"experiment": {"label": "small", "objective": {"name": "rastrigin", "dim": 2},
                                               "n_particles": 20, "n_max": 50}}))
    out = tmp_path / "out"
    result = runner.invoke(cli, ["benchmark", "--config", str(path), "--runs", "2", "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = (out / "aggregate.csv").read_text().splitlines()
    assert len(lines) == 2
    assert "small" in lines[1]


@pytest.mark.parametrize("extra, expected", [([], "3"), (["--runs", "2"], "2")])
def test_benchmark_config_keeps_its_replicates(runner, tmp_path, extra, expected):
    path = tmp_path / "doc.json"
    path.write_text(json.dumps({"experiment": {"objective": {"name": "rastrigin", "dim": 2},
                                               "n_particles": 10, "n_max": 20, "n_r": 3}}))
    out = tmp_path / "out"
    result = runner.invoke(cli, ["benchmark", "--config", str(path), "--out", str(out), *extra])
    assert result.exit_code == 0, result.output
    header, row = (out / "aggregate.csv").read_text().splitlines()
    assert row.split(",")[header.split(",").index("n_runs")] == expected


def test_benchmark_needs_a_source(runner, tmp_path):
    assert runner.invoke(cli, ["benchmark", "--out", str(tmp_path)]).exit_code == EXIT_CONFIG


def test_meanfield(runner, tmp_path):
    result = runner.invoke(cli, ["meanfield", "--pde", "cbo", "--tfinal", "0.1", "--snap", "0.1",
                                 "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "t=0.1 mass=" in result.output
    assert (tmp_path / "marginal_cbo_t0.100.csv").exists()


def test_limit(runner, tmp_path):
    result = runner.invoke(cli, ["limit", "--m-list", "0.2,0.1", "--tfinal", "0.1", "--particles", "20",
                                 "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "slope:" in result.output
    rows = (tmp_path / "limit_seed0.csv").read_text().splitlines()
    assert rows[-1].startswith("slope,")


def test_density_summary(runner, tmp_path):
    result = runner.invoke(cli, ["meanfield", "--pde", "pso", "--nx", "21", "--nv", "17", "--tfinal", "0.05",
                                 "--snap", "0.05", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    marginal = tmp_path / "rho_x.csv"
    result = runner.invoke(cli, ["density", str(tmp_path / "density_pso_t0.050.txt"), "--marginal", str(marginal)])
    assert result.exit_code == 0, result.output
    assert "grid: 21 x 17" in result.output
    assert "t=0.05 mass=" in result.output
    rows = marginal.read_text().splitlines()
    assert rows[0] == "x,rho"
    assert len(rows) == 22


def test_density_bad_header(runner, tmp_path):
    dump = tmp_path / "bad.txt"
    dump.write_text("1 2 3\n0 0\n")
    result = runner.invoke(cli, ["density", str(dump)])
    assert result.exit_code == EXIT_CONFIG


@pytest.mark.parametrize("command, shown", [
    ("optimize", ["1 - m", "classical domain"]),
    ("benchmark", ["n_r of --config"]),
])
def test_help_shows_defaults(runner, command, shown):
    result = runner.invoke(cli, [command, "--help"])
    assert result.exit_code == 0
    for text in shown:
        assert text in " ".join(result.output.split())

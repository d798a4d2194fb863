import pytest
from click.testing import CliRunner

from src.application import acceptance
from src.application.acceptance import (CheckResult, check_consensus_properties, check_pde_invariants, classic_gap,
                                        run_acceptance)
from src.application.harness import ExperimentHarness
from src.main import EXIT_CHECK_FAILED, cli


def test_classic_gap_is_rounding_level():
    assert classic_gap(n_steps=20) <= 1e-12


def test_consensus_properties():
    result = check_consensus_properties(cases=500)
    assert result.passed, result.detail


def test_pde_invariants_short():
    result = check_pde_invariants(n_steps=5)
    assert result.passed, result.detail


def test_low_inertia_ordering_short():
    w1 = acceptance.low_inertia_distances(0.0, n_particles=4000, t_final=0.5)
    assert len(w1) == 3
    assert w1[0] > w1[1] > w1[2]


def test_raising_check_is_reported(monkeypatch):
    def boom() -> CheckResult:
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(acceptance, "acceptance_checks",
                        lambda harness, runs: [("boom", boom),
                                               ("fine", lambda: CheckResult(name="fine", passed=True))])
    results = run_acceptance(ExperimentHarness())
    assert [(r.name, r.passed) for r in results] == [("boom", False), ("fine", True)]
    assert "exploded" in results[0].detail


def test_failed_check_sets_exit_code(monkeypatch, tmp_path):
    monkeypatch.setattr("src.main.run_acceptance",
                        lambda harness, runs: [CheckResult(name="x", passed=False, detail="off")])
    result = CliRunner().invoke(cli, ["benchmark", "--check", "--out", str(tmp_path)])
    assert result.exit_code == EXIT_CHECK_FAILED
    assert "FAIL x: off" in result.output


@pytest.mark.slow
@pytest.mark.parametrize("check", [
    acceptance.check_classic_equivalence,
    acceptance.check_zero_inertia,
    acceptance.check_low_inertia_ordering,
    acceptance.check_meanfield_validation,
    acceptance.check_lyapunov,
])
def test_desk_check(check):
    result = check()
    assert result.passed, result.detail


@pytest.mark.slow
@pytest.mark.parametrize("check", [
    acceptance.check_ackley_table,
    acceptance.check_rastrigin_table,
    acceptance.check_function_table,
])
def test_table_check(check):
    result = check(ExperimentHarness(workers=4), 50)
    assert result.passed, result.detail

import pytest

from vertexkit.suites import (
    DEFAULT_TOLERANCES,
    IDENTITIES,
    SUITES,
    Check,
    Context,
    convergence_report,
    convergence_summary,
    run_suites,
)
from vertexkit.taylor import SumConfig

CFG = SumConfig(2048, "richardson1", 1e-4)


@pytest.fixture(scope="module")
def report():
    return run_suites("all", Context(N=256, window=16, cfg=CFG))


def test_all_suites_pass(report):
    failed = [(s, c["name"]) for s, r in report["suites"].items() for c in r["checks"] if not c["passed"]]
    assert failed == []
    assert report["passed"] is True
    assert list(report["suites"]) == list(SUITES)


def test_report_records_configuration(report):
    assert report["kind"] == "verify"
    assert report["tolerances"]["exact"] == DEFAULT_TOLERANCES["exact"]
    assert report["config"]["N"] == 256


@pytest.mark.parametrize("seed", [0, 1, 7, 123])
def test_seeded_perturbation_fails(seed):
    ctx = Context(N=64, window=8, cfg=CFG, perturb_seed=seed)
    rep = run_suites(["f-properties"], ctx)
    assert rep["passed"] is False
    assert ctx.perturbed_entry() is not None


def test_check_semantics():
    assert Check("x", 0.5, 1.0).passed
    assert not Check("x", 2.0, 1.0).passed
    assert not Check("x", float("nan"), 1.0).passed


def test_tolerance_override():
    ctx = Context(N=64, window=8, cfg=CFG, tolerances={"exact": 0.0})
    rep = run_suites(["vertex"], ctx)
    tol = {c["name"]: c["tolerance"] for c in rep["suites"]["vertex"]["checks"]}
    assert tol["cyclicity"] == 0.0


def test_unknown_suite_rejected():
    with pytest.raises(ValueError):
        run_suites(["nope"], Context(N=64, window=8, cfg=CFG))


@pytest.mark.parametrize("identity", IDENTITIES)
def test_convergence_reports(identity):
    rep = convergence_report(identity, [64, 128, 256], Context(N=64, window=8, cfg=CFG))
    assert rep["identity"] == identity
    assert rep["passed"], convergence_summary(rep)
    assert identity in convergence_summary(rep)

import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankdiff import verification as V
from rankdiff.errors import ModelMismatch

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())


def test_eta_rules():
    assert V.constant(0.3)(10) == 0.3
    assert V.proportional(0.5)(10) == 5.0
    assert V.critical()(math.e ** 2) == pytest.approx(1.0)
    assert V.table({10: 1.0})(10) == 1.0
    with pytest.raises(KeyError):
        V.table({10: 1.0})(11)


def test_atlas_conditions():
    r = V.check_drift_conditions(V.DriftModel.atlas(V.proportional(0.5)), [10, 100, 1000])
    assert r.statistics["eta_estimate"]["estimate"] == 0.5
    assert r.details["edge_condition_holds"] and r.details["max_condition_holds"]


def test_gravity_max_gap_is_eta_n():
    r = V.check_drift_conditions(V.DriftModel.gravity(V.constant(0.25)), [100, 1000])
    last = r.details["trajectory"][-1]
    assert last["max_gap"] == pytest.approx(0.25 * 999 / 1000)
    assert r.details["max_condition_holds"]


def test_two_block_breaks_max_condition():
    r = V.check_drift_conditions(V.DriftModel.two_block(0.25), [256, 4096])
    assert r.details["edge_condition_holds"] and not r.details["max_condition_holds"]


def test_top_push_breaks_edge_condition():
    r = V.check_drift_conditions(V.DriftModel.top_push(), [100, 1000])
    assert not r.details["edge_condition_holds"]


def test_conditions_need_increasing_grid():
    with pytest.raises(ValueError):
        V.check_drift_conditions(V.DriftModel.top_push(), [100, 10])


def test_condition_suite_passes_and_validates():
    r = V.condition_suite()
    assert r.passed
    jsonschema.validate(json.loads(r.to_json()), SCHEMA)


def test_lemma_single_exponential():
    cfg = V.LemmaPhaseConfig((1.0,))
    assert cfg.mu_bar == pytest.approx(1 / (1 + math.exp(-1)), abs=1e-12)
    assert cfg.sigma == 1.0
    r = V.lemma_phase_check(cfg, 10_000, 3)
    assert r.passed
    assert r.statistics["E_mu"]["estimate"] >= math.exp(-1) * cfg.mu_bar


def test_lemma_degenerate_config():
    r = V.lemma_phase_check(V.LemmaPhaseConfig(()), 50, 0)
    assert r.passed and r.statistics["E_mu"]["estimate"] == 1.0


@settings(max_examples=30)
@given(st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=50))
def test_lemma_exact_quantities(thetas):
    cfg = V.LemmaPhaseConfig(tuple(thetas))
    assert abs(cfg.sigma ** 2 - sum(t * t for t in thetas)) < 1e-12
    direct = 1 / (1 + sum(math.exp(-sum(thetas[: i + 1])) for i in range(len(thetas))))
    assert abs(cfg.mu_bar - direct) < 1e-12


def test_lemma_rejects_nonpositive_theta():
    with pytest.raises(ValueError):
        V.LemmaPhaseConfig((1.0, 0.0))


def test_small_lemma_suite():
    r = V.lemma_phase_suite(10, 2000, 5, threads=3)
    assert r.passed and r.statistics["violations"]["estimate"] == 0


def test_phase_sweep_dominance_and_exclusivity():
    r = V.phase_sweep(V.DriftModel.atlas(V.constant(1.0)), [200], 300, 1, expected="dominance")
    assert r.outcome == "dominance" and r.passed
    assert sum(r.details["fired"].values()) == 1


def test_phase_sweep_collapse():
    r = V.phase_sweep(V.DriftModel.gravity(V.constant(1.0)), [200, 800], 300, 1, expected="collapse")
    assert r.outcome == "collapse"


def test_phase_sweep_inconclusive_when_nothing_fires():
    # eta = 0.25 but n tiny: mu_1 neither near 0 nor 1, and KS against PD is large
    r = V.phase_sweep(V.DriftModel.gravity(V.constant(0.25)), [3], 2000, 1, expected="pd-limit", pd_draws=2000)
    assert r.outcome == "inconclusive"
    assert not r.passed
    assert r.first_failure().name == "phase"


def test_rate_regression_needs_certificate():
    with pytest.raises(ModelMismatch):
        V.rate_regression(V.DriftModel.two_block(0.25), [100], 10, 0)
    with pytest.raises(ModelMismatch):
        V.rate_regression(V.DriftModel.gravity(V.constant(0.25)), [100], 10, 0)


def test_rate_regression_eta_two_extrapolates():
    r = V.rate_regression(V.DriftModel.gravity(V.constant(2.0)), [500, 1000, 2000, 5000], 400, 7)
    assert abs(r.statistics["extrapolated_limit"]["estimate"] + 0.75) < 0.1


def test_critical_rate_is_labelled():
    r = V.rate_regression(V.DriftModel.gravity(V.critical()), [1000, 2000], 200, 7)
    assert "slow-convergence diagnostic" in r.labels
    assert [v.name for v in r.verdicts] == ["median ratio at n=2000"]
    assert r.details["tolerance"] == 0.3


def test_report_json_is_reproducible_and_valid():
    run = lambda t: V.phase_sweep(V.DriftModel.gravity(V.constant(0.25)), [100, 400], 500, 11,
                                  expected="pd-limit", threads=t).to_json()
    a, b = run(1), run(4)
    assert a == b
    d = json.loads(a)
    jsonschema.validate(d, SCHEMA)
    assert "runtime" not in d and d["schema_version"] == 1
    assert all({"measured", "threshold"} <= set(v) for v in d["verdicts"])


def test_report_serialization_handles_nonfinite():
    r = V.ExperimentReport("x", 1, 1)
    r.stat("nan", float("nan"), float("inf"))
    d = json.loads(r.to_json(include_runtime=True))
    assert d["statistics"]["nan"] == {"estimate": None, "se": None}
    assert "runtime" in d
    jsonschema.validate(d, SCHEMA)


def test_verdict_comparators():
    assert V.Verdict.check("a", 0.5, "in", (0.4, 0.6)).passed
    assert not V.Verdict.check("a", 0.7, "in", (0.4, 0.6)).passed
    assert V.Verdict.check("a", 1, "<=", 1).passed
    assert "FAIL" in str(V.Verdict.check("a", 2, "<", 1))

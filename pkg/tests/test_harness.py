import json

import numpy as np
import pytest

from finslerkit import Ball, ExperimentConfig, HalfSpace, SUITES, UnsupportedDomainError, coverage_table, run_suite
from finslerkit.harness import COVERAGE

# reduced sample counts keep these structural checks quick; full runs live in test_acceptance.py
FAST = {
    "ball_bounds": 200,
    "halfspace_ball_qk": 10,
    "quasidistance": 500,
    "sandwich": 200,
    "curves": 5,
    "growth": 3,
    "localization": 500,
    "classifier": 5,
}


@pytest.mark.parametrize("suite", sorted(FAST))
def test_fast_suites_pass_and_serialize(suite):
    rep = run_suite(ExperimentConfig(suite, samples=FAST[suite]))
    assert rep.passed, [c.to_dict() for c in rep.checks if not c.passed]
    doc = json.loads(rep.to_json())
    assert doc["suite"] == suite and doc["seed"] == 0 and doc["runtimeSeconds"] is None
    assert doc["coverage"] and all(COVERAGE[c] == suite for c in doc["coverage"])
    for c in doc["checks"]:
        assert {"name", "pass", "samples", "maxViolation", "tolerance", "fitted", "notes"} <= set(c)


@pytest.mark.parametrize("suite", ["quasidistance", "sandwich", "classifier"])
def test_same_seed_same_bytes(suite):
    a = run_suite(ExperimentConfig(suite, samples=FAST[suite])).to_json()
    b = run_suite(ExperimentConfig(suite, samples=FAST[suite])).to_json()
    assert a == b


def test_seed_changes_samples():
    a = run_suite(ExperimentConfig("sandwich", seed=0, samples=200)).to_dict()
    b = run_suite(ExperimentConfig("sandwich", seed=1, samples=200)).to_dict()
    assert a["checks"][0]["fitted"] != b["checks"][0]["fitted"]


def test_timing_is_opt_in():
    rep = run_suite(ExperimentConfig("quasidistance", samples=100, timing=True))
    assert rep.runtime_seconds is not None and rep.runtime_seconds >= 0


def test_every_claim_has_exactly_one_suite():
    table = coverage_table()
    claims = [row["claim"] for row in table]
    assert len(claims) == len(set(claims))
    assert {row["suite"] for row in table} == set(SUITES)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("ball_bounds", samples=0)
    with pytest.raises(ValueError):
        ExperimentConfig("ball_bounds", tolerances={"bracket": 0.0})
    with pytest.raises(ValueError):
        run_suite(ExperimentConfig("nope"))


def test_wrong_domain_kind():
    with pytest.raises(UnsupportedDomainError):
        run_suite(ExperimentConfig("ball_bounds", domain=HalfSpace.standard(3)))


def test_custom_ball():
    rep = run_suite(ExperimentConfig("ball_bounds", domain=Ball(np.ones(2), 3.0), samples=300))
    assert rep.passed
    assert rep.checks[0].name == "bracket r=3"


def test_disk_sandwich_is_feasible():
    rep = run_suite(ExperimentConfig("sandwich", domain=Ball.unit(2), collar=0.1, samples=500))
    fit = rep.check("sandwich feasibility").fitted
    assert rep.passed
    assert 0 < fit["c2"] <= 1 <= fit["C2"]

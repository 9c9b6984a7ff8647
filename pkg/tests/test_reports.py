import json
import math

import pytest

from finslerkit import Check, VerificationReport


def sample_report():
    rep = VerificationReport("demo", 3, coverage=["a claim"])
    rep.add(Check("exact", 10, 1e-13, 1e-12))
    rep.add(Check("fit", 5, fitted={"C": math.inf, "B": 0.25}, notes="fitted"))
    return rep


def test_pass_rule():
    assert Check("ok", 1, 0.5, 1.0).passed
    assert not Check("bad", 1, 2.0, 1.0).passed
    assert Check("fit only", 1).passed
    assert not Check("explicit", 1, passed=False).passed
    rep = sample_report()
    assert rep.passed
    rep.add(Check("bad", 1, 2.0, 1.0))
    assert not rep.passed


def test_json_roundtrip_and_unbounded_token():
    rep = sample_report()
    text = rep.to_json()
    doc = json.loads(text)
    assert set(doc) == {"suite", "pass", "seed", "checks", "coverage", "runtimeSeconds"}
    assert doc["checks"][1]["fitted"]["C"] == "unbounded"
    assert "NaN" not in text and "Infinity" not in text
    again = VerificationReport.from_json(text)
    assert again.check("fit").fitted["C"] == math.inf
    assert again.to_json() == text


def test_nan_is_refused():
    rep = VerificationReport("demo", 0)
    rep.add(Check("nan", 1, math.nan, 1.0, passed=True))
    with pytest.raises(ValueError):
        rep.to_json()


def test_csv_has_one_row_per_check():
    lines = sample_report().to_csv().strip().splitlines()
    assert lines[0].startswith("suite,check,pass")
    assert len(lines) == 3
    assert "unbounded" in lines[2]


def test_missing_check():
    with pytest.raises(KeyError):
        sample_report().check("nope")

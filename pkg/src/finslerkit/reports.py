"""Verification reports and their JSON/CSV forms.

Infinite values serialize as the string ``"unbounded"``; NaN is refused so a
report can never silently carry an undefined number.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

UNBOUNDED = "unbounded"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            raise ValueError("reports may not contain NaN")
        if math.isinf(x):
            return UNBOUNDED if x > 0 else "-" + UNBOUNDED
        return x
    return obj


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj == UNBOUNDED:
        return math.inf
    if obj == "-" + UNBOUNDED:
        return -math.inf
    return obj


@dataclass
class Check:
    name: str
    samples: int
    max_violation: float | None = None
    tolerance: float | None = None
    fitted: dict = field(default_factory=dict)
    notes: str = ""
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            if self.tolerance is None or self.max_violation is None:
                self.passed = True
            else:
                self.passed = bool(self.max_violation <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": self.passed,
            "samples": self.samples,
            "maxViolation": self.max_violation,
            "tolerance": self.tolerance,
            "fitted": self.fitted,
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Check":
        return cls(
            name=doc["name"],
            samples=doc["samples"],
            max_violation=doc.get("maxViolation"),
            tolerance=doc.get("tolerance"),
            fitted=doc.get("fitted", {}),
            notes=doc.get("notes", ""),
            passed=doc.get("pass"),
        )


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: list[Check] = field(default_factory=list)
    coverage: list[str] = field(default_factory=list)
    runtime_seconds: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return _clean(
            {
                "suite": self.suite,
                "pass": self.passed,
                "seed": self.seed,
                "checks": [c.to_dict() for c in self.checks],
                "coverage": list(self.coverage),
                "runtimeSeconds": self.runtime_seconds,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "check", "pass", "samples", "maxViolation", "tolerance", "fitted", "notes"])
        for c in self.to_dict()["checks"]:
            w.writerow([
                self.suite,
                c["name"],
                c["pass"],
                c["samples"],
                "" if c["maxViolation"] is None else c["maxViolation"],
                "" if c["tolerance"] is None else c["tolerance"],
                json.dumps(c["fitted"], sort_keys=True),
                c["notes"],
            ])
        return buf.getvalue()

    @classmethod
    def from_dict(cls, doc: dict) -> "VerificationReport":
        doc = _restore(doc)
        return cls(
            suite=doc["suite"],
            seed=doc["seed"],
            checks=[Check.from_dict(c) for c in doc["checks"]],
            coverage=list(doc.get("coverage", [])),
            runtime_seconds=doc.get("runtimeSeconds"),
        )

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

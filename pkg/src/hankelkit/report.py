"""Structured verification reports with deterministic JSON/CSV output."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

SCHEMA_VERSION = 1

CSV_HEADER = ["name", "passed", "tolerance", "observed", "refinement_drift",
              "status", "notes"]


@dataclass
class VerificationReport:
    """Record of one identity/inequality check.

    `observed` is the measured error or constant; `refinement_drift` the
    relative change under quadrature refinement (None when not probed).
    Rejected parameter tuples are reports too, with status="rejected" and
    no numeric observation.
    """

    name: str
    passed: bool
    tolerance: float
    observed: Optional[float] = None
    refinement_drift: Optional[float] = None
    status: str = "checked"  # "checked" | "rejected"
    inputs: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "passed": self.passed,
            "status": self.status,
            "tolerance": self.tolerance,
            "observed": self.observed,
            "refinement_drift": self.refinement_drift,
            "inputs": self.inputs,
            "details": self.details,
            "notes": self.notes,
        }

    def csv_row(self) -> list:
        return [
            self.name,
            str(self.passed).lower(),
            repr(float(self.tolerance)),
            "" if self.observed is None else repr(float(self.observed)),
            "" if self.refinement_drift is None else repr(float(self.refinement_drift)),
            self.status,
            "; ".join(self.notes),
        ]


def rejected_report(name: str, reason: str, inputs: dict = None) -> VerificationReport:
    """A gating rejection: the tuple never reached numeric computation."""
    return VerificationReport(name=name, passed=True, tolerance=0.0,
                              observed=None, status="rejected",
                              inputs=inputs or {}, notes=[reason])


def reports_to_json(reports, config_echo: dict = None) -> str:
    """Deterministic JSON for a list of reports (repr-roundtrip floats)."""
    payload = {
        "schema": SCHEMA_VERSION,
        "config": config_echo or {},
        "reports": [r.to_dict() for r in reports],
    }
    return json.dumps(payload, indent=1, sort_keys=False)


def reports_to_csv(reports) -> str:
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()

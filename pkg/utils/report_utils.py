# Report Utilities Module
# =======================
# Check records, report serialization (CSV through pandas, JSON through the
# json module) and the run manifest written next to every CLI report.

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import pandas as pd

from config import environments

PASS = "pass"
FAIL = "fail"
PREMISE_FAILURE = "premise-failure"
REPORT = "report"

# Float columns are written with this many significant digits
FLOAT_FORMAT = "%.10g"


@dataclass
class CheckResult:
    """
    Outcome of one mathematical check.

    Attributes:
        check (str): short name of the check
        status (str): "pass", "fail", "premise-failure" or "report"
        lhs: left-hand side value (Fraction, int or float)
        rhs: right-hand side value
        witness: optional object explaining a failure or the extremal case
        binding (bool): whether a "fail" should make the run fail
    """

    check: str
    status: str
    lhs: Any = None
    rhs: Any = None
    witness: Any = None
    binding: bool = True

    @property
    def failed(self) -> bool:
        return self.binding and self.status == FAIL

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "witness": self.witness,
            "binding": self.binding,
        }


def compare(check: str, lhs, rhs, relation: str, binding: bool = True, witness=None, tolerance: float = 0.0) -> CheckResult:
    """
    Build a CheckResult from lhs <relation> rhs.

    Exact values are compared exactly; when either side is a float the
    comparison allows ``tolerance`` of slack.
    """
    inexact = isinstance(lhs, float) or isinstance(rhs, float)
    if relation == "==":
        ok = abs(lhs - rhs) <= tolerance if inexact else lhs == rhs
    elif relation == "<=":
        ok = lhs <= rhs + tolerance if inexact else lhs <= rhs
    elif relation == ">=":
        ok = lhs >= rhs - tolerance if inexact else lhs >= rhs
    else:
        raise ValueError(f"unknown relation '{relation}'")
    return CheckResult(check, PASS if ok else FAIL, lhs, rhs, witness, binding)


def any_failed(checks: Iterable[CheckResult]) -> bool:
    return any(c.failed for c in checks)


# Serialization
# =============

def to_jsonable(value: Any) -> Any:
    """Recursively convert values for JSON: Fractions become "p/q" strings."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, CheckResult):
        return to_jsonable(value.as_dict())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [to_jsonable(v) for v in items]
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return value
    if hasattr(value, "__dataclass_fields__"):
        return to_jsonable(asdict(value))
    if hasattr(value, "item"):  # numpy scalars
        return value.item()
    return value


def json_bytes(payload: Any) -> bytes:
    return (json.dumps(to_jsonable(payload), sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def csv_bytes(rows: list[dict], columns: list[str]) -> bytes:
    """CSV with a fixed column order, UTF-8 and LF line endings."""
    frame = pd.DataFrame(rows, columns=columns)
    for col in frame.columns:
        if frame[col].dtype == object:
            frame[col] = frame[col].map(lambda v: str(v) if isinstance(v, Fraction) else v)
    return frame.to_csv(index=False, lineterminator="\n", float_format=FLOAT_FORMAT).encode("utf-8")


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# Run Manifest
# ============

@dataclass
class RunManifest:
    """
    Everything needed to reproduce a report, plus the digest of its bytes.

    Wall-clock time lives here and never inside the report itself.
    """

    subcommand: str
    flags: dict
    seed: int
    version: str = field(default_factory=lambda: environments.EKR_SCHEMA_VERSION)
    wall_clock_seconds: float = 0.0
    started_at: float = field(default_factory=time.time)
    digest: str = ""

    def seal(self, report: bytes) -> "RunManifest":
        self.digest = digest(report)
        self.wall_clock_seconds = round(time.time() - self.started_at, 6)
        return self

    def to_bytes(self) -> bytes:
        return json_bytes(asdict(self))

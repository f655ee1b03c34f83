"""Structured outcomes of numerical checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PASS, FAIL, DEGENERATE = "pass", "fail", "degenerate"


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _plain(v):
    """Diagnostics values as JSON-friendly python scalars / lists."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, str)) or v is None:
        return v
    if isinstance(v, int):
        return v
    try:
        return _num(v)
    except (TypeError, ValueError):
        return str(v)


@dataclass
class CheckResult:
    """One numerical check.

    ``kind="inequality"``: the claim is ``lhs <= rhs``; ``gap = rhs - lhs``
    and the check passes when ``gap >= -tolerance``.
    ``kind="identity"``: the claim is ``lhs == rhs``; ``gap = |lhs - rhs|``
    and the check passes when ``gap <= tolerance``.
    """

    name: str
    lhs: float | None
    rhs: float | None
    gap: float | None
    tolerance: float
    verdict: str
    diagnostics: dict = field(default_factory=dict)
    kind: str = "inequality"

    @classmethod
    def inequality(cls, name, lhs, rhs, tolerance, **diagnostics):
        gap = float(rhs) - float(lhs)
        verdict = PASS if gap >= -tolerance else FAIL
        return cls(name, float(lhs), float(rhs), gap, float(tolerance), verdict, diagnostics)

    @classmethod
    def identity(cls, name, lhs, rhs, tolerance, **diagnostics):
        gap = abs(float(lhs) - float(rhs))
        verdict = PASS if gap <= tolerance else FAIL
        return cls(name, float(lhs), float(rhs), gap, float(tolerance), verdict, diagnostics, "identity")

    @classmethod
    def degenerate(cls, name, tolerance, reason, kind="inequality", **diagnostics):
        diagnostics["error"] = reason
        return cls(name, None, None, None, float(tolerance), DEGENERATE, diagnostics, kind)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "gap": _num(self.gap),
            "tolerance": _num(self.tolerance),
            "verdict": self.verdict,
            "diagnostics": _plain(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["name"], d["lhs"], d["rhs"], d["gap"], d["tolerance"], d["verdict"],
            dict(d.get("diagnostics", {})), d.get("kind", "inequality"),
        )


@dataclass
class SweepReport:
    """Checks along a parameter sweep plus checks on the extrapolated limits."""

    name: str
    parameter: str
    values: list
    results: list
    limits: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.values) != len(self.results):
            raise ValueError("one CheckResult per parameter value is required")

    @property
    def verdict(self) -> str:
        verdicts = [r.verdict for r in self.results + self.limits]
        if DEGENERATE in verdicts:
            return DEGENERATE
        return PASS if all(v == PASS for v in verdicts) else FAIL

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self):
        return {
            "name": self.name,
            "parameter": self.parameter,
            "values": [_num(v) for v in self.values],
            "results": [r.to_dict() for r in self.results],
            "limits": [r.to_dict() for r in self.limits],
            "summary": _plain(self.summary),
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["name"], d["parameter"], list(d["values"]),
            [CheckResult.from_dict(r) for r in d["results"]],
            [CheckResult.from_dict(r) for r in d.get("limits", [])],
            dict(d.get("summary", {})),
        )

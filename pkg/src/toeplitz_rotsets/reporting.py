"""Verification report records with deterministic JSON serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


def jsonable(obj):
    """Recursively convert report payloads to JSON-clean values.

    Fractions become "num/den" strings so reports stay bit-exact across runs;
    Python ints pass through unchanged (json handles arbitrary precision).
    """
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    return repr(obj)


@dataclass
class Report:
    check_name: str
    anchor: str
    status: str
    counterexamples: list = field(default_factory=list)
    statistics: dict = field(default_factory=dict)
    budget: int | None = None
    seed: int | None = None
    wall_time: float | None = None

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_dict(self, include_timing: bool = False) -> dict:
        return {
            "check_name": self.check_name,
            "anchor": self.anchor,
            "status": self.status,
            "counterexamples": jsonable(self.counterexamples),
            "statistics": jsonable(self.statistics),
            "budget": self.budget,
            "seed": self.seed,
            # timings are opt-in so identical flags+seeds give identical bytes
            "wall_time": self.wall_time if include_timing else None,
        }

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True,
                          separators=(",", ":"))


def make_report(check_name, anchor, passed, *, counterexamples=None, statistics=None,
                budget=None, seed=None, skipped_reason=None) -> Report:
    if skipped_reason is not None:
        stats = dict(statistics or {})
        stats["skipped_reason"] = skipped_reason
        return Report(check_name, anchor, SKIPPED, [], stats, budget, seed)
    return Report(check_name, anchor, PASS if passed else FAIL,
                  list(counterexamples or []), dict(statistics or {}), budget, seed)

"""Result containers shared by the analysis modules.

Every analysis entry point returns an :class:`AnalysisReport` so that the
CLI can serialize results uniformly.  Individual hypothesis tests (kernel
regularity, sectoriality, Carleson embeddings, ...) are reported as
:class:`HypothesisCheck` records with the extremal constant and the point
where it was attained.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

VERDICT_PASS = "pass"
VERDICT_FAIL = "fail"
VERDICT_INCONCLUSIVE = "inconclusive"


def encode_value(value: Any) -> Any:
    """Encode ``value`` into JSON-serializable primitives.

    Complex numbers become ``{"re": ..., "im": ...}`` dictionaries; numpy
    scalars are converted to native Python types; containers are encoded
    recursively.  Dataclasses with a ``to_json`` method delegate to it.
    """
    if hasattr(value, "to_json"):
        return value.to_json()
    if isinstance(value, complex):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (bool, int, float, str)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): encode_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    if hasattr(value, "item") and not hasattr(value, "__len__"):
        return encode_value(value.item())
    if hasattr(value, "tolist"):
        return encode_value(value.tolist())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: encode_value(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    raise TypeError(f"cannot encode {type(value).__name__} for JSON output")


@dataclass
class HypothesisCheck:
    """Outcome of a single verifiable hypothesis.

    ``passed`` is None when the samples cannot decide the hypothesis either
    way; the notes say why.  ``constant`` is the extremal quantity the check
    measured (a supremum, infimum or ratio) and ``witness`` the point where
    it was attained.
    """

    name: str
    passed: bool | None
    constant: float | None = None
    witness: Any = None
    notes: list[str] = field(default_factory=list)
    data: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "constant": encode_value(self.constant),
            "witness": encode_value(self.witness),
            "notes": list(self.notes),
            "data": encode_value(self.data),
        }


@dataclass
class AnalysisReport:
    """Aggregate result of one analysis task."""

    task: str
    verdict: str
    constants: dict[str, Any] = field(default_factory=dict)
    witnesses: dict[str, Any] = field(default_factory=dict)
    checks: list[HypothesisCheck] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    tables: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "task": self.task,
            "verdict": self.verdict,
            "constants": encode_value(self.constants),
            "witnesses": encode_value(self.witnesses),
            "checks": [c.to_json() for c in self.checks],
            "notes": list(self.notes),
            "tables": encode_value(self.tables),
        }

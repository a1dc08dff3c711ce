"""Metric record sheets and their quality checklist."""

from __future__ import annotations

from dataclasses import dataclass, fields

CHECKS = (
    "links_to_strategy",
    "quantifiable",
    "drives_behavior",
    "understandable",
    "actionable",
    "data_exists",
)


@dataclass(frozen=True)
class MetricRecord:
    title: str = ""
    purpose: str = ""
    relates_to: str = ""
    formula: str = ""
    frequency: str = ""
    who_measures: str = ""
    who_acts: str = ""
    what_they_do: str = ""
    source_of_data: str = ""

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricRecord":
        names = {f.name for f in fields(cls)}
        return cls(**{k: str(v) for k, v in doc.items() if k in names and v is not None})

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class QualityReport:
    checks: dict[str, bool]
    traceable: bool

    @property
    def passed(self) -> bool:
        return self.traceable and all(self.checks.values())

    def failures(self) -> list[str]:
        out = [name for name, ok in self.checks.items() if not ok]
        if not self.traceable:
            out.append("traceable")
        return out


def _filled(*values: str) -> bool:
    return all(v.strip() for v in values)


def validate_metric_record(r: MetricRecord) -> QualityReport:
    checks = {
        "links_to_strategy": _filled(r.relates_to),
        "quantifiable": _filled(r.formula),
        "drives_behavior": _filled(r.what_they_do),
        "understandable": _filled(r.title, r.purpose),
        "actionable": _filled(r.who_acts),
        "data_exists": _filled(r.source_of_data),
    }
    # the record sheet must also say how often, by whom, and who acts on what
    traceable = _filled(r.frequency, r.who_measures, r.who_acts, r.what_they_do)
    return QualityReport(checks, traceable)

"""Resilience matrix scorecard: stages x domains, weighted aggregation, gap analysis."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from math import fsum
from typing import Iterable, Mapping

STAGES = ("plan_prepare", "absorb", "recover", "adapt")
DOMAINS = ("physical", "information", "cognitive", "social")
CURRENT = "current"
TARGET = "target"

Cell = tuple[str, str]


class ScorecardError(ValueError):
    pass


@dataclass(frozen=True)
class MetricEntry:
    id: str
    description: str = ""
    score: float | None = None
    weight: float = 1.0

    def __post_init__(self):
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ScorecardError(f"entry {self.id}: score out of range [0,1]: {self.score}")
        if self.weight < 0:
            raise ScorecardError(f"entry {self.id}: negative weight {self.weight}")


@dataclass(frozen=True)
class MatrixCell:
    stage: str
    domain: str
    entries: tuple[MetricEntry, ...] = ()

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ScorecardError(f"unknown stage {self.stage!r}")
        if self.domain not in DOMAINS:
            raise ScorecardError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "entries", tuple(self.entries))

    @property
    def key(self) -> Cell:
        return (self.stage, self.domain)


@dataclass(frozen=True)
class MatrixAssessment:
    cells: tuple[MatrixCell, ...]
    role: str = CURRENT

    def __post_init__(self):
        if self.role not in (CURRENT, TARGET):
            raise ScorecardError(f"unknown assessment role {self.role!r}")
        cells = tuple(self.cells)
        keys = [c.key for c in cells]
        dupes = {k for k in keys if keys.count(k) > 1}
        if dupes:
            raise ScorecardError(f"duplicate matrix cells: {sorted(dupes)}")
        object.__setattr__(self, "cells", cells)

    def cell(self, stage: str, domain: str) -> MatrixCell | None:
        for c in self.cells:
            if c.key == (stage, domain):
                return c
        return None


@dataclass
class MatrixScores:
    cells: dict[Cell, float]
    stages: dict[str, float]
    domains: dict[str, float]
    overall: float
    unscored_entries: list[str] = field(default_factory=list)
    unscored_cells: list[Cell] = field(default_factory=list)


def _weighted_mean(pairs: Iterable[tuple[float, float]]) -> float | None:
    pairs = list(pairs)
    total = fsum(w for _, w in pairs)
    if total <= 0:
        return None
    values = {x for x, w in pairs if w > 0}
    if len(values) == 1:
        # exact for constant inputs, where x * w / w can be off by an ulp
        return values.pop()
    return fsum(x * w for x, w in pairs) / total


def _order(key: Cell) -> tuple[int, int]:
    return (STAGES.index(key[0]), DOMAINS.index(key[1]))


def score_matrix(a: MatrixAssessment, weights: Mapping[Cell, float] | None = None) -> MatrixScores:
    """Aggregate entry scores into cell, stage, domain and overall scores.

    All levels use weighted arithmetic means; ``weights`` gives per-cell
    weights (default 1). Unscored entries are skipped and listed as coverage
    gaps, as are cells with nothing scored.
    """
    weights = dict(weights or {})
    for key, w in weights.items():
        if w < 0:
            raise ScorecardError(f"negative weight for cell {key}")

    cell_scores: dict[Cell, float] = {}
    unscored_entries, unscored_cells = [], []
    for c in sorted(a.cells, key=lambda c: _order(c.key)):
        unscored_entries += [e.id for e in c.entries if e.score is None]
        s = _weighted_mean((e.score, e.weight) for e in c.entries if e.score is not None)
        if s is None:
            unscored_cells.append(c.key)
        else:
            cell_scores[c.key] = s
    if not cell_scores:
        raise ScorecardError("assessment has no scored entries")

    def w(key):
        return weights.get(key, 1.0)

    stages = {}
    for st in STAGES:
        s = _weighted_mean((v, w(k)) for k, v in cell_scores.items() if k[0] == st)
        if s is not None:
            stages[st] = s
    domains = {}
    for dm in DOMAINS:
        s = _weighted_mean((v, w(k)) for k, v in cell_scores.items() if k[1] == dm)
        if s is not None:
            domains[dm] = s
    overall = _weighted_mean((v, w(k)) for k, v in cell_scores.items())
    if overall is None:
        raise ScorecardError("all scored cells have zero weight")
    return MatrixScores(cell_scores, stages, domains, overall, unscored_entries, unscored_cells)


@dataclass(frozen=True)
class CellGap:
    stage: str
    domain: str
    current: float
    target: float

    @property
    def gap(self) -> float:
        return self.target - self.current


@dataclass
class GapReport:
    gaps: list[CellGap]
    # (stage, domain, reason) for cells that could not be compared
    structural: list[tuple[str, str, str]]


def gap_analysis(current: MatrixAssessment, target: MatrixAssessment) -> GapReport:
    """Per-cell ``target - current`` gaps, largest first."""
    cur = score_matrix(current).cells if _any_scored(current) else {}
    tgt = score_matrix(target).cells if _any_scored(target) else {}
    cur_keys = {c.key for c in current.cells}
    tgt_keys = {c.key for c in target.cells}

    gaps, structural = [], []
    for key in sorted(cur_keys | tgt_keys, key=_order):
        if key not in tgt_keys:
            structural.append((*key, "current only"))
        elif key not in cur_keys:
            structural.append((*key, "target only"))
        elif key not in cur or key not in tgt:
            structural.append((*key, "not scored"))
        else:
            gaps.append(CellGap(key[0], key[1], cur[key], tgt[key]))
    # stable sort keeps matrix order among equal gaps
    gaps.sort(key=lambda g: -g.gap)
    return GapReport(gaps, structural)


def _any_scored(a: MatrixAssessment) -> bool:
    return any(e.score is not None for c in a.cells for e in c.entries)


def seed_assessment() -> MatrixAssessment:
    """Unscored 16-cell matrix pre-filled with one example metric per cell."""
    text = resources.files("resilnet.scorecard").joinpath("data/resilience_matrix_seed.json").read_text()
    return assessment_from_dict(json.loads(text))


def assessment_from_dict(doc: Mapping) -> MatrixAssessment:
    cells = []
    for c in doc.get("cells", []):
        entries = tuple(
            MetricEntry(str(e["id"]), e.get("description", ""), e.get("score"), float(e.get("weight", 1.0)))
            for e in c.get("entries", [])
        )
        cells.append(MatrixCell(c["stage"], c["domain"], entries))
    return MatrixAssessment(tuple(cells), doc.get("role", CURRENT))


def assessment_to_dict(a: MatrixAssessment) -> dict:
    return {
        "schema_version": 1,
        "kind": "assessment",
        "role": a.role,
        "cells": [
            {
                "stage": c.stage,
                "domain": c.domain,
                "entries": [
                    {"id": e.id, "description": e.description, "score": e.score, "weight": e.weight}
                    for e in c.entries
                ],
            }
            for c in a.cells
        ],
    }

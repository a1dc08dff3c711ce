import itertools
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resilnet.scorecard import (
    DOMAINS,
    STAGES,
    Asset,
    LossTriple,
    MatrixAssessment,
    MatrixCell,
    MetricEntry,
    MetricRecord,
    Rating,
    ScorecardError,
    assessment_from_dict,
    assessment_to_dict,
    component_test_count,
    composite_priority,
    cost_of_incidents,
    gap_analysis,
    mtbsi,
    mttid,
    mttir,
    rank_assets,
    rogue_change_days,
    root_privilege_count,
    score_matrix,
    seed_assessment,
    streamline_loss,
    validate_metric_record,
    vulnerability_exposure,
)

L, M, H = Rating.LOW, Rating.MODERATE, Rating.HIGH


def full_matrix(score, role="current"):
    cells = tuple(
        MatrixCell(s, d, (MetricEntry(f"{s}-{d}", score=score),)) for s, d in itertools.product(STAGES, DOMAINS)
    )
    return MatrixAssessment(cells, role)


# resilience matrix


def test_all_ones():
    s = score_matrix(full_matrix(1.0))
    assert s.overall == 1.0
    assert set(s.stages.values()) == {1.0} and set(s.domains.values()) == {1.0}


def test_weighted_cell_mean():
    a = MatrixAssessment((MatrixCell("absorb", "physical", (MetricEntry("a", score=0.2), MetricEntry("b", score=0.8, weight=3))),))
    assert score_matrix(a).cells[("absorb", "physical")] == pytest.approx(0.65)


def test_sixteen_halves():
    s = score_matrix(full_matrix(0.5))
    assert len(s.cells) == 16
    assert s.overall == 0.5
    assert all(v == 0.5 for v in [*s.stages.values(), *s.domains.values()])


@given(
    st.floats(0, 1),
    st.lists(st.floats(0.01, 100), min_size=16, max_size=16),
    st.lists(st.floats(0, 100), min_size=16, max_size=16),
)
def test_constant_matrix_idempotent_for_any_weights(c, cell_w, entry_w):
    cells = []
    for (s, d), ew in zip(itertools.product(STAGES, DOMAINS), entry_w):
        cells.append(MatrixCell(s, d, (MetricEntry("x", score=c, weight=ew), MetricEntry("y", score=c, weight=1.0))))
    weights = dict(zip(itertools.product(STAGES, DOMAINS), cell_w))
    s = score_matrix(MatrixAssessment(tuple(cells)), weights)
    assert s.overall == c
    assert all(v == c for v in [*s.cells.values(), *s.stages.values(), *s.domains.values()])


def test_unscored_entries_reported():
    a = MatrixAssessment(
        (
            MatrixCell("adapt", "social", (MetricEntry("a", score=0.4), MetricEntry("b"))),
            MatrixCell("recover", "cognitive", (MetricEntry("c"),)),
        )
    )
    s = score_matrix(a)
    assert s.unscored_entries == ["c", "b"]  # matrix order: recover before adapt
    assert s.unscored_cells == [("recover", "cognitive")]
    assert s.overall == 0.4


def test_scoring_errors():
    with pytest.raises(ScorecardError):
        score_matrix(MatrixAssessment((MatrixCell("adapt", "social", (MetricEntry("a"),)),)))
    with pytest.raises(ScorecardError):
        score_matrix(full_matrix(0.5), {("adapt", "social"): -1})
    with pytest.raises(ScorecardError):
        MetricEntry("a", weight=-1)
    with pytest.raises(ScorecardError):
        MetricEntry("a", score=1.2)
    with pytest.raises(ScorecardError):
        MatrixAssessment((MatrixCell("adapt", "social"), MatrixCell("adapt", "social")))
    with pytest.raises(ScorecardError):
        MatrixCell("respond", "social")


def test_identical_assessments_have_zero_gaps():
    rep = gap_analysis(full_matrix(0.3), full_matrix(0.3, "target"))
    assert len(rep.gaps) == 16
    assert all(g.gap == 0 for g in rep.gaps)
    assert rep.structural == []


def _one(stage, domain, score):
    return MatrixCell(stage, domain, (MetricEntry("m", score=score),))


def test_gap_ranking():
    current = MatrixAssessment((_one("absorb", "physical", 0.25), _one("adapt", "social", 0.9), _one("recover", "information", 0.5)))
    target = MatrixAssessment(
        (_one("absorb", "physical", 0.75), _one("adapt", "social", 0.6), _one("recover", "information", 0.6)), "target"
    )
    rep = gap_analysis(current, target)
    assert [(g.stage, g.domain) for g in rep.gaps] == [("absorb", "physical"), ("recover", "information"), ("adapt", "social")]
    assert rep.gaps[0].gap == 0.5
    assert rep.gaps[-1].gap < 0


def test_structural_gaps():
    current = MatrixAssessment((_one("absorb", "physical", 0.2), _one("adapt", "social", 0.2)))
    target = MatrixAssessment((_one("absorb", "physical", 0.4), _one("recover", "social", 0.9)), "target")
    rep = gap_analysis(current, target)
    assert len(rep.gaps) == 1
    assert rep.structural == [("recover", "social", "target only"), ("adapt", "social", "current only")]


@given(st.lists(st.floats(0, 1), min_size=16, max_size=16), st.floats(-0.5, 0.5))
def test_gap_shift(scores, delta):
    keys = list(itertools.product(STAGES, DOMAINS))
    current = MatrixAssessment(tuple(_one(s, d, 0.5) for s, d in keys))
    shifted = [min(max(x + delta, 0), 1) for x in scores]
    if any(x + delta != y for x, y in zip(scores, shifted)):
        return
    base = gap_analysis(current, MatrixAssessment(tuple(_one(s, d, x) for (s, d), x in zip(keys, scores)), "target"))
    moved = gap_analysis(current, MatrixAssessment(tuple(_one(s, d, x) for (s, d), x in zip(keys, shifted)), "target"))
    before = {(g.stage, g.domain): g.gap for g in base.gaps}
    for g in moved.gaps:
        assert g.gap == pytest.approx(before[(g.stage, g.domain)] + delta, abs=1e-12)


def test_seed_assessment_carries_table_entries():
    a = seed_assessment()
    assert len(a.cells) == 16
    assert a.cell("plan_prepare", "social").entries[0].description == "Establish a cyber-aware culture"
    assert a.cell("adapt", "information").entries[0].description.startswith("Document time between problem and discovery")
    assert assessment_from_dict(assessment_to_dict(a)) == a


# loss and threat ratings


def test_streamline_worked_example():
    assert streamline_loss(LossTriple(L, H, M)) == H
    assert streamline_loss(LossTriple("low", "low", "low")) == L
    assert streamline_loss(LossTriple(H, H, H)) == H


@given(st.permutations([1, 2, 3]), st.lists(st.sampled_from([1, 2, 3]), min_size=3, max_size=3))
def test_streamline_is_commutative_max(perm, values):
    a = streamline_loss(LossTriple(*values))
    b = streamline_loss(LossTriple(*[values[i - 1] for i in perm]))
    assert a == b == max(values)


def test_composite_priority():
    assert composite_priority(H, M) == 5
    assert composite_priority(L, L) == 2
    assert composite_priority(H, H) == 6


def test_composite_priority_monotone():
    for a, b in itertools.product(Rating, Rating):
        for c in Rating:
            if c >= a:
                assert composite_priority(c, b) >= composite_priority(a, b)
            if c >= b:
                assert composite_priority(a, c) >= composite_priority(a, b)


def test_rank_assets_ties():
    assets = [
        Asset("hmi", LossTriple(L, M, L), "high"),     # 2 + 3 = 5
        Asset("plc", LossTriple(H, L, L), "moderate"),  # 3 + 2 = 5, higher loss
        Asset("historian", LossTriple(L, L, L), "low"),
        Asset("scada", LossTriple(L, M, L), "high"),    # same as hmi, later in input
    ]
    ranked = rank_assets(assets)
    assert [r.name for r in ranked] == ["plc", "hmi", "scada", "historian"]
    assert [r.priority for r in ranked] == [5, 5, 5, 2]


def test_ranking_depends_only_on_rating_pairs():
    gen = np.random.default_rng(4)
    pairs = [(int(a), int(b)) for a, b in gen.integers(1, 4, size=(12, 2))]
    a = rank_assets([Asset(f"a{i}", LossTriple(l, 1, 1), t) for i, (l, t) in enumerate(pairs)])
    b = rank_assets([Asset(f"a{i}", LossTriple(1, l, 1), t) for i, (l, t) in enumerate(pairs)])
    assert [r.name for r in a] == [r.name for r in b]


def test_rating_parse():
    assert Rating.parse("Moderate") == M
    assert Rating.parse(3) == H
    with pytest.raises(ValueError):
        Rating.parse("severe")


# formula metrics


def test_mttid_hours():
    assert mttid([timedelta(hours=2), timedelta(hours=4), timedelta(hours=6)]) == timedelta(hours=4)
    assert mttid([2, 4, 6]) == 4


def test_other_means():
    assert mttir([1.0, 3.0]) == 2.0
    assert mtbsi([10, 0, 4]) == 5
    assert mtbsi([timedelta(0), timedelta(days=2), timedelta(days=3)]) == timedelta(days=1.5)


def test_sum_metrics():
    assert vulnerability_exposure([("v1", 10), ("v2", 3)]) == 13
    assert rogue_change_days([5, 2]) == 7
    assert cost_of_incidents({"direct loss": 10_000, "restitution": 5_000}) == 15_000
    assert cost_of_incidents([("direct loss", 10_000), ("restitution", 5_000)]) == 15_000


def test_counts():
    assert root_privilege_count(["ann", "bo", "ann"]) == 2
    assert component_test_count(["plc-1", "rtu-4"]) == 2


def test_formula_errors():
    with pytest.raises(ValueError):
        mttid([])
    with pytest.raises(ValueError):
        mttid([1, -1])
    with pytest.raises(ValueError):
        vulnerability_exposure([("v", -2)])
    with pytest.raises(ValueError):
        mtbsi([1])
    with pytest.raises(ValueError):
        cost_of_incidents([-5])


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=20))
def test_homogeneity(xs):
    doubled = [2 * x for x in xs]
    assert mttid(doubled) == 2 * mttid(xs)
    assert mttir(doubled) == 2 * mttir(xs)
    assert rogue_change_days(doubled) == 2 * rogue_change_days(xs)
    assert cost_of_incidents(doubled) == 2 * cost_of_incidents(xs)
    assert vulnerability_exposure([("v", x) for x in doubled]) == 2 * vulnerability_exposure([("v", x) for x in xs])


# metric records

FULL = dict(
    title="Patch latency",
    purpose="Track how long critical patches wait",
    relates_to="Reduce exposure of control network",
    formula="sum(exposure days) / patches",
    frequency="monthly",
    who_measures="OT security lead",
    who_acts="Plant operations manager",
    what_they_do="Schedule maintenance windows for overdue patches",
    source_of_data="Patch management database",
)


def test_full_record_passes():
    rep = validate_metric_record(MetricRecord(**FULL))
    assert all(rep.checks.values()) and rep.traceable and rep.passed
    assert len(rep.checks) == 6


def test_missing_formula():
    rep = validate_metric_record(MetricRecord(**{**FULL, "formula": " "}))
    assert rep.checks["quantifiable"] is False
    assert not rep.passed


def test_missing_who_acts():
    rep = validate_metric_record(MetricRecord(**{**FULL, "who_acts": ""}))
    assert rep.checks["actionable"] is False
    assert "traceable" in rep.failures()

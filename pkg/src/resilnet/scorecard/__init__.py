from resilnet.scorecard.formulas import (
    component_test_count,
    cost_of_incidents,
    mtbsi,
    mttid,
    mttir,
    rogue_change_days,
    root_privilege_count,
    vulnerability_exposure,
)
from resilnet.scorecard.matrix import (
    DOMAINS,
    STAGES,
    CellGap,
    GapReport,
    MatrixAssessment,
    MatrixCell,
    MatrixScores,
    MetricEntry,
    ScorecardError,
    assessment_from_dict,
    assessment_to_dict,
    gap_analysis,
    score_matrix,
    seed_assessment,
)
from resilnet.scorecard.nsa import Asset, LossTriple, RankedAsset, Rating, composite_priority, rank_assets, streamline_loss
from resilnet.scorecard.records import MetricRecord, QualityReport, validate_metric_record

"""Resilience of interdependent dependency networks, plus security scorecards."""

from resilnet.cascade import AdverseEvent, CfSpec, SimState, Trajectory, apply_event, compute_cf, simulate_run, step
from resilnet.metrics import (
    ResilienceProfile,
    ResilienceReport,
    average_profiles,
    resilience,
    risk_from_robustness,
    robustness,
)
from resilnet.montecarlo import (
    EventModel,
    ExperimentConfig,
    SweepGrid,
    SweepTable,
    enumerate_exact,
    run_experiment,
    run_sweep,
    sample_event,
    synergy_index,
)
from resilnet.network import ModelParams, Network, NetworkSpec, NodeId, SupplyLink, build_network, validate_network

__version__ = "0.1.0"

"""Shared builders for the test suite."""

import numpy as np

from resilnet.cascade import AdverseEvent
from resilnet.montecarlo import EXPLICIT, EventModel, ExperimentConfig
from resilnet.network import ModelParams, NetworkSpec, NodeId, SupplyLink


def oracle_spec(p_s=0.5, t_r=10):
    """Level 1: A1, A2. Level 2: B, supplied by A1 with a spare link from A2."""
    links = (
        SupplyLink(NodeId(1, 0), NodeId(2, 0), "active"),
        SupplyLink(NodeId(1, 1), NodeId(2, 0), "potential"),
    )
    return NetworkSpec((2, 1), ModelParams(p_m=0.0, p_s=p_s, t_r=t_r), links=links)


def oracle_config(runs=10_000, seed=1, p_s=0.5):
    event = EventModel(EXPLICIT, sets=(((1, 0),),))
    return ExperimentConfig(oracle_spec(p_s), event, steps=4, runs=runs, seed=seed)


ORACLE_EVENT = AdverseEvent.of([(1, 0)])


def random_spec(gen: np.random.Generator, max_levels=4, max_size=5, explicit_requires=True) -> NetworkSpec:
    n_levels = int(gen.integers(1, max_levels + 1))
    levels = tuple(int(x) for x in gen.integers(1, max_size + 1, size=n_levels))
    requires = None
    if explicit_requires and n_levels > 2 and gen.random() < 0.5:
        requires = {}
        for k in range(2, n_levels + 1):
            ups = [u for u in range(1, k) if gen.random() < 0.6]
            requires[k] = tuple(ups or [k - 1])
    params = ModelParams(float(gen.random()), float(gen.random()), int(gen.integers(0, 8)))
    return NetworkSpec(levels, params, requires)


def random_event(gen: np.random.Generator, net) -> AdverseEvent:
    nodes = net.nodes()
    hit = gen.random(len(nodes)) < gen.random()
    return AdverseEvent(frozenset(n for n, h in zip(nodes, hit) if h))

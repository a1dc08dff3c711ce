import json
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilnet.network import (
    ModelParams,
    Network,
    NetworkError,
    NetworkSpec,
    NodeId,
    SupplyLink,
    build_network,
    network_to_spec,
    spec_to_dict,
    validate_network,
)

specs = st.builds(
    lambda levels, p_m: NetworkSpec(tuple(levels), ModelParams(p_m=p_m)),
    st.lists(st.integers(1, 5), min_size=1, max_size=4),
    st.floats(0, 1),
)


def test_two_single_nodes_no_redundancy():
    net = build_network(NetworkSpec((1, 1), ModelParams(p_m=0.0)), 0)
    assert net.active_links() == [SupplyLink(NodeId(1, 0), NodeId(2, 0), "active")]
    assert net.potential_links() == []


def test_full_redundancy_adds_the_other_upper_node():
    net = build_network(NetworkSpec((2, 1), ModelParams(p_m=1.0)), 5)
    assert len(net.active_links()) == 1
    (spare,) = net.potential_links()
    (active,) = net.active_links()
    assert spare.target == NodeId(2, 0)
    assert {spare.source, active.source} == {NodeId(1, 0), NodeId(1, 1)}


def test_potential_link_count_matches_binomial_expectation():
    # each (node, required level) pair has (size - 1) candidates, each kept with prob p_m:
    # level 2: 4 nodes x 3 candidates; level 3: 4 nodes x (3 + 3) candidates
    p_m = 0.5
    n_candidates = 4 * 3 + 4 * (3 + 3)
    expected = n_candidates * p_m
    assert expected == 18
    spec = NetworkSpec((4, 4, 4), ModelParams(p_m=p_m))
    counts = np.array([len(build_network(spec, 7 + i).potential_links()) for i in range(10_000)])
    se = sqrt(n_candidates * p_m * (1 - p_m)) / sqrt(counts.size)
    assert abs(counts.mean() - expected) <= 3 * se


@settings(max_examples=200, deadline=None)
@given(specs, st.integers(0, 2**64 - 1))
def test_generated_networks_are_valid(spec, seed):
    net = build_network(spec, seed)
    assert validate_network(net) == []
    for link in net.links:
        assert link.source.level < link.target.level
    for node in net.nodes():
        for u in net.required[node.level - 1]:
            actives = [ln for ln in net.active_links() if ln.target == node and ln.source.level == u]
            assert len(actives) == 1


@settings(max_examples=100, deadline=None)
@given(specs, st.integers(0, 2**64 - 1))
def test_build_is_deterministic(spec, seed):
    a = json.dumps(spec_to_dict(network_to_spec(build_network(spec, seed))), sort_keys=True)
    b = json.dumps(spec_to_dict(network_to_spec(build_network(spec, seed))), sort_keys=True)
    assert a == b


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=4), st.integers(0, 2**32))
def test_redundancy_extremes(levels, seed):
    none = build_network(NetworkSpec(tuple(levels), ModelParams(p_m=0.0)), seed)
    full = build_network(NetworkSpec(tuple(levels), ModelParams(p_m=1.0)), seed)
    assert none.potential_links() == []
    expected = sum(n * sum(levels[u] - 1 for u in range(k)) for k, n in enumerate(levels))
    assert len(full.potential_links()) == expected
    # base wiring does not depend on p_m
    assert none.active_links() == full.active_links()


def test_spares_only_grow_with_redundancy():
    spec = NetworkSpec((5, 5, 5), ModelParams(p_m=0.2))
    low = set(build_network(spec, 11).potential_links())
    high = set(build_network(NetworkSpec((5, 5, 5), ModelParams(p_m=0.7)), 11).potential_links())
    assert low <= high


def test_custom_required_levels():
    spec = NetworkSpec((2, 2, 2), ModelParams(p_m=1.0), requires={3: (2,)})
    net = build_network(spec, 3)
    assert net.required == ((), (1,), (2,))
    assert all(ln.source.level == 2 for ln in net.links if ln.target.level == 3)
    assert validate_network(net) == []


def test_explicit_links_are_honoured_verbatim():
    links = (
        SupplyLink(NodeId(1, 0), NodeId(2, 0), "active"),
        SupplyLink(NodeId(1, 1), NodeId(2, 0), "potential"),
    )
    net = build_network(NetworkSpec((2, 1), ModelParams(p_m=1.0), links=links), 99)
    assert net.links == links


def test_explicit_upward_link_rejected_with_name():
    links = (
        SupplyLink(NodeId(1, 0), NodeId(2, 0), "active"),
        SupplyLink(NodeId(2, 0), NodeId(1, 1), "potential"),
    )
    with pytest.raises(NetworkError) as exc:
        build_network(NetworkSpec((2, 1), links=links), 0)
    assert [v.rule for v in exc.value.violations] == ["direction"]
    assert "(2,0)->(1,1)" in str(exc.value)


def test_explicit_missing_required_level_rejected():
    links = (SupplyLink(NodeId(2, 0), NodeId(3, 0), "active"),)
    with pytest.raises(NetworkError) as exc:
        build_network(NetworkSpec((1, 1, 1), links=links), 0)
    rules = sorted(v.rule for v in exc.value.violations)
    assert rules == ["missing-supply", "missing-supply"]


def _net(links, sizes=(1, 1)):
    return Network(sizes, ((), (1,))[: len(sizes)], tuple(links), ModelParams())


def test_validate_well_formed():
    assert validate_network(_net([SupplyLink(NodeId(1, 0), NodeId(2, 0))])) == []


def test_validate_upward_link():
    bad = _net([SupplyLink(NodeId(1, 0), NodeId(2, 0)), SupplyLink(NodeId(2, 0), NodeId(1, 0), "potential")])
    (v,) = validate_network(bad)
    assert v.rule == "direction"


def test_validate_missing_supply():
    (v,) = validate_network(_net([]))
    assert v.rule == "missing-supply"
    assert "(2,0)" in v.where


def test_validate_duplicates_and_multiple_active():
    net = Network(
        (2, 1),
        ((), (1,)),
        (
            SupplyLink(NodeId(1, 0), NodeId(2, 0)),
            SupplyLink(NodeId(1, 1), NodeId(2, 0)),
            SupplyLink(NodeId(1, 1), NodeId(2, 0), "potential"),
        ),
        ModelParams(),
    )
    rules = sorted(v.rule for v in validate_network(net))
    assert rules == ["duplicate", "multiple-active"]


def test_spec_rejects_bad_levels():
    with pytest.raises(ValueError):
        NetworkSpec((2, 0))
    with pytest.raises(ValueError):
        NetworkSpec((2, 2), requires={2: (2,)})


@pytest.mark.parametrize("kwargs", [{"p_m": -0.1}, {"p_s": 1.5}, {"t_r": -1}, {"t_r": 1.5}])
def test_params_ranges(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_audit_spec_rebuilds_identical_network():
    net = build_network(NetworkSpec((3, 4, 2), ModelParams(p_m=0.4)), 21)
    again = build_network(network_to_spec(net), 0)
    assert set(again.links) == set(net.links)
    assert again.layout.initial_active.tolist() == net.layout.initial_active.tolist()

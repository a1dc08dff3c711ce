"""Layered dependency networks.

A network is a directed acyclic graph arranged in levels, level 1 at the top.
Each node depends on exactly one *active* supplier in every level it requires,
and may hold additional *potential* (spare) supply links from the same levels
that the cascade engine can switch to when the active supplier fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from resilnet import rng

ACTIVE = "active"
POTENTIAL = "potential"


class NetworkError(ValueError):
    """Raised when a network specification cannot be built."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class NodeId(NamedTuple):
    level: int
    ordinal: int

    def __str__(self) -> str:
        return f"({self.level},{self.ordinal})"


@dataclass(frozen=True)
class SupplyLink:
    source: NodeId
    target: NodeId
    status: str = ACTIVE

    def __str__(self) -> str:
        return f"{self.source}->{self.target}[{self.status}]"


@dataclass(frozen=True)
class Violation:
    rule: str
    where: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.rule}: {self.where}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class ModelParams:
    """Model parameters.

    p_m: probability that each alternate upper-level node becomes a spare
        supplier (redundancy).
    p_s: per-step probability that a severed supply is replaced by a spare
        (switching).
    t_r: steps a damaged node stays non-operable (recovery time).
    """

    p_m: float = 0.0
    p_s: float = 0.0
    t_r: int = 1

    def __post_init__(self):
        for name in ("p_m", "p_s"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} out of range [0,1]: {value}")
        if int(self.t_r) != self.t_r or self.t_r < 0:
            raise ValueError(f"t_r must be a non-negative integer: {self.t_r}")


@dataclass(frozen=True)
class NetworkSpec:
    levels: tuple[int, ...]
    params: ModelParams = field(default_factory=ModelParams)
    # level -> upper levels it needs supply from; missing levels require all upper levels
    requires: Mapping[int, tuple[int, ...]] | None = None
    links: tuple[SupplyLink, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(int(n) for n in self.levels))
        if not self.levels:
            raise ValueError("a network needs at least one level")
        for k, n in enumerate(self.levels, start=1):
            if n < 1:
                raise ValueError(f"level {k} must contain at least one node, got {n}")
        if self.requires is not None:
            req = {int(k): tuple(sorted(set(int(u) for u in v))) for k, v in self.requires.items()}
            for k, ups in req.items():
                if not 2 <= k <= len(self.levels):
                    raise ValueError(f"requires: level {k} does not exist or is the top level")
                if any(not 1 <= u < k for u in ups):
                    raise ValueError(f"requires: level {k} may only require strictly upper levels, got {list(ups)}")
            object.__setattr__(self, "requires", req)
        if self.links is not None:
            object.__setattr__(self, "links", tuple(self.links))

    def required_levels(self) -> tuple[tuple[int, ...], ...]:
        return resolve_requires(len(self.levels), self.requires)


def resolve_requires(n_levels: int, requires: Mapping[int, Iterable[int]] | None) -> tuple[tuple[int, ...], ...]:
    """Required upper levels for every level, indexed by ``level - 1``."""
    out = []
    for k in range(1, n_levels + 1):
        if requires is not None and k in requires:
            out.append(tuple(sorted(requires[k])))
        else:
            out.append(tuple(range(1, k)))
    return tuple(out)


class Layout:
    """Flat-array view of a network used by the cascade engine.

    A *slot* is one ``(node, required level)`` pair. Slots are ordered by
    target level, then target ordinal, then required level, so the slots of
    each level form a contiguous ``(n_nodes, n_required)`` block.
    """

    def __init__(self, net: "Network"):
        sizes = net.level_sizes
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.n_nodes = int(self.offsets[-1])
        self.node_level = np.repeat(np.arange(1, len(sizes) + 1), sizes)

        slot_target, slot_level = [], []
        self.level_blocks = []  # (level, first node, last node, first slot, n_required)
        for k, n in enumerate(sizes, start=1):
            req = net.required[k - 1]
            first_slot = len(slot_target)
            for o in range(n):
                for u in req:
                    slot_target.append(self.offsets[k - 1] + o)
                    slot_level.append(u)
            self.level_blocks.append((k, int(self.offsets[k - 1]), int(self.offsets[k]), first_slot, len(req)))
        self.slot_target = np.asarray(slot_target, dtype=np.int64)
        self.slot_level = np.asarray(slot_level, dtype=np.int64)
        self.n_slots = len(slot_target)
        index = {(int(t), int(u)): s for s, (t, u) in enumerate(zip(slot_target, slot_level))}
        self.slot_index = index

        active = np.full(self.n_slots, -1, dtype=np.int64)
        spares: list[list[int]] = [[] for _ in range(self.n_slots)]
        for link in net.links:
            s = index.get((self.flat(link.target), link.source.level))
            if s is None:
                continue
            if link.status == ACTIVE:
                active[s] = self.flat(link.source)
            else:
                spares[s].append(self.flat(link.source))
        self.initial_active = active
        width = max((len(c) for c in spares), default=0)
        self.candidates = np.full((self.n_slots, max(width, 1)), -1, dtype=np.int64)
        for s, c in enumerate(spares):
            c.sort()
            self.candidates[s, : len(c)] = c
        self.candidate_mask = self.candidates >= 0
        self.n_potential = int(self.candidate_mask.sum())

    def flat(self, node: NodeId) -> int:
        return int(self.offsets[node.level - 1] + node.ordinal)

    def node(self, index: int) -> NodeId:
        level = int(self.node_level[index])
        return NodeId(level, int(index - self.offsets[level - 1]))


@dataclass(frozen=True)
class Network:
    level_sizes: tuple[int, ...]
    required: tuple[tuple[int, ...], ...]
    links: tuple[SupplyLink, ...]
    params: ModelParams

    @cached_property
    def layout(self) -> Layout:
        return Layout(self)

    @property
    def n_nodes(self) -> int:
        return sum(self.level_sizes)

    def nodes(self) -> list[NodeId]:
        return [NodeId(k, o) for k, n in enumerate(self.level_sizes, start=1) for o in range(n)]

    def active_links(self) -> list[SupplyLink]:
        return [ln for ln in self.links if ln.status == ACTIVE]

    def potential_links(self) -> list[SupplyLink]:
        return [ln for ln in self.links if ln.status == POTENTIAL]

    def with_params(self, **changes) -> "Network":
        """Same wiring with different ``p_s``/``t_r`` (``p_m`` only affects construction)."""
        return replace(self, params=replace(self.params, **changes))

    def has_node(self, node: NodeId) -> bool:
        return 1 <= node.level <= len(self.level_sizes) and 0 <= node.ordinal < self.level_sizes[node.level - 1]


def build_network(spec: NetworkSpec, topology_seed: int) -> Network:
    """Build a network from ``spec``.

    With an explicit link list the links are taken verbatim and validated.
    Otherwise each node draws one active supplier uniformly from every
    required upper level (``TOPOLOGY_BASE`` stream), then every other node of
    that level becomes a spare supplier with probability ``p_m``
    (``TOPOLOGY_POTENTIAL`` stream). The spare draws are made for all
    candidates regardless of ``p_m`` so that wiring is coupled across ``p_m``
    values: a larger ``p_m`` only ever adds spares.
    """
    required = spec.required_levels()
    if spec.links is not None:
        net = Network(spec.levels, required, tuple(spec.links), spec.params)
        problems = validate_network(net)
        if problems:
            raise NetworkError(problems)
        return net

    base = rng.stream_rng(topology_seed, rng.TOPOLOGY_BASE)
    spare = rng.stream_rng(topology_seed, rng.TOPOLOGY_POTENTIAL)
    p_m = spec.params.p_m
    links: list[SupplyLink] = []
    for k, n in enumerate(spec.levels, start=1):
        for o in range(n):
            target = NodeId(k, o)
            for u in required[k - 1]:
                size = spec.levels[u - 1]
                chosen = int(base.integers(size))
                draws = spare.random(size)
                links.append(SupplyLink(NodeId(u, chosen), target, ACTIVE))
                for j in range(size):
                    if j != chosen and draws[j] < p_m:
                        links.append(SupplyLink(NodeId(u, j), target, POTENTIAL))
    return Network(spec.levels, required, tuple(links), spec.params)


def validate_network(net: Network) -> list[Violation]:
    """Check the structural invariants of ``net``; an empty list means valid."""
    problems: list[Violation] = []
    n_levels = len(net.level_sizes)
    if len(net.required) != n_levels:
        problems.append(Violation("required-levels", "network", "one entry per level expected"))
        return problems
    for k, req in enumerate(net.required, start=1):
        for u in req:
            if not 1 <= u < k:
                problems.append(Violation("required-levels", f"level {k}", f"level {u} is not strictly above"))

    seen: set[tuple[NodeId, NodeId]] = set()
    active: dict[tuple[NodeId, int], int] = {}
    for link in net.links:
        where = str(link)
        if link.status not in (ACTIVE, POTENTIAL):
            problems.append(Violation("status", where, f"unknown status {link.status!r}"))
            continue
        if not (net.has_node(link.source) and net.has_node(link.target)):
            problems.append(Violation("unknown-node", where))
            continue
        if link.source == link.target:
            problems.append(Violation("self-link", where))
            continue
        if link.source.level >= link.target.level:
            problems.append(Violation("direction", where, "links must point to a lower level"))
            continue
        if link.source.level not in net.required[link.target.level - 1]:
            problems.append(Violation("not-required", where, f"level {link.target.level} does not require level {link.source.level}"))
            continue
        pair = (link.source, link.target)
        if pair in seen:
            problems.append(Violation("duplicate", where))
            continue
        seen.add(pair)
        if link.status == ACTIVE:
            key = (link.target, link.source.level)
            active[key] = active.get(key, 0) + 1

    for node in net.nodes():
        for u in net.required[node.level - 1]:
            count = active.get((node, u), 0)
            if count == 0:
                problems.append(Violation("missing-supply", f"node {node}", f"no active supplier from level {u}"))
            elif count > 1:
                problems.append(Violation("multiple-active", f"node {node}", f"{count} active suppliers from level {u}"))
    return problems


def link_to_dict(link: SupplyLink) -> dict:
    return {"source": list(link.source), "target": list(link.target), "status": link.status}


def spec_to_dict(spec: NetworkSpec) -> dict:
    """Config-document fragment (``network`` and ``params`` sections) for ``spec``."""
    network: dict = {"levels": list(spec.levels)}
    if spec.requires is not None:
        network["requires"] = {str(k): list(v) for k, v in sorted(spec.requires.items())}
    if spec.links is not None:
        network["links"] = [link_to_dict(ln) for ln in spec.links]
    p = spec.params
    return {"network": network, "params": {"p_m": p.p_m, "p_s": p.p_s, "t_r": p.t_r}}


def network_to_spec(net: Network) -> NetworkSpec:
    """Spec with the realized wiring as an explicit link list (for auditing)."""
    requires = {k: req for k, req in enumerate(net.required, start=1) if k > 1}
    links = tuple(sorted(net.links, key=lambda ln: (ln.target, ln.source.level, ln.status != ACTIVE, ln.source)))
    return NetworkSpec(net.level_sizes, net.params, requires, links)

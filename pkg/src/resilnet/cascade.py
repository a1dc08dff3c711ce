"""Single-run cascade simulation.

Damage and function are tracked separately. A node is *operable* unless it
was hit by the adverse event and is still within its recovery time. A node is
*functional* if it is operable and every one of its active suppliers is
functional; level-1 nodes need no supply.

Each step applies, in order: recovery, switching, top-down propagation,
measurement.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Callable, Iterable

import numpy as np

from resilnet.network import Network, NodeId

FRACTION_ALL = "fraction_all"
FRACTION_BOTTOM = "fraction_bottom"
WEIGHTED = "weighted"
CF_MODES = (FRACTION_ALL, FRACTION_BOTTOM, WEIGHTED)

DrawSource = Callable[[int], np.ndarray]


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class AdverseEvent:
    nodes: frozenset[NodeId] = frozenset()

    @classmethod
    def of(cls, nodes: Iterable) -> "AdverseEvent":
        return cls(frozenset(NodeId(*n) for n in nodes))

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class CfSpec:
    """How critical functionality is measured.

    ``weights`` is only used in ``weighted`` mode and holds one non-negative
    weight per node, listed level by level.
    """

    mode: str = FRACTION_ALL
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.mode not in CF_MODES:
            raise SimulationError(f"unknown cf mode {self.mode!r}")
        if self.mode == WEIGHTED:
            if self.weights is None:
                raise SimulationError("weighted cf mode needs weights")
            w = tuple(float(x) for x in self.weights)
            if any(x < 0 for x in w):
                raise SimulationError("cf weights must be non-negative")
            if fsum(w) <= 0:
                raise SimulationError("cf weights must not all be zero")
            object.__setattr__(self, "weights", w)


@dataclass
class SimState:
    downtime: np.ndarray     # remaining steps until operable, per node; 0 = operable
    functional: np.ndarray   # bool per node
    active: np.ndarray       # active supplier (flat node index) per slot
    spare: np.ndarray        # bool (slot, candidate): spare link still available
    t: int = 0

    def copy(self) -> "SimState":
        return SimState(self.downtime.copy(), self.functional.copy(), self.active.copy(), self.spare.copy(), self.t)

    @property
    def operable(self) -> np.ndarray:
        return self.downtime == 0


@dataclass(frozen=True)
class Trajectory:
    cf_samples: tuple[float, ...]
    steps: int
    cf_mode: str

    def __post_init__(self):
        if len(self.cf_samples) != self.steps + 1:
            raise SimulationError("trajectory length must be steps + 1")


def _propagate(net: Network, operable: np.ndarray, active: np.ndarray) -> np.ndarray:
    lay = net.layout
    functional = operable.copy()
    for _, lo, hi, first_slot, n_req in lay.level_blocks:
        if n_req == 0:
            continue
        n = hi - lo
        sources = active[first_slot : first_slot + n * n_req]
        supplied = functional[sources].reshape(n, n_req).all(axis=1)
        functional[lo:hi] &= supplied
    return functional


def apply_event(net: Network, ev: AdverseEvent) -> SimState:
    """Initial state at ``t = 0`` with the event's nodes damaged.

    Damaged nodes stay down for ``max(t_r, 1)`` steps, so the damage is always
    visible in the ``t = 0`` sample.
    """
    lay = net.layout
    if np.any(lay.initial_active < 0):
        raise SimulationError("network has slots without an active supplier")
    downtime = np.zeros(lay.n_nodes, dtype=np.int64)
    hit = max(int(net.params.t_r), 1)
    for node in ev.nodes:
        if not net.has_node(node):
            raise SimulationError(f"adverse event names unknown node {node}")
        downtime[lay.flat(node)] = hit
    active = lay.initial_active.copy()
    functional = _propagate(net, downtime == 0, active)
    return SimState(downtime, functional, active, lay.candidate_mask.copy(), 0)


def switch_attempts(state: SimState, net: Network) -> tuple[np.ndarray, np.ndarray]:
    """Slots that attempt a switch on the next step, and the chosen candidate column.

    A slot attempts a switch when its active supplier was non-functional at
    the end of the previous step and at least one spare supplier was
    functional then. The lowest-ordinal functional spare is the candidate.
    """
    lay = net.layout
    func = state.functional
    severed = ~func[state.active]
    eligible = state.spare & func[np.where(lay.candidate_mask, lay.candidates, 0)]
    attempting = severed & eligible.any(axis=1)
    choice = eligible.argmax(axis=1)
    return attempting, choice


def step(state: SimState, net: Network, draws: DrawSource, steps: int | None = None) -> SimState:
    """Advance ``state`` by one step, returning a new state."""
    if steps is not None and state.t >= steps:
        raise SimulationError(f"cannot step past the control window (t={state.t}, steps={steps})")
    lay = net.layout
    t = state.t + 1
    new = state.copy()
    new.t = t

    # recovery
    np.subtract(new.downtime, 1, out=new.downtime, where=new.downtime > 0)

    # switching, against previous-step functional status
    attempting, choice = switch_attempts(state, net)
    if attempting.any():
        u = np.asarray(draws(t), dtype=float)
        success = attempting & (u < net.params.p_s)
        slots = np.flatnonzero(success)
        cols = choice[slots]
        new.active[slots] = lay.candidates[slots, cols]
        new.spare[slots, cols] = False

    new.functional = _propagate(net, new.downtime == 0, new.active)
    return new


def compute_cf(state: SimState, net: Network, cf: CfSpec) -> float:
    func = state.functional
    if cf.mode == FRACTION_ALL:
        return int(func.sum()) / func.size
    if cf.mode == FRACTION_BOTTOM:
        lo = int(net.layout.offsets[-2])
        bottom = func[lo:]
        return int(bottom.sum()) / bottom.size
    w = cf.weights
    if len(w) != func.size:
        raise SimulationError(f"cf weights: expected {func.size} values, got {len(w)}")
    return fsum(x for x, f in zip(w, func) if f) / fsum(w)


def simulate_run(net: Network, ev: AdverseEvent, steps: int, cf: CfSpec, draws: DrawSource) -> Trajectory:
    if steps < 1:
        raise SimulationError("steps must be >= 1")
    state = apply_event(net, ev)
    samples = [compute_cf(state, net, cf)]
    for _ in range(steps):
        state = step(state, net, draws)
        samples.append(compute_cf(state, net, cf))
    return Trajectory(tuple(samples), steps, cf.mode)


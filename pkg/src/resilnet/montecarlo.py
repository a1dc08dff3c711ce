"""Monte Carlo experiments, parameter sweeps and exact small-instance enumeration."""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import comb, fsum, sqrt
from statistics import NormalDist
from typing import Sequence

import numpy as np

from resilnet import rng
from resilnet.cascade import (
    AdverseEvent,
    CfSpec,
    SimState,
    apply_event,
    compute_cf,
    simulate_run,
    step,
    switch_attempts,
)
from resilnet.metrics import (
    ResilienceProfile,
    ResilienceReport,
    profile_from_samples,
    resilience,
    risk_from_robustness,
    robustness,
    run_resilience,
)
from resilnet.network import Network, NetworkSpec, NodeId, build_network, spec_to_dict

RANDOM_FRACTION = "random_fraction"
FIXED_COUNT = "fixed_count"
EXPLICIT = "explicit"
EVENT_KINDS = (RANDOM_FRACTION, FIXED_COUNT, EXPLICIT)

MAX_SAMPLES = 10**8
DEFAULT_EXACT_BOUND = 2**20
THREADS_ENV = "RESILNET_THREADS"


class ConfigError(ValueError):
    pass


class EnumerationLimitError(RuntimeError):
    """The exact enumerator would exceed its outcome bound."""


@dataclass(frozen=True)
class EventModel:
    kind: str = RANDOM_FRACTION
    fraction: float = 0.1
    count: int = 0
    sets: tuple[frozenset[NodeId], ...] = ()

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ConfigError(f"unknown event kind {self.kind!r}")
        if self.kind == RANDOM_FRACTION and not 0.0 <= self.fraction <= 1.0:
            raise ConfigError(f"event fraction out of range [0,1]: {self.fraction}")
        if self.kind == FIXED_COUNT and self.count < 0:
            raise ConfigError(f"event count must be >= 0: {self.count}")
        if self.kind == EXPLICIT:
            sets = tuple(frozenset(NodeId(*n) for n in s) for s in self.sets)
            if not sets:
                raise ConfigError("explicit event model needs at least one node set")
            object.__setattr__(self, "sets", sets)

    def check(self, net: Network) -> None:
        self.check_levels(net.level_sizes)

    def check_levels(self, levels: Sequence[int]) -> None:
        n_nodes = sum(levels)
        if self.kind == FIXED_COUNT and self.count > n_nodes:
            raise ConfigError(f"event count {self.count} exceeds node count {n_nodes}")
        if self.kind == EXPLICIT:
            for s in self.sets:
                bad = [n for n in sorted(s) if not (1 <= n.level <= len(levels) and 0 <= n.ordinal < levels[n.level - 1])]
                if bad:
                    raise ConfigError(f"explicit event names unknown node {bad[0]}")

    def to_dict(self) -> dict:
        if self.kind == RANDOM_FRACTION:
            return {"kind": self.kind, "d": self.fraction}
        if self.kind == FIXED_COUNT:
            return {"kind": self.kind, "k": self.count}
        return {"kind": self.kind, "sets": [sorted([list(n) for n in s]) for s in self.sets]}


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkSpec
    event: EventModel = field(default_factory=EventModel)
    steps: int = 20
    cf: CfSpec = field(default_factory=CfSpec)
    runs: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.runs * (self.steps + 1) > MAX_SAMPLES:
            raise ConfigError(f"runs x (steps + 1) exceeds {MAX_SAMPLES} samples")
        rng.check_seed(self.seed)
        self.event.check_levels(self.network.levels)

    def to_dict(self) -> dict:
        net = spec_to_dict(self.network)
        doc = {
            "schema_version": 1,
            "network": net["network"],
            "params": net["params"],
            "event": self.event.to_dict(),
            "steps": self.steps,
            "cf": {"mode": self.cf.mode},
            "runs": self.runs,
            "seed": self.seed,
        }
        if self.cf.weights is not None:
            doc["cf"]["weights"] = list(self.cf.weights)
        return doc

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def with_params(self, **changes) -> "ExperimentConfig":
        spec = replace(self.network, params=replace(self.network.params, **changes))
        return replace(self, network=spec)


@dataclass(frozen=True)
class ExperimentResult:
    profile: ResilienceProfile
    report: ResilienceReport
    run_values: np.ndarray  # per-run resilience, index = run
    samples: np.ndarray     # (runs, steps + 1) critical functionality

    @property
    def std_error(self) -> float:
        n = self.run_values.size
        return float(np.std(self.run_values, ddof=1) / sqrt(n)) if n > 1 else 0.0

    def __iter__(self):
        # allows ``profile, report = run_experiment(cfg)``
        return iter((self.profile, self.report))


def sample_event(model: EventModel, net: Network, seed: int, run: int) -> AdverseEvent:
    """Adverse event for run ``run``; deterministic in ``(seed, run)``."""
    if model.kind == EXPLICIT:
        return AdverseEvent(model.sets[run % len(model.sets)])
    nodes = net.nodes()
    gen = rng.stream_rng(seed, rng.EVENTS, run)
    if model.kind == RANDOM_FRACTION:
        hit = gen.random(len(nodes)) < model.fraction
        return AdverseEvent(frozenset(n for n, h in zip(nodes, hit) if h))
    picked = gen.choice(len(nodes), size=model.count, replace=False)
    return AdverseEvent(frozenset(nodes[int(i)] for i in picked))


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "0") or 0)
    if workers < 0:
        raise ConfigError("worker count must be >= 0")
    return workers or (os.cpu_count() or 1)


def simulate_runs(cfg: ExperimentConfig, net: Network, workers: int | None = None) -> np.ndarray:
    """Critical-functionality samples of every run, shape ``(runs, steps + 1)``."""
    cfg.event.check(net)
    n_slots = net.layout.n_slots
    samples = np.empty((cfg.runs, cfg.steps + 1))

    def work(indices):
        for i in indices:
            ev = sample_event(cfg.event, net, cfg.seed, i)
            draws = rng.KeyedDraws(cfg.seed, i, n_slots)
            samples[i] = simulate_run(net, ev, cfg.steps, cfg.cf, draws).cf_samples

    n_workers = min(resolve_workers(workers), cfg.runs)
    if n_workers == 1:
        work(range(cfg.runs))
    else:
        with ThreadPoolExecutor(n_workers) as pool:
            list(pool.map(work, [range(k, cfg.runs, n_workers) for k in range(n_workers)]))
    return samples


def summarize(samples: np.ndarray, cfg: ExperimentConfig) -> ExperimentResult:
    profile = profile_from_samples(samples)
    m = robustness(profile)
    report = ResilienceReport(resilience(profile), m, risk_from_robustness(m), profile.runs, cfg.seed, cfg.digest())
    return ExperimentResult(profile, report, run_resilience(samples), samples)


def run_experiment(cfg: ExperimentConfig, workers: int | None = None, network: Network | None = None) -> ExperimentResult:
    """Run ``cfg.runs`` seeded simulations and aggregate them.

    Results are identical for any worker count: each run is keyed by its
    index and aggregation is order independent.
    """
    net = network if network is not None else build_network(cfg.network, cfg.seed)
    return summarize(simulate_runs(cfg, net, workers), cfg)


@dataclass(frozen=True)
class SweepGrid:
    base: ExperimentConfig
    p_m: tuple[float, ...]
    p_s: tuple[float, ...]
    t_r: tuple[int, ...]

    def __post_init__(self):
        for name in ("p_m", "p_s", "t_r"):
            values = tuple(getattr(self, name))
            if not values:
                raise ConfigError(f"sweep.{name}: needs at least one value")
            object.__setattr__(self, name, values)
        for v in self.p_m + self.p_s:
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"sweep probability out of range [0,1]: {v}")
        for v in self.t_r:
            if int(v) != v or v < 0:
                raise ConfigError(f"sweep t_r must be a non-negative integer: {v}")

    def points(self):
        return itertools.product(self.p_m, self.p_s, self.t_r)


@dataclass(frozen=True)
class SweepRow:
    p_m: float
    p_s: float
    t_r: int
    resilience: float
    robustness: float
    risk: float
    runs: int


@dataclass
class SweepTable:
    rows: list[SweepRow]
    run_values: dict[tuple[float, float, int], np.ndarray] = field(default_factory=dict, compare=False, repr=False)

    def row(self, p_m: float, p_s: float, t_r: int | None = None) -> SweepRow:
        for r in self.rows:
            if r.p_m == p_m and r.p_s == p_s and (t_r is None or r.t_r == t_r):
                return r
        raise KeyError((p_m, p_s, t_r))


def run_sweep(grid: SweepGrid, workers: int | None = None) -> SweepTable:
    """One experiment per grid point with common random numbers.

    Every point uses the same master seed, so events, base wiring and
    switching draws are shared. The network is rebuilt only when ``p_m``
    changes, and then only the spare links differ.
    """
    rows, values = [], {}
    nets: dict[float, Network] = {}
    for p_m, p_s, t_r in grid.points():
        cfg = grid.base.with_params(p_m=p_m, p_s=p_s, t_r=int(t_r))
        if p_m not in nets:
            nets[p_m] = build_network(cfg.network, cfg.seed)
        net = nets[p_m].with_params(p_s=p_s, t_r=int(t_r))
        res = run_experiment(cfg, workers, network=net)
        rep = res.report
        rows.append(SweepRow(p_m, p_s, int(t_r), rep.resilience, rep.robustness, rep.risk, rep.runs))
        values[(p_m, p_s, int(t_r))] = res.run_values
    return SweepTable(rows, values)


def _corners(table: SweepTable, low, high, t_r):
    (lo_m, lo_s), (hi_m, hi_s) = low, high
    keys = [(lo_m, lo_s), (hi_m, lo_s), (lo_m, hi_s), (hi_m, hi_s)]
    found = []
    for p_m, p_s in keys:
        try:
            found.append(table.row(p_m, p_s, t_r))
        except KeyError:
            raise ConfigError(f"sweep table has no point p_m={p_m}, p_s={p_s}") from None
    return found


def synergy_index(table: SweepTable, low: tuple[float, float], high: tuple[float, float], t_r: int | None = None) -> float:
    """Interaction term of the ``p_m`` x ``p_s`` corners; positive means synergy.

    ``[R(hi,hi) - R(lo,lo)] - [R(hi,lo) - R(lo,lo)] - [R(lo,hi) - R(lo,lo)]``
    """
    ll, hl, lh, hh = (r.resilience for r in _corners(table, low, high, t_r))
    return (hh - ll) - (hl - ll) - (lh - ll)


def synergy_samples(table: SweepTable, low, high, t_r: int | None = None) -> np.ndarray:
    """Per-run interaction terms (paired across corners by run index)."""
    ll, hl, lh, hh = (table.run_values[(r.p_m, r.p_s, r.t_r)] for r in _corners(table, low, high, t_r))
    return (hh - ll) - (hl - ll) - (lh - ll)


@dataclass(frozen=True)
class PairedTest:
    mean: float
    std_error: float
    z: float
    n: int

    def positive(self, confidence: float = 0.95) -> bool:
        """One-sided test that the mean difference is > 0."""
        if self.std_error == 0.0:
            return self.mean > 0.0
        return self.z > NormalDist().inv_cdf(confidence)


def paired_test(diff: Sequence[float]) -> PairedTest:
    d = np.asarray(diff, dtype=float)
    n = d.size
    mean = fsum(d) / n
    se = float(np.std(d, ddof=1) / sqrt(n)) if n > 1 else 0.0
    z = mean / se if se > 0 else float("inf") if mean > 0 else float("-inf") if mean < 0 else 0.0
    return PairedTest(mean, se, z, n)


# exact enumeration

@dataclass(frozen=True)
class ExactResult:
    profile: ResilienceProfile
    report: ResilienceReport
    outcomes: int

    def __iter__(self):
        return iter((self.profile, self.report))


def enumerate_events(model: EventModel, net: Network, bound: int = DEFAULT_EXACT_BOUND) -> list[tuple[AdverseEvent, float]]:
    """Every possible adverse event with its probability."""
    model.check(net)
    nodes = net.nodes()
    n = len(nodes)
    if model.kind == EXPLICIT:
        w = 1.0 / len(model.sets)
        return [(AdverseEvent(s), w) for s in model.sets]
    if model.kind == FIXED_COUNT:
        total = comb(n, model.count)
        if total > bound:
            raise EnumerationLimitError(f"{total} events exceed the bound {bound}")
        return [(AdverseEvent(frozenset(c)), 1.0 / total) for c in itertools.combinations(nodes, model.count)]
    d = model.fraction
    if d in (0.0, 1.0):
        return [(AdverseEvent(frozenset(nodes) if d == 1.0 else frozenset()), 1.0)]
    if 2**n > bound:
        raise EnumerationLimitError(f"2^{n} events exceed the bound {bound}")
    out = []
    for mask in itertools.product((False, True), repeat=n):
        k = sum(mask)
        out.append((AdverseEvent(frozenset(x for x, m in zip(nodes, mask) if m)), d**k * (1 - d) ** (n - k)))
    return out


def enumerate_exact(cfg: ExperimentConfig, bound: int = DEFAULT_EXACT_BOUND, network: Network | None = None) -> ExactResult:
    """Exact expected profile by enumerating events and every switching outcome.

    Each step, every slot that attempts a switch either succeeds (probability
    ``p_s``) or fails; all combinations are followed. Raises
    :class:`EnumerationLimitError` once more than ``bound`` outcomes would be
    needed.
    """
    net = network if network is not None else build_network(cfg.network, cfg.seed)
    p_s = net.params.p_s
    n_slots = net.layout.n_slots
    steps = cfg.steps
    first = [[] for _ in range(steps + 1)]
    second = [[] for _ in range(steps + 1)]
    leaves = 0

    def visit(state: SimState, weight: float):
        nonlocal leaves
        cf = compute_cf(state, net, cfg.cf)
        first[state.t].append(weight * cf)
        second[state.t].append(weight * cf * cf)
        if state.t == steps:
            leaves += 1
            if leaves > bound:
                raise EnumerationLimitError(f"more than {bound} switching outcomes")
            return
        attempting, _ = switch_attempts(state, net)
        slots = np.flatnonzero(attempting)
        options = [(True, p_s), (False, 1.0 - p_s)]
        options = [o for o in options if o[1] > 0.0]
        for combo in itertools.product(options, repeat=len(slots)):
            u = np.ones(n_slots)
            w = weight
            for s, (ok, p) in zip(slots, combo):
                if ok:
                    u[s] = 0.0
                w *= p
            visit(step(state, net, lambda t, u=u: u), w)

    for ev, w in enumerate_events(cfg.event, net, bound):
        if w > 0.0:
            visit(apply_event(net, ev), w)

    means = [fsum(col) for col in first]
    stds = [sqrt(max(fsum(sq) - m * m, 0.0)) for sq, m in zip(second, means)]
    profile = ResilienceProfile(tuple(means), tuple(stds), leaves)
    m = robustness(profile)
    report = ResilienceReport(resilience(profile), m, risk_from_robustness(m), leaves, cfg.seed, cfg.digest())
    return ExactResult(profile, report, leaves)

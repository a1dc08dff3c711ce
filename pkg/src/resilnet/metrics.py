"""Resilience profile, resilience R, robustness M and risk."""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum, sqrt
from typing import Sequence

import numpy as np

from resilnet.cascade import Trajectory


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class ResilienceProfile:
    """Event-averaged critical functionality, one value per step ``t = 0..S``."""

    mean_cf: tuple[float, ...]
    std_cf: tuple[float, ...]
    runs: int

    def __post_init__(self):
        if len(self.mean_cf) != len(self.std_cf) or len(self.mean_cf) < 2:
            raise MetricsError("profile needs matching mean/std series of length >= 2")
        if self.runs < 1:
            raise MetricsError("profile needs at least one run")

    @property
    def steps(self) -> int:
        return len(self.mean_cf) - 1

    @property
    def t_norm(self) -> tuple[float, ...]:
        s = self.steps
        return tuple(t / s for t in range(s + 1))


@dataclass(frozen=True)
class ResilienceReport:
    resilience: float
    robustness: float
    risk: float
    runs: int
    seed: int
    config_digest: str


def average_profiles(trajectories: Sequence[Trajectory]) -> ResilienceProfile:
    """Per-step mean and sample standard deviation over runs.

    Sums are exactly rounded (``math.fsum``), so the result does not depend on
    the order in which runs are supplied.
    """
    if not trajectories:
        raise MetricsError("need at least one trajectory")
    first = trajectories[0]
    for tr in trajectories:
        if tr.steps != first.steps or tr.cf_mode != first.cf_mode:
            raise MetricsError("trajectories differ in length or cf mode")
    return profile_from_samples(np.array([tr.cf_samples for tr in trajectories], dtype=float))


def profile_from_samples(samples: np.ndarray) -> ResilienceProfile:
    """Same as :func:`average_profiles` for an ``(runs, S + 1)`` array."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n < 1:
        raise MetricsError("need at least one trajectory")
    means, stds = [], []
    for col in samples.T:
        m = fsum(col) / n
        means.append(m)
        stds.append(sqrt(fsum((col - m) ** 2) / (n - 1)) if n > 1 else 0.0)
    return ResilienceProfile(tuple(means), tuple(stds), n)


def resilience(profile: ResilienceProfile) -> float:
    """Area under the profile over normalized time, as the mean of the S+1 samples."""
    r = fsum(profile.mean_cf) / len(profile.mean_cf)
    return min(max(r, 0.0), 1.0)


def robustness(profile: ResilienceProfile) -> float:
    return min(profile.mean_cf)


def risk_from_robustness(m: float) -> float:
    if not 0.0 <= m <= 1.0:
        raise MetricsError(f"robustness out of range [0,1]: {m}")
    return 1.0 - m


def run_resilience(samples: np.ndarray) -> np.ndarray:
    """Per-run resilience (mean of each run's samples), used for paired statistics."""
    samples = np.asarray(samples, dtype=float)
    return np.array([fsum(row) / row.size for row in samples])

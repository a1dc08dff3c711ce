"""Formula-based security metrics for IT and control-system networks.

Durations may be plain numbers (in whatever unit the caller uses) or
``datetime.timedelta`` values; results come back in the same form.
"""

from __future__ import annotations

from datetime import timedelta
from math import fsum
from typing import Iterable, Mapping, Sequence


def _check_duration(x, what: str):
    zero = timedelta(0) if isinstance(x, timedelta) else 0
    if x < zero:
        raise ValueError(f"{what} must be non-negative, got {x}")
    return x


def _total(values: Sequence, what: str):
    values = [_check_duration(v, what) for v in values]
    if values and isinstance(values[0], timedelta):
        return sum(values, timedelta(0))
    return fsum(values)


def _mean(values: Sequence, what: str):
    values = list(values)
    if not values:
        raise ValueError(f"{what}: need at least one value to take a mean")
    return _total(values, what) / len(values)


def mttid(delays: Iterable):
    """Mean time to incident discovery: summed incident-to-discovery delays over the incident count."""
    return _mean(delays, "discovery delay")


def mttir(durations: Iterable):
    """Mean time to incident recovery."""
    return _mean(durations, "recovery duration")


def mtbsi(timestamps: Iterable):
    """Mean time between security incidents, from incident timestamps."""
    ts = sorted(timestamps)
    if len(ts) < 2:
        raise ValueError("need at least two incident timestamps")
    return _mean([b - a for a, b in zip(ts, ts[1:])], "time between incidents")


def cost_of_incidents(costs) -> float:
    """Sum of all incident cost items (direct loss, restitution, ...).

    Accepts a mapping of label to amount, ``(label, amount)`` pairs or plain
    amounts.
    """
    if isinstance(costs, Mapping):
        amounts = list(costs.values())
    else:
        amounts = [c[1] if isinstance(c, (tuple, list)) else c for c in costs]
    for a in amounts:
        if a < 0:
            raise ValueError(f"cost items must be non-negative, got {a}")
    return fsum(amounts)


def vulnerability_exposure(vulns: Iterable[tuple[str, float]]):
    """Known unpatched vulnerabilities, each weighted by its exposure interval (vuln-days)."""
    return _total([days for _, days in vulns], "exposure interval")


def rogue_change_days(undetected_days: Iterable):
    """Unauthorized changes, each weighted by the days it went undetected (change-days)."""
    return _total(list(undetected_days), "undetected interval")


def root_privilege_count(personnel: Iterable[str]) -> int:
    """Number of distinct people holding key (root/admin) privileges."""
    return len(set(personnel))


def component_test_count(untested: Iterable[str]) -> int:
    """Number of distinct control-system components not yet tested."""
    return len(set(untested))

"""Loss/threat ratings and composite priority for network assets."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence


class Rating(IntEnum):
    LOW = 1
    MODERATE = 2
    HIGH = 3

    @classmethod
    def parse(cls, value) -> "Rating":
        if isinstance(value, Rating):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"unknown rating {value!r}; expected low, moderate or high") from None
        return cls(int(value))

    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class LossTriple:
    confidentiality: Rating
    integrity: Rating
    availability: Rating

    def __post_init__(self):
        for name in ("confidentiality", "integrity", "availability"):
            object.__setattr__(self, name, Rating.parse(getattr(self, name)))


@dataclass(frozen=True)
class Asset:
    name: str
    loss: LossTriple
    threat: Rating

    def __post_init__(self):
        object.__setattr__(self, "threat", Rating.parse(self.threat))


@dataclass(frozen=True)
class RankedAsset:
    rank: int
    name: str
    loss: Rating
    threat: Rating
    priority: int


def streamline_loss(loss: LossTriple) -> Rating:
    """Collapse the C/I/A loss ratings into the single highest one."""
    return max(loss.confidentiality, loss.integrity, loss.availability)


def composite_priority(loss: Rating, threat: Rating) -> int:
    return int(Rating.parse(loss)) + int(Rating.parse(threat))


def rank_assets(assets: Sequence[Asset]) -> list[RankedAsset]:
    """Rank by composite priority, then by loss, then input order."""
    scored = []
    for i, a in enumerate(assets):
        loss = streamline_loss(a.loss)
        scored.append((-composite_priority(loss, a.threat), -int(loss), i, a, loss))
    scored.sort(key=lambda x: x[:3])
    return [
        RankedAsset(rank, a.name, loss, a.threat, composite_priority(loss, a.threat))
        for rank, (_, _, _, a, loss) in enumerate(scored, start=1)
    ]

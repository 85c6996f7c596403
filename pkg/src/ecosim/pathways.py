"""Individual trajectories through hate communities.

A journey is one individual's time-ordered sequence of community joins,
each step coloured by whether that community was later banned. Journey
lengths are summarized over a fixed horizon anchored at each individual's
first join.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import UnknownCommunityError
from .graph import EcosystemGraph, Klass
from .ingest import JoinEvent

DAY = 86400
DEFAULT_HORIZON_S = 180 * DAY  # six months


@dataclass(frozen=True, slots=True)
class JourneyStep:
    community: str
    t: int
    banned: bool


@dataclass(frozen=True)
class Journey:
    individual: str
    steps: tuple[JourneyStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def length_within(self, horizon_seconds: int) -> int:
        """Joins within the horizon anchored at the first join (inclusive)."""
        start = self.steps[0].t
        return sum(1 for s in self.steps if s.t - start <= horizon_seconds)


def ban_status_from_graph(g: EcosystemGraph) -> dict[str, bool]:
    """Ban-status map for every hate-core community in a graph."""
    return {n.id: n.banned for n in g.nodes_of_klass(Klass.HATE_CORE)}


def build_journeys(
    joins: Iterable[JoinEvent], ban_status: Mapping[str, bool]
) -> list[Journey]:
    """Group joins per individual into time-ordered journeys.

    Joins are sorted by (t, community id); an exact duplicate
    (individual, community) pair keeps only the earliest join, so the input
    order never matters. Unknown communities raise UnknownCommunityError.
    Journeys come back sorted by individual id.
    """
    per_individual: dict[str, dict[str, tuple[int, str]]] = {}
    for j in joins:
        if j.community not in ban_status:
            raise UnknownCommunityError(
                f"join by {j.individual!r} references unknown community {j.community!r}"
            )
        best = per_individual.setdefault(j.individual, {})
        prev = best.get(j.community)
        if prev is None or (j.t, j.community) < prev:
            best[j.community] = (j.t, j.community)
    journeys = []
    for individual in sorted(per_individual):
        ordered = sorted(per_individual[individual].values())
        steps = tuple(
            JourneyStep(community, t, bool(ban_status[community])) for t, community in ordered
        )
        journeys.append(Journey(individual, steps))
    return journeys


@dataclass(frozen=True)
class JourneyHistogram:
    """Journey-length counts over doubling bins: 1, 2, 3-4, 5-8, 9-16, ..."""

    horizon_seconds: int
    bins: tuple[tuple[int, int], ...]  # inclusive (lo, hi) per bin
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)


def default_bins(max_length: int) -> tuple[tuple[int, int], ...]:
    """Doubling bins covering 1..max_length: (1,1), (2,2), (3,4), (5,8), ..."""
    bins = [(1, 1), (2, 2)]
    lo, hi = 3, 4
    while bins[-1][1] < max_length:
        bins.append((lo, hi))
        lo, hi = hi + 1, hi * 2
    return tuple(bins)


def journey_histogram(
    journeys: Sequence[Journey],
    horizon_seconds: int = DEFAULT_HORIZON_S,
    bins: Sequence[tuple[int, int]] | None = None,
) -> JourneyHistogram:
    """Histogram of journey lengths within the horizon.

    Each individual contributes exactly one count (the first join is always
    inside its own horizon), so counts sum to the number of journeys.
    """
    if horizon_seconds <= 0:
        raise ValueError("horizon_seconds must be positive")
    lengths = [j.length_within(horizon_seconds) for j in journeys]
    if bins is None:
        bins = default_bins(max(lengths, default=1))
    edges = tuple((int(lo), int(hi)) for lo, hi in bins)
    for lo, hi in edges:
        if lo > hi:
            raise ValueError(f"bin ({lo}, {hi}) is inverted")
    counts = [0] * len(edges)
    for length in lengths:
        for i, (lo, hi) in enumerate(edges):
            if lo <= length <= hi:
                counts[i] += 1
                break
        else:
            raise ValueError(f"journey length {length} not covered by bins")
    return JourneyHistogram(horizon_seconds, edges, tuple(counts))


@dataclass(frozen=True)
class ViolenceMix:
    """Banned/active composition of one journey."""

    n_banned: int
    n_active: int

    @property
    def fraction_banned(self) -> float:
        total = self.n_banned + self.n_active
        return self.n_banned / total if total else 0.0


def violence_mix(journey: Journey) -> ViolenceMix:
    banned = sum(1 for s in journey.steps if s.banned)
    return ViolenceMix(n_banned=banned, n_active=len(journey.steps) - banned)

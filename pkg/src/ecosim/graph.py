"""Temporal multilayer link graph.

Communities are nodes tagged with a platform and a class (hate core,
vulnerable mainstream, news source). Directed link events between them form
an append-only, time-stamped log. Links only ever originate in hate-core
nodes. A graph is built in two phases: register nodes and append events in
any order, then seal() to sort, validate and freeze. All queries that depend
on time ordering require a sealed graph; a sealed graph is immutable and
safe to share between threads.
"""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    DuplicateIdError,
    GraphNotSealedError,
    GraphSealedError,
    KindMismatchError,
    SourceNotHateCoreError,
    UnknownEndpointError,
    UnknownPlatformError,
)


class Klass(str, Enum):
    """Community class. Hate-core nodes are the only permitted link sources."""

    HATE_CORE = "hate_core"
    VULNERABLE_MAINSTREAM = "vulnerable_mainstream"
    NEWS_SOURCE = "news_source"


class LinkKind(str, Enum):
    CORE_CORE = "core_core"
    CORE_MAINSTREAM = "core_mainstream"
    CORE_NEWS = "core_news"


# the kind an event must carry, given its target's class
KIND_FOR_TARGET = {
    Klass.HATE_CORE: LinkKind.CORE_CORE,
    Klass.VULNERABLE_MAINSTREAM: LinkKind.CORE_MAINSTREAM,
    Klass.NEWS_SOURCE: LinkKind.CORE_NEWS,
}

# labels for the two sink supernodes in platform aggregates
MAINSTREAM_SINK = "mainstream"
NEWS_SINK = "news"


def normalize_platform(name: str) -> str:
    return name.strip().lower()


@dataclass(frozen=True, slots=True)
class CommunityNode:
    """One community. members is a point estimate of audience size.

    banned records moderation status at the end of the observation window;
    it is carried here so journey analyses can colour steps without a side
    table.
    """

    id: str
    platform: str
    klass: Klass
    members: int
    created_at: int = 0
    banned: bool = False

    def __post_init__(self) -> None:
        if self.members < 0:
            raise ValueError(f"members must be >= 0, got {self.members}")


@dataclass(frozen=True, slots=True)
class LinkEvent:
    """A directed link created at time t (integer seconds)."""

    source: str
    target: str
    t: int
    kind: LinkKind


class Snapshot:
    """All link events up to and including as_of, over the full node set.

    The multigraph weight of an edge is its event count. weights() and
    adjacency() are computed on first use and cached; at millions of events
    prefer iterating .events directly.
    """

    __slots__ = ("as_of", "_events", "_graph", "_weights", "_adjacency")

    def __init__(self, graph: "EcosystemGraph", as_of: int, events: tuple[LinkEvent, ...]):
        self.as_of = as_of
        self._graph = graph
        self._events = events
        self._weights: dict[tuple[str, str], int] | None = None
        self._adjacency: dict[str, dict[str, int]] | None = None

    @property
    def events(self) -> tuple[LinkEvent, ...]:
        return self._events

    @property
    def nodes(self) -> Mapping[str, CommunityNode]:
        return self._graph.nodes

    def weights(self) -> dict[tuple[str, str], int]:
        if self._weights is None:
            w: dict[tuple[str, str], int] = {}
            for e in self._events:
                key = (e.source, e.target)
                w[key] = w.get(key, 0) + 1
            self._weights = w
        return self._weights

    def adjacency(self) -> dict[str, dict[str, int]]:
        if self._adjacency is None:
            adj: dict[str, dict[str, int]] = {}
            for (src, tgt), w in self.weights().items():
                adj.setdefault(src, {})[tgt] = w
            self._adjacency = adj
        return self._adjacency

    def __len__(self) -> int:
        return len(self._events)


@dataclass(frozen=True)
class PlatformAggregate:
    """Platform-level supernode view of a snapshot.

    One supernode per declared platform carrying its hate-core activity,
    plus two sinks ("mainstream", "news") absorbing links that leave the
    core. Edge weights are event counts, so total weight equals the number
    of events in the underlying snapshot.
    """

    as_of: int
    platforms: tuple[str, ...]
    edges: Mapping[tuple[str, str], int]

    def degree(self, platform: str) -> dict[str, int]:
        """Weighted in/out/total degree of one platform supernode.

        A platform self-loop counts toward both in and out.
        """
        din = sum(w for (s, t), w in self.edges.items() if t == platform)
        dout = sum(w for (s, t), w in self.edges.items() if s == platform)
        return {"in": din, "out": dout, "total": din + dout}

    def total_weight(self) -> int:
        return sum(self.edges.values())


class EcosystemGraph:
    """Node registry plus append-only link-event log.

    The platform set is declared up front; platform names are
    case-normalized. Events may be appended in any time order and are
    sorted (stably) at seal time.
    """

    def __init__(self, platforms: Iterable[str]):
        names = [normalize_platform(p) for p in platforms]
        if not names:
            raise UnknownPlatformError("platform set must be non-empty")
        dupes = [p for p, c in Counter(names).items() if c > 1]
        if dupes:
            raise DuplicateIdError(f"duplicate platform name(s): {sorted(dupes)}")
        self._platforms: tuple[str, ...] = tuple(names)
        self._platform_set = frozenset(names)
        self._nodes: dict[str, CommunityNode] = {}
        self._events: list[LinkEvent] = []
        self._sealed = False
        self._times: list[int] = []  # event times, filled at seal
        self._time_range: tuple[int, int] | None = None

    # ------------------------------------------------------------------
    # construction

    def register_node(self, node: CommunityNode) -> str:
        if self._sealed:
            raise GraphSealedError("cannot register nodes on a sealed graph")
        if node.id in self._nodes:
            raise DuplicateIdError(f"node id already registered: {node.id!r}")
        platform = normalize_platform(node.platform)
        if platform not in self._platform_set:
            raise UnknownPlatformError(
                f"platform {node.platform!r} not in declared set for node {node.id!r}"
            )
        if platform != node.platform:
            node = CommunityNode(
                node.id, platform, node.klass, node.members, node.created_at, node.banned
            )
        self._nodes[node.id] = node
        return node.id

    def append_event(self, event: LinkEvent) -> None:
        if self._sealed:
            raise GraphSealedError("cannot append events to a sealed graph")
        src = self._nodes.get(event.source)
        if src is None:
            raise UnknownEndpointError(f"unknown source node: {event.source!r}")
        tgt = self._nodes.get(event.target)
        if tgt is None:
            raise UnknownEndpointError(f"unknown target node: {event.target!r}")
        if src.klass is not Klass.HATE_CORE:
            raise SourceNotHateCoreError(
                f"links originate in hate-core nodes only; {event.source!r} is {src.klass.value}"
            )
        expected = KIND_FOR_TARGET[tgt.klass]
        if event.kind is not expected:
            raise KindMismatchError(
                f"event {event.source!r}->{event.target!r} has kind {event.kind.value}, "
                f"target class {tgt.klass.value} requires {expected.value}"
            )
        self._events.append(event)

    def seal(self, t_start: int | None = None, t_end: int | None = None) -> "EcosystemGraph":
        """Sort the event log, freeze the graph and fix its time range.

        t_start/t_end override the observed range; a generator passes the
        configured window so empty bins at the edges are preserved.
        """
        if self._sealed:
            return self
        self._events.sort(key=lambda e: e.t)  # stable: ties keep append order
        self._times = [e.t for e in self._events]
        if self._events:
            lo, hi = self._times[0], self._times[-1]
        else:
            lo, hi = 0, 0
        if t_start is not None:
            lo = t_start
        if t_end is not None:
            hi = t_end
        if hi < lo:
            raise ValueError(f"time range end {hi} precedes start {lo}")
        self._time_range = (lo, hi)
        self._sealed = True
        return self

    # ------------------------------------------------------------------
    # views

    @property
    def sealed(self) -> bool:
        return self._sealed

    @property
    def platforms(self) -> tuple[str, ...]:
        return self._platforms

    @property
    def nodes(self) -> Mapping[str, CommunityNode]:
        return self._nodes

    def node(self, node_id: str) -> CommunityNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownEndpointError(f"unknown node: {node_id!r}") from None

    @property
    def events(self) -> Sequence[LinkEvent]:
        """Time-sorted event log (sealed graphs only)."""
        self._require_sealed()
        return self._events

    @property
    def time_range(self) -> tuple[int, int]:
        self._require_sealed()
        assert self._time_range is not None
        return self._time_range

    def nodes_of_klass(self, klass: Klass) -> Iterator[CommunityNode]:
        return (n for n in self._nodes.values() if n.klass is klass)

    def count_of_klass(self, klass: Klass) -> int:
        return sum(1 for n in self._nodes.values() if n.klass is klass)

    def _require_sealed(self) -> None:
        if not self._sealed:
            raise GraphNotSealedError("operation requires a sealed graph; call seal() first")

    # ------------------------------------------------------------------
    # time-indexed queries

    def events_until(self, t: int) -> Sequence[LinkEvent]:
        """List slice of events with event time <= t. O(log n) to locate."""
        self._require_sealed()
        end = bisect.bisect_right(self._times, t)
        return self._events[:end]

    def snapshot_at(self, t: int) -> Snapshot:
        """Graph state as of time t: every event with e.t <= t.

        snapshot_at(time_range[1]) reproduces the full log. For t1 <= t2
        the earlier snapshot's edges are a subset of the later one's.
        """
        events = tuple(self.events_until(t))
        return Snapshot(self, t, events)

    def aggregate_by_platform(self, t: int) -> PlatformAggregate:
        """Collapse the snapshot at t onto platform supernodes.

        Core-core events become platform->platform edges; links leaving the
        core collapse onto the "mainstream" and "news" sinks.
        """
        self._require_sealed()
        nodes = self._nodes
        edges: Counter[tuple[str, str]] = Counter()
        for e in self.events_until(t):
            src_platform = nodes[e.source].platform
            if e.kind is LinkKind.CORE_CORE:
                dst = nodes[e.target].platform
            elif e.kind is LinkKind.CORE_MAINSTREAM:
                dst = MAINSTREAM_SINK
            else:
                dst = NEWS_SINK
            edges[(src_platform, dst)] += 1
        return PlatformAggregate(as_of=t, platforms=self._platforms, edges=dict(edges))

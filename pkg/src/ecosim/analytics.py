"""Ecosystem-level metrics over sealed graphs and post series.

Every function here is a pure function of its inputs; repeated calls give
identical results.
"""

from __future__ import annotations

import math
import statistics
from bisect import bisect_left, bisect_right
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InsufficientDataError
from .graph import EcosystemGraph, Klass, LinkKind
from .ingest import PostRecord

DAY = 86400


# ---------------------------------------------------------------------------
# connected components of the hate core


@dataclass(frozen=True)
class ComponentReport:
    """Weakly-connected components of the core-core subgraph at one time.

    Only nodes touched by at least one core-core link by as_of appear;
    isolated hate communities are not counted as singleton components.
    Components are sorted largest first (ties by smallest member id).
    """

    as_of: int
    components: tuple[frozenset[str], ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.components)


def _components_at(g: EcosystemGraph, t: int) -> tuple[frozenset[str], ...]:
    # undirected adjacency over core-core events only
    adj: dict[str, set[str]] = {}
    for e in g.events_until(t):
        if e.kind is not LinkKind.CORE_CORE:
            continue
        adj.setdefault(e.source, set()).add(e.target)
        adj.setdefault(e.target, set()).add(e.source)
    seen: set[str] = set()
    comps: list[frozenset[str]] = []
    for start in adj:
        if start in seen:
            continue
        queue = deque([start])
        seen.add(start)
        comp = {start}
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.add(v)
                    queue.append(v)
        comps.append(frozenset(comp))
    comps.sort(key=lambda c: (-len(c), min(c)))
    return tuple(comps)


def components_over_time(g: EcosystemGraph, sample_times: Sequence[int]) -> list[ComponentReport]:
    """Component structure at each sample time (BFS flood fill per sample)."""
    return [ComponentReport(t, _components_at(g, t)) for t in sample_times]


# ---------------------------------------------------------------------------
# one-click reach


class Reach(NamedTuple):
    n_communities: int
    total_members: int


def one_click_reach(g: EcosystemGraph, t: int) -> Reach:
    """Mainstream communities one click from the core at time t.

    Counts distinct mainstream communities with at least one inbound core
    link by t, and sums their member counts. Individuals belonging to
    several reached communities are counted once per community, so the
    member total overstates distinct people; it is the exposure surface,
    not a census.
    """
    reached: set[str] = set()
    for e in g.events_until(t):
        if e.kind is LinkKind.CORE_MAINSTREAM:
            reached.add(e.target)
    nodes = g.nodes
    total = sum(nodes[m].members for m in reached)
    return Reach(len(reached), total)


# ---------------------------------------------------------------------------
# link growth


@dataclass(frozen=True)
class KindGrowth:
    kind: str
    total: int
    mean_daily_rate: float
    slope_per_bin: float  # least-squares slope of the cumulative curve
    r_squared: float
    steady: bool  # r_squared >= 0.98


@dataclass(frozen=True)
class GrowthReport:
    bin_seconds: int
    t_start: int
    n_bins: int
    kinds: tuple[KindGrowth, ...]

    def kind(self, name: str) -> KindGrowth:
        for k in self.kinds:
            if k.kind == name:
                return k
        raise KeyError(name)


def link_growth(g: EcosystemGraph, bin_seconds: int = DAY) -> GrowthReport:
    """Cumulative link counts per kind, with a steady-growth verdict.

    The cumulative curve per kind is fit by least squares over bin index;
    growth counts as steady when R^2 >= 0.98. Zero-event kinds report
    slope 0 and are not steady.
    """
    if bin_seconds <= 0:
        raise ValueError("bin_seconds must be positive")
    t0, t1 = g.time_range
    n_bins = max(1, math.ceil((t1 - t0) / bin_seconds)) if t1 > t0 else 1
    counts = {kind: np.zeros(n_bins, dtype=np.int64) for kind in LinkKind}
    for e in g.events:
        idx = min((e.t - t0) // bin_seconds, n_bins - 1)
        counts[e.kind][idx] += 1
    duration_days = max((t1 - t0) / DAY, 1e-12)
    x = np.arange(n_bins, dtype=float)
    kinds = []
    for kind in LinkKind:
        cumulative = np.cumsum(counts[kind]).astype(float)
        total = int(cumulative[-1])
        if total == 0 or n_bins < 2:
            kinds.append(KindGrowth(kind.value, total, total / duration_days, 0.0, 0.0, False))
            continue
        slope, intercept = np.polyfit(x, cumulative, 1)
        predicted = slope * x + intercept
        ss_res = float(np.sum((cumulative - predicted) ** 2))
        ss_tot = float(np.sum((cumulative - cumulative.mean()) ** 2))
        r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
        kinds.append(
            KindGrowth(
                kind.value, total, total / duration_days, float(slope), r2, bool(r2 >= 0.98)
            )
        )
    return GrowthReport(bin_seconds, t0, n_bins, tuple(kinds))


# ---------------------------------------------------------------------------
# platform connectivity


@dataclass(frozen=True)
class ConnectivityReport:
    """Weighted aggregate degrees per platform and their spread.

    ratio_max_median compares the best-connected platform with the median
    one; values near 1 mean the platforms are roughly equivalent doorways
    into the ecosystem. Platforms hosting no hate-core nodes are excluded
    from the ratio.
    """

    as_of: int
    degrees: dict[str, dict[str, int]]
    ratio_max_median: float


def platform_connectivity(g: EcosystemGraph, t: int) -> ConnectivityReport:
    agg = g.aggregate_by_platform(t)
    degrees = {p: agg.degree(p) for p in agg.platforms}
    hosting = {n.platform for n in g.nodes_of_klass(Klass.HATE_CORE)}
    totals = [degrees[p]["total"] for p in agg.platforms if p in hosting]
    if not totals:
        ratio = math.nan
    else:
        med = statistics.median(totals)
        ratio = math.inf if med == 0 else max(totals) / med
    return ConnectivityReport(as_of=t, degrees=degrees, ratio_max_median=ratio)


# ---------------------------------------------------------------------------
# inter-platform bypass motifs


class BypassMotif(NamedTuple):
    """A -> B off-platform hop followed by B -> C back on A's platform."""

    origin: str
    intermediate: str
    return_target: str
    t_out: int
    t_back: int


def detect_bypasses(g: EcosystemGraph, window_days: float = 7.0) -> list[BypassMotif]:
    """Temporal motifs where activity leaves a platform and returns.

    A motif is an event A->B with platform(B) != platform(A), followed
    within the window by any event B->C with platform(C) == platform(A).
    C may be A itself. Results are sorted by (t_out, t_back, origin,
    return_target).
    """
    if window_days <= 0:
        raise ValueError("window_days must be positive")
    window_s = int(window_days * DAY)
    nodes = g.nodes
    # per-source time-sorted outgoing events (the log is already sorted)
    by_source: dict[str, list[tuple[int, str]]] = {}
    times_by_source: dict[str, list[int]] = {}
    for e in g.events:
        by_source.setdefault(e.source, []).append((e.t, e.target))
        times_by_source.setdefault(e.source, []).append(e.t)
    motifs: list[BypassMotif] = []
    for e in g.events:
        src_platform = nodes[e.source].platform
        if nodes[e.target].platform == src_platform:
            continue
        outgoing = by_source.get(e.target)
        if not outgoing:
            continue
        times = times_by_source[e.target]
        lo = bisect_right(times, e.t)  # strictly after the outbound hop
        hi = bisect_right(times, e.t + window_s)
        for t_back, c in outgoing[lo:hi]:
            if nodes[c].platform == src_platform:
                motifs.append(BypassMotif(e.source, e.target, c, e.t, t_back))
    motifs.sort(key=lambda m: (m.t_out, m.t_back, m.origin, m.return_target))
    return motifs


# ---------------------------------------------------------------------------
# shock response


class ShockVerdict(str, Enum):
    HUGE = "huge"
    MINOR = "minor"
    NONE = "none"


@dataclass(frozen=True)
class CategorySeries:
    """Binned post counts for one content category."""

    category: str
    t_start: int
    bin_seconds: int
    counts: tuple[int, ...]

    def bin_of(self, t: int) -> int:
        return (t - self.t_start) // self.bin_seconds


def series_from_posts(
    posts: Iterable[PostRecord],
    category: str,
    bin_seconds: int = 60,
    t_start: int | None = None,
    t_end: int | None = None,
) -> CategorySeries:
    """Bin one category's posts into fixed-width count bins."""
    if bin_seconds <= 0:
        raise ValueError("bin_seconds must be positive")
    ts = sorted(p.t for p in posts if p.category == category)
    if t_start is None:
        if not ts:
            raise InsufficientDataError(f"no posts in category {category!r}")
        t_start = ts[0]
    if t_end is None:
        if not ts:
            raise InsufficientDataError(f"no posts in category {category!r}")
        t_end = ts[-1] + 1
    if t_end <= t_start:
        raise InsufficientDataError("series window is empty")
    n_bins = math.ceil((t_end - t_start) / bin_seconds)
    counts = [0] * n_bins
    lo = bisect_left(ts, t_start)
    hi = bisect_left(ts, t_end)
    for t in ts[lo:hi]:
        counts[(t - t_start) // bin_seconds] += 1
    return CategorySeries(category, t_start, bin_seconds, tuple(counts))


@dataclass(frozen=True)
class ShockReport:
    category: str
    event_t: int
    pre_rate: float
    post_rate: float
    ratio: float  # +inf when the pre window is silent but the post one is not
    latency_bins: int | None  # 1 = first bin after the event crossed; None = never
    verdict: ShockVerdict


def shock_response(
    series: CategorySeries, event_t: int, pre_window: int, post_window: int
) -> ShockReport:
    """Compare post rates before and after an external event.

    pre_rate is the mean of pre_window bins strictly before event_t,
    post_rate the mean of post_window bins from event_t onward (if
    event_t falls inside a bin, that straddling bin is excluded from
    both sides). Verdicts: ratio >= 3 huge, >= 1.5 minor, else none.
    Latency is the 1-based index of the first post bin whose count
    exceeds pre_rate + 4 sigma of the pre-window bins.
    """
    if pre_window < 1 or post_window < 1:
        raise InsufficientDataError("pre_window and post_window must be >= 1")
    offset = event_t - series.t_start
    idx = offset // series.bin_seconds
    if offset % series.bin_seconds == 0:
        pre_end, post_start = idx, idx
    else:
        pre_end, post_start = idx, idx + 1
    pre_start = pre_end - pre_window
    post_end = post_start + post_window
    if pre_start < 0 or post_end > len(series.counts):
        raise InsufficientDataError(
            f"windows [{pre_start}, {post_end}) exceed series of {len(series.counts)} bins"
        )
    pre = series.counts[pre_start:pre_end]
    post = series.counts[post_start:post_end]
    pre_rate = sum(pre) / len(pre)
    post_rate = sum(post) / len(post)
    if pre_rate > 0:
        ratio = post_rate / pre_rate
    else:
        ratio = math.inf if post_rate > 0 else 1.0
    sigma = statistics.stdev(pre) if len(pre) >= 2 else 0.0
    threshold = pre_rate + 4.0 * sigma
    latency = None
    for i, c in enumerate(post):
        if c > threshold:
            latency = i + 1
            break
    if ratio >= 3.0:
        verdict = ShockVerdict.HUGE
    elif ratio >= 1.5:
        verdict = ShockVerdict.MINOR
    else:
        verdict = ShockVerdict.NONE
    return ShockReport(series.category, event_t, pre_rate, post_rate, ratio, latency, verdict)

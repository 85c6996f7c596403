"""Agent-based moderation-versus-adaptation simulation.

The simulation starts from the final state of a sealed graph. Each tick,
moderators remove up to budget_per_tick active hate communities according
to their strategy; removed communities may respawn a short time later as a
brand-new intermediary community on a different platform, inheriting the
outbound links of the original (the bypass adaptation). Removed ids never
come back: respawns mint fresh ids.

Randomness is derived per removed node from (seed, node id) hashes, so a
run is a pure function of (graph, policy, rule, ticks, seed) and the same
node makes the same respawn choices regardless of when it is removed.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import InvalidPolicyError
from .graph import EcosystemGraph, Klass, LinkKind

DAY = 86400


class Strategy(str, Enum):
    MAJOR_PLATFORMS_ONLY = "major_platforms_only"
    ADAPTIVE_SYSTEM_WIDE = "adaptive_system_wide"


@dataclass(frozen=True)
class ModerationPolicy:
    strategy: Strategy
    budget_per_tick: int
    detection_delay_ticks: int = 0
    platforms: tuple[str, ...] = ()  # required for MAJOR_PLATFORMS_ONLY

    @property
    def label(self) -> str:
        if self.strategy is Strategy.MAJOR_PLATFORMS_ONLY:
            return f"{self.strategy.value}({'+'.join(self.platforms)})"
        return self.strategy.value


@dataclass(frozen=True)
class AdaptationRule:
    """Hate-side response to removal.

    bypass_probability is the chance a removed community re-forms through
    a new intermediary; relink_window_ticks bounds both the respawn delay
    and the look-back window used by the adaptive strategy's ranking.
    """

    bypass_probability: float
    relink_window_ticks: int = 3


@dataclass
class SimOutcome:
    ticks: int
    initial_active: int
    active_nodes: list[int] = field(default_factory=list)
    reach: list[int] = field(default_factory=list)
    removals: list[int] = field(default_factory=list)
    bypasses: list[int] = field(default_factory=list)

    @property
    def final_residual(self) -> float:
        if not self.active_nodes:
            return 1.0
        return self.active_nodes[-1] / self.initial_active if self.initial_active else 0.0


def top_platforms_by_membership(g: EcosystemGraph, k: int = 3) -> tuple[str, ...]:
    """The k platforms hosting the largest total hate-core membership."""
    totals: Counter[str] = Counter()
    for n in g.nodes_of_klass(Klass.HATE_CORE):
        totals[n.platform] += n.members
    ranked = sorted(totals, key=lambda p: (-totals[p], p))
    return tuple(ranked[:k])


def majors_policy(g: EcosystemGraph, budget: int, k: int = 3, delay: int = 0) -> ModerationPolicy:
    return ModerationPolicy(
        Strategy.MAJOR_PLATFORMS_ONLY, budget, delay, top_platforms_by_membership(g, k)
    )


def adaptive_policy(budget: int, delay: int = 0) -> ModerationPolicy:
    return ModerationPolicy(Strategy.ADAPTIVE_SYSTEM_WIDE, budget, delay)


def _validate(g: EcosystemGraph, policy: ModerationPolicy, rule: AdaptationRule, ticks: int):
    if policy.budget_per_tick < 0:
        raise InvalidPolicyError("budget_per_tick must be >= 0")
    if policy.detection_delay_ticks < 0:
        raise InvalidPolicyError("detection_delay_ticks must be >= 0")
    if policy.strategy is Strategy.MAJOR_PLATFORMS_ONLY:
        if not policy.platforms:
            raise InvalidPolicyError("major-platform policy needs a platform list")
        unknown = [p for p in policy.platforms if p not in g.platforms]
        if unknown:
            raise InvalidPolicyError(f"policy platforms not in graph: {unknown}")
    if not 0.0 <= rule.bypass_probability <= 1.0:
        raise InvalidPolicyError("bypass_probability must lie in [0, 1]")
    if rule.relink_window_ticks < 1:
        raise InvalidPolicyError("relink_window_ticks must be >= 1")
    if ticks < 0:
        raise InvalidPolicyError("ticks must be >= 0")


def _coins(seed: int, node_id: str) -> tuple[float, int, int]:
    """Respawn coin, delay draw and platform draw for one removed node."""
    digest = hashlib.sha256(f"{seed}:{node_id}".encode("utf-8")).digest()
    u = int.from_bytes(digest[0:8], "big") / 2**64
    delay_draw = int.from_bytes(digest[8:12], "big")
    platform_draw = int.from_bytes(digest[12:16], "big")
    return u, delay_draw, platform_draw


class _SimState:
    """Mutable working state; not part of the public surface."""

    def __init__(self, g: EcosystemGraph, rule: AdaptationRule):
        self.g = g
        self.platforms = g.platforms
        nodes = g.nodes
        self.platform_of: dict[str, str] = {}
        self.members_of: dict[str, int] = {}
        self.outbound: dict[str, Counter[str]] = {}
        self.active: set[str] = set()
        for n in g.nodes_of_klass(Klass.HATE_CORE):
            self.platform_of[n.id] = n.platform
            self.members_of[n.id] = n.members
            self.outbound[n.id] = Counter()
            self.active.add(n.id)
        self.target_platform: dict[str, str] = {}
        self.target_is_mainstream: dict[str, bool] = {}
        t0, t1 = g.time_range
        window_start = t1 - rule.relink_window_ticks * DAY
        self.activity: dict[str, list[tuple[int, int]]] = {}
        recent: Counter[str] = Counter()
        for e in g.events:
            self.outbound[e.source][e.target] += 1
            if e.target not in self.target_platform:
                self.target_platform[e.target] = nodes[e.target].platform
                self.target_is_mainstream[e.target] = (
                    e.kind is LinkKind.CORE_MAINSTREAM
                )
            if e.t > window_start and nodes[e.target].platform != self.platform_of[e.source]:
                recent[e.source] += 1
        for node_id, count in recent.items():
            self.activity[node_id] = [(0, count)]
        # mainstream targets covered by >= 1 active source, maintained incrementally
        self.cover: Counter[str] = Counter()
        self.reach = 0
        for node_id in self.active:
            self._cover_add(node_id)

    def _mainstream_targets(self, node_id: str):
        return [t for t in self.outbound[node_id] if self.target_is_mainstream.get(t, False)]

    def _cover_add(self, node_id: str) -> None:
        for t in self._mainstream_targets(node_id):
            if self.cover[t] == 0:
                self.reach += 1
            self.cover[t] += 1

    def _cover_remove(self, node_id: str) -> None:
        for t in self._mainstream_targets(node_id):
            self.cover[t] -= 1
            if self.cover[t] == 0:
                self.reach -= 1

    def cross_platform_weight(self, node_id: str) -> int:
        own = self.platform_of[node_id]
        return sum(
            w for t, w in self.outbound[node_id].items()
            if self.target_platform.get(t, own) != own
        )

    def record_activity(self, node_id: str, tick: int) -> None:
        weight = self.cross_platform_weight(node_id)
        if weight:
            self.activity.setdefault(node_id, []).append((tick, weight))

    def activity_in(self, node_id: str, lo: int, hi: int) -> int:
        return sum(c for tick, c in self.activity.get(node_id, ()) if lo <= tick <= hi)


def run_sim(
    g: EcosystemGraph,
    policy: ModerationPolicy,
    rule: AdaptationRule,
    ticks: int,
    seed: int,
) -> SimOutcome:
    """Play one moderation campaign over the graph's final state.

    Tick order: due respawns appear, moderators remove up to budget
    according to the strategy, removals schedule their own respawns, then
    metrics are recorded. Respawned communities become visible to
    moderators detection_delay_ticks after creation; original communities
    are visible from the start.
    """
    _validate(g, policy, rule, ticks)
    state = _SimState(g, rule)
    initial = len(state.active)
    outcome = SimOutcome(ticks=ticks, initial_active=initial)
    pending: list[tuple[int, str, str]] = []  # (due_tick, removed_id, new_platform)
    created_tick: dict[str, int] = {}
    sim_counter = 0
    majors = set(policy.platforms)
    window = rule.relink_window_ticks
    delay = policy.detection_delay_ticks

    for tick in range(1, ticks + 1):
        # 1. respawns due now
        born = 0
        still_pending: list[tuple[int, str, str]] = []
        for due, removed_id, platform in pending:
            if due != tick:
                still_pending.append((due, removed_id, platform))
                continue
            sim_counter += 1
            new_id = f"sim_{sim_counter:05d}"
            state.platform_of[new_id] = platform
            state.members_of[new_id] = state.members_of[removed_id]
            state.outbound[new_id] = Counter(state.outbound[removed_id])
            state.active.add(new_id)
            state._cover_add(new_id)
            state.record_activity(new_id, tick)
            created_tick[new_id] = tick
            born += 1
        pending = still_pending

        # 2. moderator removals (originals are visible from tick 1)
        visible = [
            n for n in state.active
            if tick - created_tick.get(n, -(10**9)) >= delay
        ]
        if policy.strategy is Strategy.MAJOR_PLATFORMS_ONLY:
            candidates = [n for n in visible if state.platform_of[n] in majors]
            candidates.sort(key=lambda n: (-state.members_of[n], n))
        else:
            lo, hi = tick - delay - window + 1, tick - delay
            candidates = sorted(
                visible,
                key=lambda n: (-state.activity_in(n, lo, hi), -state.members_of[n], n),
            )
        removed = candidates[: policy.budget_per_tick]
        for node_id in removed:
            state.active.remove(node_id)
            state._cover_remove(node_id)

        # 3. adaptation: removed communities may schedule a respawn
        for node_id in removed:
            u, delay_draw, platform_draw = _coins(seed, node_id)
            if u >= rule.bypass_probability:
                continue
            own = state.platform_of[node_id]
            others = [p for p in state.platforms if p != own]
            if not others:
                continue
            due = tick + 1 + delay_draw % window
            pending.append((due, node_id, others[platform_draw % len(others)]))

        # 4. record end-of-tick metrics
        outcome.active_nodes.append(len(state.active))
        outcome.reach.append(state.reach)
        outcome.removals.append(len(removed))
        outcome.bypasses.append(born)

    return outcome


@dataclass(frozen=True)
class PolicyResult:
    policy: ModerationPolicy
    residuals: tuple[float, ...]

    @property
    def mean_residual(self) -> float:
        return sum(self.residuals) / len(self.residuals)


@dataclass(frozen=True)
class StrategyComparison:
    seeds: tuple[int, ...]
    results: tuple[PolicyResult, ...]

    def by_mean(self) -> tuple[PolicyResult, ...]:
        return tuple(sorted(self.results, key=lambda r: r.mean_residual))


def compare_strategies(
    g: EcosystemGraph,
    policies: Sequence[ModerationPolicy],
    rule: AdaptationRule,
    ticks: int,
    seeds: Sequence[int],
) -> StrategyComparison:
    """Paired comparison: every policy replayed over the same seed set."""
    if len(policies) < 2:
        raise InvalidPolicyError("comparison needs at least 2 policies")
    if len(seeds) < 10:
        raise InvalidPolicyError("comparison needs at least 10 seeds")
    results = []
    for policy in policies:
        residuals = tuple(
            run_sim(g, policy, rule, ticks, seed).final_residual for seed in seeds
        )
        results.append(PolicyResult(policy, residuals))
    return StrategyComparison(tuple(int(s) for s in seeds), tuple(results))

"""Seeded synthetic ecosystem generator.

Produces a full Dataset (graph, join log, post log) from a single 64-bit
seed. Equal seeds give byte-identical output when written to disk.

Construction choices, briefly:

* Per-kind link events follow homogeneous Poisson processes (count drawn
  Poisson, times uniform over the window, then sorted).
* Mainstream targets use preferential attachment: with probability
  preferential_probability the target is drawn from the history of past
  targets (rich get richer), otherwise uniformly. This yields the heavy
  skew of exposure across mainstream communities.
* Hate-core nodes are partitioned into n_blocks disjoint blocks spanning
  platforms; core-core links stay within a block. The hate core therefore
  shows several persistent large components rather than one giant one.
* A cross-platform core-core link plants, with probability
  bypass_probability, a return link from the target back to the origin
  platform a short time later, creating detectable bypass motifs.
* Shock events multiply one category's post rate instantly at the shock
  time; the excess decays exponentially with time constant decay_days.
  Posts are sampled by thinning against the peak-rate envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .graph import CommunityNode, EcosystemGraph, Klass, LinkEvent, LinkKind, normalize_platform
from .ingest import (
    FLAG_FASCIST_PROMOTION,
    FLAG_HATE_SPEECH,
    Dataset,
    JoinEvent,
    PostRecord,
)

DAY = 86400


@dataclass(frozen=True)
class PlatformSpec:
    """Hate-core footprint of one platform."""

    name: str
    n_hate: int
    mean_members: float

    @staticmethod
    def from_dict(obj: dict) -> "PlatformSpec":
        return PlatformSpec(str(obj["name"]), int(obj["n_hate"]), float(obj["mean_members"]))

    def to_dict(self) -> dict:
        return {"name": self.name, "n_hate": self.n_hate, "mean_members": self.mean_members}


@dataclass(frozen=True)
class ShockSpec:
    """An exogenous shock multiplying one post category's rate.

    The rate jumps by `multiplier` at time t and relaxes back with
    exponential time constant decay_days.
    """

    t: int
    category: str
    multiplier: float
    decay_days: float

    @staticmethod
    def from_dict(obj: dict) -> "ShockSpec":
        return ShockSpec(
            int(obj["t"]), str(obj["category"]), float(obj["multiplier"]),
            float(obj["decay_days"]),
        )

    def to_dict(self) -> dict:
        return {
            "t": self.t, "category": self.category,
            "multiplier": self.multiplier, "decay_days": self.decay_days,
        }


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    platforms: tuple[PlatformSpec, ...]
    n_mainstream: int
    n_news: int
    rate_core_core: float  # events/day, ecosystem-wide
    rate_core_mainstream: float
    rate_core_news: float
    duration_days: float
    start_time: int = 0
    shock_events: tuple[ShockSpec, ...] = ()
    bypass_probability: float = 0.0
    bypass_window_days: float = 3.0
    preferential_probability: float = 0.5
    n_blocks: int = 4
    mainstream_mean_members: float = 2500.0
    banned_fraction: float = 0.3
    # journey stream
    n_individuals: int = 0
    journey_log_mean: float = 1.1
    journey_log_sigma: float = 1.3
    max_joins: int = 403
    journey_horizon_days: float = 180.0
    # post stream
    post_rates: dict = field(default_factory=dict)  # category -> posts/day
    flag_probability: float = 0.25

    @staticmethod
    def from_dict(obj: dict) -> "GeneratorConfig":
        try:
            cfg = GeneratorConfig(
                seed=int(obj["seed"]),
                platforms=tuple(PlatformSpec.from_dict(p) for p in obj["platforms"]),
                n_mainstream=int(obj["n_mainstream"]),
                n_news=int(obj.get("n_news", 0)),
                rate_core_core=float(obj["rate_core_core"]),
                rate_core_mainstream=float(obj["rate_core_mainstream"]),
                rate_core_news=float(obj.get("rate_core_news", 0.0)),
                duration_days=float(obj["duration_days"]),
                start_time=int(obj.get("start_time", 0)),
                shock_events=tuple(ShockSpec.from_dict(s) for s in obj.get("shock_events", [])),
                bypass_probability=float(obj.get("bypass_probability", 0.0)),
                bypass_window_days=float(obj.get("bypass_window_days", 3.0)),
                preferential_probability=float(obj.get("preferential_probability", 0.5)),
                n_blocks=int(obj.get("n_blocks", 4)),
                mainstream_mean_members=float(obj.get("mainstream_mean_members", 2500.0)),
                banned_fraction=float(obj.get("banned_fraction", 0.3)),
                n_individuals=int(obj.get("n_individuals", 0)),
                journey_log_mean=float(obj.get("journey_log_mean", 1.1)),
                journey_log_sigma=float(obj.get("journey_log_sigma", 1.3)),
                max_joins=int(obj.get("max_joins", 403)),
                journey_horizon_days=float(obj.get("journey_horizon_days", 180.0)),
                post_rates={str(k): float(v) for k, v in obj.get("post_rates", {}).items()},
                flag_probability=float(obj.get("flag_probability", 0.25)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad generator config: {exc!r}") from None
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "platforms": [p.to_dict() for p in self.platforms],
            "n_mainstream": self.n_mainstream,
            "n_news": self.n_news,
            "rate_core_core": self.rate_core_core,
            "rate_core_mainstream": self.rate_core_mainstream,
            "rate_core_news": self.rate_core_news,
            "duration_days": self.duration_days,
            "start_time": self.start_time,
            "shock_events": [s.to_dict() for s in self.shock_events],
            "bypass_probability": self.bypass_probability,
            "bypass_window_days": self.bypass_window_days,
            "preferential_probability": self.preferential_probability,
            "n_blocks": self.n_blocks,
            "mainstream_mean_members": self.mainstream_mean_members,
            "banned_fraction": self.banned_fraction,
            "n_individuals": self.n_individuals,
            "journey_log_mean": self.journey_log_mean,
            "journey_log_sigma": self.journey_log_sigma,
            "max_joins": self.max_joins,
            "journey_horizon_days": self.journey_horizon_days,
            "post_rates": dict(sorted(self.post_rates.items())),
            "flag_probability": self.flag_probability,
        }

    def validate(self) -> None:
        if not self.platforms:
            raise ConfigError("at least one platform required")
        names = [normalize_platform(p.name) for p in self.platforms]
        if len(set(names)) != len(names):
            raise ConfigError("platform names must be unique")
        if any(p.n_hate < 0 for p in self.platforms):
            raise ConfigError("platform n_hate must be >= 0")
        if sum(p.n_hate for p in self.platforms) < 1:
            raise ConfigError("config must place at least one hate community")
        if any(p.mean_members <= 0 for p in self.platforms):
            raise ConfigError("platform mean_members must be > 0")
        for name, value in [
            ("n_mainstream", self.n_mainstream), ("n_news", self.n_news),
            ("n_individuals", self.n_individuals),
        ]:
            if value < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name, value in [
            ("rate_core_core", self.rate_core_core),
            ("rate_core_mainstream", self.rate_core_mainstream),
            ("rate_core_news", self.rate_core_news),
        ]:
            if value < 0:
                raise ConfigError(f"{name} must be >= 0 (events/day)")
        if self.duration_days <= 0:
            raise ConfigError("duration_days must be > 0")
        for name, value in [
            ("bypass_probability", self.bypass_probability),
            ("preferential_probability", self.preferential_probability),
            ("banned_fraction", self.banned_fraction),
            ("flag_probability", self.flag_probability),
        ]:
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.bypass_window_days <= 0:
            raise ConfigError("bypass_window_days must be > 0")
        if self.n_blocks < 1:
            raise ConfigError("n_blocks must be >= 1")
        if self.mainstream_mean_members <= 0:
            raise ConfigError("mainstream_mean_members must be > 0")
        if self.max_joins < 1:
            raise ConfigError("max_joins must be >= 1")
        if self.journey_horizon_days <= 0:
            raise ConfigError("journey_horizon_days must be > 0")
        if self.journey_log_sigma < 0:
            raise ConfigError("journey_log_sigma must be >= 0")
        if any(r < 0 for r in self.post_rates.values()):
            raise ConfigError("post rates must be >= 0")
        for s in self.shock_events:
            if s.multiplier < 0:
                raise ConfigError("shock multiplier must be >= 0")
            if s.decay_days <= 0:
                raise ConfigError("shock decay_days must be > 0")

    @property
    def n_hate(self) -> int:
        return sum(p.n_hate for p in self.platforms)

    @property
    def end_time(self) -> int:
        return self.start_time + int(round(self.duration_days * DAY))


def _lognormal_members(rng: np.random.Generator, mean: float, sigma: float, n: int) -> np.ndarray:
    """Integer member counts, lognormal with the requested mean, min 1."""
    mu = math.log(mean) - 0.5 * sigma * sigma
    draw = rng.lognormal(mean=mu, sigma=sigma, size=n)
    return np.maximum(1, np.rint(draw)).astype(np.int64)


def shock_rate_factor(shocks: Sequence[ShockSpec], ts: np.ndarray) -> np.ndarray:
    """Multiplicative rate factor at times ts from all shocks combined."""
    factor = np.ones(len(ts), dtype=float)
    for s in shocks:
        tau = s.decay_days * DAY
        dt = ts - s.t
        active = dt >= 0
        factor[active] *= 1.0 + (s.multiplier - 1.0) * np.exp(-dt[active] / tau)
    return factor


def generate_ecosystem(cfg: GeneratorConfig) -> Dataset:
    """Build a complete synthetic dataset from one seeded configuration."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    t0, t1 = cfg.start_time, cfg.end_time
    duration_s = t1 - t0

    platforms = [normalize_platform(p.name) for p in cfg.platforms]
    graph = EcosystemGraph(platforms)

    # --- hate-core nodes -------------------------------------------------
    hate_ids: list[str] = []
    hate_platform_idx: list[int] = []
    for pi, spec in enumerate(cfg.platforms):
        members = _lognormal_members(rng, spec.mean_members, 0.75, spec.n_hate)
        banned = rng.random(spec.n_hate) < cfg.banned_fraction
        pname = platforms[pi]
        for i in range(spec.n_hate):
            nid = f"h_{pname}_{i:04d}"
            graph.register_node(
                CommunityNode(nid, pname, Klass.HATE_CORE, int(members[i]), t0, bool(banned[i]))
            )
            hate_ids.append(nid)
            hate_platform_idx.append(pi)
    n_hate = len(hate_ids)

    # disjoint blocks spanning platforms: round-robin over registration order
    n_blocks = min(cfg.n_blocks, n_hate)
    block_of = [i % n_blocks for i in range(n_hate)]
    block_members: list[list[int]] = [[] for _ in range(n_blocks)]
    pos_in_block = [0] * n_hate
    for i in range(n_hate):
        b = block_of[i]
        pos_in_block[i] = len(block_members[b])
        block_members[b].append(i)
    # per (block, platform): node indices, for planting return links
    block_platform_members: list[dict[int, list[int]]] = [{} for _ in range(n_blocks)]
    for i in range(n_hate):
        block_platform_members[block_of[i]].setdefault(hate_platform_idx[i], []).append(i)

    # --- mainstream and news nodes ---------------------------------------
    ms_ids: list[str] = []
    if cfg.n_mainstream:
        ms_platform = rng.integers(0, len(platforms), cfg.n_mainstream)
        ms_sizes = _lognormal_members(rng, cfg.mainstream_mean_members, 1.0, cfg.n_mainstream)
        for i in range(cfg.n_mainstream):
            nid = f"m_{i:06d}"
            graph.register_node(
                CommunityNode(
                    nid, platforms[int(ms_platform[i])], Klass.VULNERABLE_MAINSTREAM,
                    int(ms_sizes[i]), t0,
                )
            )
            ms_ids.append(nid)

    news_ids: list[str] = []
    for i in range(cfg.n_news):
        nid = f"n_{i:03d}"
        graph.register_node(
            CommunityNode(nid, platforms[i % len(platforms)], Klass.NEWS_SOURCE, 0, t0)
        )
        news_ids.append(nid)

    # --- core-core events with planted bypass returns --------------------
    bypass_window_s = int(cfg.bypass_window_days * DAY)
    n_cc = int(rng.poisson(cfg.rate_core_core * cfg.duration_days)) if n_hate else 0
    if n_cc:
        ts = np.sort(rng.integers(t0, t1, n_cc)).tolist()
        src_draw = rng.integers(0, n_hate, n_cc).tolist()
        tgt_u = rng.random(n_cc).tolist()
        plant_u = rng.random(n_cc).tolist()
        pending: list[tuple[int, int, int]] = []  # (deadline, src_idx, tgt_idx) FIFO
        pend_at = 0
        for k in range(n_cc):
            t = ts[k]
            emitted = False
            while pend_at < len(pending):
                deadline, b_idx, c_idx = pending[pend_at]
                if deadline < t:  # expired unplayed
                    pend_at += 1
                    continue
                pend_at += 1
                graph.append_event(
                    LinkEvent(hate_ids[b_idx], hate_ids[c_idx], t, LinkKind.CORE_CORE)
                )
                s_idx, t_idx = b_idx, c_idx
                emitted = True
                break
            if not emitted:
                s_idx = src_draw[k]
                block = block_members[block_of[s_idx]]
                if len(block) == 1:
                    t_idx = s_idx  # single-node block keeps links internal
                else:
                    j = int(tgt_u[k] * (len(block) - 1))
                    if j >= pos_in_block[s_idx]:
                        j += 1
                    t_idx = block[j]
                graph.append_event(
                    LinkEvent(hate_ids[s_idx], hate_ids[t_idx], t, LinkKind.CORE_CORE)
                )
            # a cross-platform hop may trigger a return to the origin platform
            if (
                hate_platform_idx[s_idx] != hate_platform_idx[t_idx]
                and plant_u[k] < cfg.bypass_probability
            ):
                back = block_platform_members[block_of[t_idx]].get(hate_platform_idx[s_idx])
                if back:
                    c_idx = back[int(rng.integers(0, len(back)))]
                    pending.append((t + bypass_window_s, t_idx, c_idx))

    # --- core-mainstream events with preferential attachment -------------
    n_cm = int(rng.poisson(cfg.rate_core_mainstream * cfg.duration_days)) if (
        n_hate and cfg.n_mainstream
    ) else 0
    if n_cm:
        ts = np.sort(rng.integers(t0, t1, n_cm)).tolist()
        src_draw = rng.integers(0, n_hate, n_cm).tolist()
        coin = (rng.random(n_cm) < cfg.preferential_probability).tolist()
        pick_u = rng.random(n_cm).tolist()
        history: list[int] = []
        n_main = cfg.n_mainstream
        for k in range(n_cm):
            if coin[k] and history:
                m_idx = history[int(pick_u[k] * len(history))]
            else:
                m_idx = int(pick_u[k] * n_main)
            history.append(m_idx)
            graph.append_event(
                LinkEvent(hate_ids[src_draw[k]], ms_ids[m_idx], ts[k], LinkKind.CORE_MAINSTREAM)
            )

    # --- core-news events -------------------------------------------------
    n_cn = int(rng.poisson(cfg.rate_core_news * cfg.duration_days)) if (
        n_hate and cfg.n_news
    ) else 0
    if n_cn:
        ts = np.sort(rng.integers(t0, t1, n_cn)).tolist()
        src_draw = rng.integers(0, n_hate, n_cn).tolist()
        tgt_draw = rng.integers(0, cfg.n_news, n_cn).tolist()
        for k in range(n_cn):
            graph.append_event(
                LinkEvent(hate_ids[src_draw[k]], news_ids[tgt_draw[k]], ts[k], LinkKind.CORE_NEWS)
            )

    graph.seal(t_start=t0, t_end=t1)

    # --- journeys ----------------------------------------------------------
    joins: list[JoinEvent] = []
    if cfg.n_individuals and n_hate:
        horizon_s = int(cfg.journey_horizon_days * DAY)
        span = min(horizon_s, duration_s)
        cap = min(cfg.max_joins, n_hate)
        lengths = np.exp(
            rng.normal(cfg.journey_log_mean, cfg.journey_log_sigma, cfg.n_individuals)
        )
        lengths = np.clip(np.rint(lengths), 1, cap).astype(int)
        latest_start = max(t0, t1 - span)
        for u in range(cfg.n_individuals):
            length = int(lengths[u])
            start = int(rng.integers(t0, latest_start + 1))
            communities = rng.choice(n_hate, size=length, replace=False)
            room = max(span - length - 1, 1)
            offsets = np.sort(rng.integers(0, room, length)) + np.arange(length)
            uid = f"u_{u:06d}"
            for c_idx, off in zip(communities.tolist(), offsets.tolist()):
                joins.append(JoinEvent(uid, hate_ids[c_idx], start + int(off)))

    # --- posts with shock-modulated rates ---------------------------------
    posts: list[PostRecord] = []
    if cfg.post_rates and n_hate:
        for category in sorted(cfg.post_rates):
            base = cfg.post_rates[category]
            if base <= 0:
                continue
            shocks = [s for s in cfg.shock_events if s.category == category]
            envelope = 1.0
            for s in shocks:
                envelope *= max(1.0, s.multiplier)
            lam_max = base * cfg.duration_days * envelope
            n_raw = int(rng.poisson(lam_max))
            ts = np.sort(rng.integers(t0, t1, n_raw))
            if shocks:
                accept = rng.random(n_raw) * envelope <= shock_rate_factor(shocks, ts)
                ts = ts[accept]
            n_acc = len(ts)
            communities = rng.integers(0, n_hate, n_acc)
            flagged = rng.random(n_acc) < cfg.flag_probability
            second = rng.random(n_acc) < 0.25
            for k in range(n_acc):
                if flagged[k]:
                    flags = (
                        (FLAG_HATE_SPEECH, FLAG_FASCIST_PROMOTION)
                        if second[k]
                        else (FLAG_HATE_SPEECH,)
                    )
                else:
                    flags = ()
                posts.append(
                    PostRecord(hate_ids[int(communities[k])], int(ts[k]), flags, category)
                )
        posts.sort(key=lambda p: (p.t, p.community, p.category))

    meta = {
        "seed": cfg.seed,
        "platforms": list(platforms),
        "time_range": [t0, t1],
        "generator_config": cfg.to_dict(),
    }
    return Dataset(graph=graph, joins=joins, posts=posts, meta=meta)

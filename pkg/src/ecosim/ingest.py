"""Dataset loading, validation and community labeling.

A dataset directory holds four JSONL files (UTF-8, one object per line,
integer-second timestamps) plus an optional meta.json sidecar:

    nodes.jsonl   {"id", "platform", "klass", "members", "created_at"[, "banned"]}
    events.jsonl  {"source", "target", "t", "kind"}
    joins.jsonl   {"individual", "community", "t"}
    posts.jsonl   {"community", "t", "flags": [...], "category"}
    meta.json     {"platforms": [...], "time_range": [t0, t1], ...}

meta.json declares the platform set up front; without it the set is derived
from nodes.jsonl. Malformed lines raise ParseError, referential problems
raise IntegrityError; both report the first 20 offending lines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EcosimError, IntegrityError, ParseError
from .graph import CommunityNode, EcosystemGraph, Klass, LinkEvent, LinkKind

NODES_FILE = "nodes.jsonl"
EVENTS_FILE = "events.jsonl"
JOINS_FILE = "joins.jsonl"
POSTS_FILE = "posts.jsonl"
META_FILE = "meta.json"

# flag vocabulary used by the shipped generator; the format itself accepts
# any strings
FLAG_HATE_SPEECH = "hate_speech"
FLAG_FASCIST_PROMOTION = "fascist_promotion"


@dataclass(frozen=True, slots=True)
class JoinEvent:
    """An individual joining a community at time t."""

    individual: str
    community: str
    t: int


@dataclass(frozen=True, slots=True)
class PostRecord:
    """One post in a community; flags mark policy-violating content."""

    community: str
    t: int
    flags: tuple[str, ...]
    category: str = "other"


@dataclass
class Dataset:
    """A sealed graph plus its join and post logs."""

    graph: EcosystemGraph
    joins: list[JoinEvent] = field(default_factory=list)
    posts: list[PostRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# labeling


def classify_community(posts: Sequence[PostRecord], window: int = 20, min_flagged: int = 2) -> bool:
    """Label a community hateful from its most recent posts.

    posts must be sorted most-recent-first. The community is hateful when
    at least min_flagged of its window most recent posts carry any flag
    (2 of 20 by default). Fewer than window posts: the rule applies to what
    is there.
    """
    flagged = sum(1 for p in posts[:window] if p.flags)
    return flagged >= min_flagged


def label_all_communities(
    posts: Iterable[PostRecord], window: int = 20, min_flagged: int = 2
) -> dict[str, bool]:
    """Apply classify_community to every community appearing in a post log."""
    by_community: dict[str, list[PostRecord]] = {}
    for p in posts:
        by_community.setdefault(p.community, []).append(p)
    labels = {}
    for cid, plist in by_community.items():
        plist.sort(key=lambda p: -p.t)
        labels[cid] = classify_community(plist, window=window, min_flagged=min_flagged)
    return labels


# ---------------------------------------------------------------------------
# core size


def estimate_core_size(g: EcosystemGraph) -> int:
    """Estimated individuals in the hate core.

    Per platform, mean members per hate community times the community
    count, summed over platforms. Communities overlap, so this is an upper
    bound on distinct individuals; it equals the plain member sum up to
    float rounding.
    """
    totals: dict[str, list[int]] = {}
    for node in g.nodes_of_klass(Klass.HATE_CORE):
        totals.setdefault(node.platform, []).append(node.members)
    estimate = 0.0
    for members in totals.values():
        estimate += (sum(members) / len(members)) * len(members)
    return round(estimate)


# ---------------------------------------------------------------------------
# serialization

_KLASS_VALUES = {k.value for k in Klass}
_KIND_VALUES = {"core_core", "core_mainstream", "core_news"}


def _node_to_obj(n: CommunityNode) -> dict:
    return {
        "id": n.id,
        "platform": n.platform,
        "klass": n.klass.value,
        "members": n.members,
        "created_at": n.created_at,
        "banned": n.banned,
    }


def write_dataset(ds: Dataset, directory: str | Path) -> Path:
    """Write the four JSONL files plus meta.json. Deterministic byte-wise."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    g = ds.graph
    with (directory / NODES_FILE).open("w", encoding="utf-8") as fh:
        for n in g.nodes.values():
            fh.write(json.dumps(_node_to_obj(n), sort_keys=True) + "\n")
    with (directory / EVENTS_FILE).open("w", encoding="utf-8") as fh:
        for e in g.events:
            obj = {"source": e.source, "target": e.target, "t": e.t, "kind": e.kind.value}
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
    with (directory / JOINS_FILE).open("w", encoding="utf-8") as fh:
        for j in ds.joins:
            obj = {"individual": j.individual, "community": j.community, "t": j.t}
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
    with (directory / POSTS_FILE).open("w", encoding="utf-8") as fh:
        for p in ds.posts:
            obj = {
                "community": p.community,
                "t": p.t,
                "flags": list(p.flags),
                "category": p.category,
            }
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
    meta = dict(ds.meta)
    meta.setdefault("platforms", list(g.platforms))
    meta.setdefault("time_range", list(g.time_range))
    with (directory / META_FILE).open("w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return directory


class _LineErrors:
    """Collects per-line problems; raises once with the first 20."""

    def __init__(self) -> None:
        self.parse: list[tuple[str, int, str]] = []
        self.integrity: list[tuple[str, int, str]] = []

    def raise_if_any(self) -> None:
        if self.parse:
            raise ParseError(self.parse)
        if self.integrity:
            raise IntegrityError(self.integrity)


def _iter_jsonl(path: Path, errors: _LineErrors):
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.parse.append((path.name, lineno, f"bad JSON: {exc.msg}"))
                continue
            if not isinstance(obj, dict):
                errors.parse.append((path.name, lineno, "expected a JSON object"))
                continue
            yield lineno, obj


def _require(obj: dict, key: str, types: tuple[type, ...], path: Path, lineno: int,
             errors: _LineErrors):
    if key not in obj:
        errors.parse.append((path.name, lineno, f"missing field {key!r}"))
        return None
    value = obj[key]
    # bool is an int subclass; never accept it in place of a number
    if not isinstance(value, types) or (isinstance(value, bool) and bool not in types):
        errors.parse.append((path.name, lineno, f"field {key!r} has wrong type"))
        return None
    return value


def load_dataset(directory: str | Path) -> Dataset:
    """Load and validate a dataset directory into a sealed graph + logs."""
    directory = Path(directory)
    errors = _LineErrors()

    meta: dict = {}
    meta_path = directory / META_FILE
    if meta_path.exists():
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError([(META_FILE, exc.lineno, f"bad JSON: {exc.msg}")]) from None

    nodes_path = directory / NODES_FILE
    if not nodes_path.exists():
        raise EcosimError(f"dataset has no {NODES_FILE}: {directory}")

    # first pass: node records
    raw_nodes: list[tuple[int, CommunityNode]] = []
    for lineno, obj in _iter_jsonl(nodes_path, errors):
        nid = _require(obj, "id", (str,), nodes_path, lineno, errors)
        platform = _require(obj, "platform", (str,), nodes_path, lineno, errors)
        klass = _require(obj, "klass", (str,), nodes_path, lineno, errors)
        members = _require(obj, "members", (int,), nodes_path, lineno, errors)
        created = _require(obj, "created_at", (int,), nodes_path, lineno, errors)
        if None in (nid, platform, klass, members, created):
            continue
        if klass not in _KLASS_VALUES:
            errors.parse.append((NODES_FILE, lineno, f"unknown klass {klass!r}"))
            continue
        if members < 0:
            errors.integrity.append((NODES_FILE, lineno, f"negative members for {nid!r}"))
            continue
        banned = obj.get("banned", False)
        if not isinstance(banned, bool):
            errors.parse.append((NODES_FILE, lineno, "field 'banned' has wrong type"))
            continue
        raw_nodes.append(
            (lineno, CommunityNode(nid, platform, Klass(klass), members, created, banned))
        )

    platforms = meta.get("platforms")
    if not platforms:
        seen: list[str] = []
        for _, n in raw_nodes:
            if n.platform not in seen:
                seen.append(n.platform)
        platforms = seen or ["unknown"]

    graph = EcosystemGraph(platforms)
    for lineno, node in raw_nodes:
        try:
            graph.register_node(node)
        except EcosimError as exc:
            errors.integrity.append((NODES_FILE, lineno, str(exc)))

    events_path = directory / EVENTS_FILE
    if events_path.exists():
        for lineno, obj in _iter_jsonl(events_path, errors):
            src = _require(obj, "source", (str,), events_path, lineno, errors)
            tgt = _require(obj, "target", (str,), events_path, lineno, errors)
            t = _require(obj, "t", (int,), events_path, lineno, errors)
            kind = _require(obj, "kind", (str,), events_path, lineno, errors)
            if None in (src, tgt, t, kind):
                continue
            if kind not in _KIND_VALUES:
                errors.integrity.append((EVENTS_FILE, lineno, f"unknown kind {kind!r}"))
                continue
            try:
                graph.append_event(LinkEvent(src, tgt, t, LinkKind(kind)))
            except EcosimError as exc:
                errors.integrity.append((EVENTS_FILE, lineno, str(exc)))

    joins: list[JoinEvent] = []
    joins_path = directory / JOINS_FILE
    if joins_path.exists():
        seen_pairs: set[tuple[str, str]] = set()
        for lineno, obj in _iter_jsonl(joins_path, errors):
            ind = _require(obj, "individual", (str,), joins_path, lineno, errors)
            com = _require(obj, "community", (str,), joins_path, lineno, errors)
            t = _require(obj, "t", (int,), joins_path, lineno, errors)
            if None in (ind, com, t):
                continue
            if com not in graph.nodes:
                errors.integrity.append((JOINS_FILE, lineno, f"unknown community {com!r}"))
                continue
            pair = (ind, com)
            if pair in seen_pairs:
                errors.integrity.append(
                    (JOINS_FILE, lineno, f"duplicate join {ind!r} -> {com!r}")
                )
                continue
            seen_pairs.add(pair)
            joins.append(JoinEvent(ind, com, t))

    posts: list[PostRecord] = []
    posts_path = directory / POSTS_FILE
    if posts_path.exists():
        for lineno, obj in _iter_jsonl(posts_path, errors):
            com = _require(obj, "community", (str,), posts_path, lineno, errors)
            t = _require(obj, "t", (int,), posts_path, lineno, errors)
            flags = _require(obj, "flags", (list,), posts_path, lineno, errors)
            if None in (com, t, flags):
                continue
            if not all(isinstance(f, str) for f in flags):
                errors.parse.append((POSTS_FILE, lineno, "flags must be strings"))
                continue
            if com not in graph.nodes:
                errors.integrity.append((POSTS_FILE, lineno, f"unknown community {com!r}"))
                continue
            category = obj.get("category", "other")
            if not isinstance(category, str):
                errors.parse.append((POSTS_FILE, lineno, "field 'category' has wrong type"))
                continue
            posts.append(PostRecord(com, t, tuple(flags), category))

    errors.raise_if_any()

    time_range = meta.get("time_range")
    if isinstance(time_range, list) and len(time_range) == 2:
        graph.seal(t_start=int(time_range[0]), t_end=int(time_range[1]))
    else:
        graph.seal()
    return Dataset(graph=graph, joins=joins, posts=posts, meta=meta)

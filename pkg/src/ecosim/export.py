"""Snapshot and aggregate exports for external graph tooling."""

from __future__ import annotations

import csv
from pathlib import Path

import networkx as nx

from .graph import EcosystemGraph, PlatformAggregate, Snapshot


def snapshot_to_networkx(snap: Snapshot) -> nx.DiGraph:
    """Weighted digraph of a snapshot.

    Every registered node is included (isolated ones too) with platform,
    klass and members attributes; parallel events collapse into a single
    edge whose weight is the event count.
    """
    g = nx.DiGraph(as_of=snap.as_of)
    for node in snap.nodes.values():
        g.add_node(
            node.id,
            platform=node.platform,
            klass=node.klass.value,
            members=int(node.members),
        )
    for (src, tgt), w in snap.weights().items():
        g.add_edge(src, tgt, weight=int(w))
    return g


def aggregate_to_networkx(agg: PlatformAggregate) -> nx.DiGraph:
    g = nx.DiGraph(as_of=agg.as_of)
    for p in agg.platforms:
        g.add_node(p, role="platform")
    for (src, tgt), w in agg.edges.items():
        if tgt not in g:
            g.add_node(tgt, role="sink")
        g.add_edge(src, tgt, weight=int(w))
    return g


def write_gexf(obj: Snapshot | PlatformAggregate, path: str | Path) -> Path:
    path = Path(path)
    if isinstance(obj, Snapshot):
        g = snapshot_to_networkx(obj)
    else:
        g = aggregate_to_networkx(obj)
    nx.write_gexf(g, path)
    return path


def write_edge_csv(obj: Snapshot | PlatformAggregate, path: str | Path) -> Path:
    """Edge list (source, target, weight), rows sorted for reproducibility."""
    path = Path(path)
    if isinstance(obj, Snapshot):
        rows = sorted((s, t, w) for (s, t), w in obj.weights().items())
    else:
        rows = sorted((s, t, w) for (s, t), w in obj.edges.items())
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target", "weight"])
        writer.writerows(rows)
    return path

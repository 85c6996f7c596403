"""Toolkit for temporal multilayer community-link ecosystems.

Covers ingest and validation of link datasets, seeded synthetic
generation, structural and temporal analytics, individual journey
summaries, attrition models of moderation pressure, and an agent-based
moderation simulation. The `ecosim` command line fronts all of it.
"""

from .errors import EcosimError
from .graph import (
    CommunityNode,
    EcosystemGraph,
    Klass,
    LinkEvent,
    LinkKind,
    PlatformAggregate,
    Snapshot,
)
from .ingest import (
    Dataset,
    JoinEvent,
    PostRecord,
    classify_community,
    estimate_core_size,
    load_dataset,
    write_dataset,
)
from .generator import GeneratorConfig, PlatformSpec, ShockSpec, generate_ecosystem

__version__ = "0.1.0"

__all__ = [
    "EcosimError",
    "CommunityNode",
    "EcosystemGraph",
    "Klass",
    "LinkEvent",
    "LinkKind",
    "PlatformAggregate",
    "Snapshot",
    "Dataset",
    "JoinEvent",
    "PostRecord",
    "classify_community",
    "estimate_core_size",
    "load_dataset",
    "write_dataset",
    "GeneratorConfig",
    "PlatformSpec",
    "ShockSpec",
    "generate_ecosystem",
    "__version__",
]

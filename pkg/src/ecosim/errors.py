"""Exception taxonomy shared across the package.

Everything raised on purpose derives from EcosimError so callers (and the
CLI) can distinguish data problems from genuine bugs.
"""

from __future__ import annotations


class EcosimError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# graph construction


class DuplicateIdError(EcosimError):
    """A node id was registered twice."""


class UnknownPlatformError(EcosimError):
    """Node references a platform outside the declared platform set."""


class UnknownEndpointError(EcosimError):
    """Link event references a node id that was never registered."""


class SourceNotHateCoreError(EcosimError):
    """Link events may only originate in hate-core nodes."""


class KindMismatchError(EcosimError):
    """Link kind does not match the class of the target node."""


class GraphSealedError(EcosimError):
    """Mutation attempted after the graph was sealed."""


class GraphNotSealedError(EcosimError):
    """Query that requires a sealed (sorted, validated) graph."""


# ---------------------------------------------------------------------------
# ingest / datasets


class ParseError(EcosimError):
    """A dataset file contains lines that do not parse.

    Carries up to the first 20 offending (file, line number, message)
    triples in .offenders.
    """

    def __init__(self, offenders: list[tuple[str, int, str]]):
        self.offenders = offenders[:20]
        lines = "\n".join(f"  {f}:{n}: {m}" for f, n, m in self.offenders)
        super().__init__(f"{len(offenders)} malformed line(s), first shown:\n{lines}")


class IntegrityError(EcosimError):
    """Dataset parsed but is internally inconsistent (unknown ids, bad kinds).

    Carries up to the first 20 offending (file, line number, message)
    triples in .offenders.
    """

    def __init__(self, offenders: list[tuple[str, int, str]]):
        self.offenders = offenders[:20]
        lines = "\n".join(f"  {f}:{n}: {m}" for f, n, m in self.offenders)
        super().__init__(f"{len(offenders)} integrity violation(s), first shown:\n{lines}")


class ConfigError(EcosimError):
    """Generator or CLI configuration is invalid."""


class UnknownCommunityError(EcosimError):
    """Join references a community with no known ban status."""


# ---------------------------------------------------------------------------
# analytics


class InsufficientDataError(EcosimError):
    """Requested windows fall outside the available series."""


# ---------------------------------------------------------------------------
# attrition models


class DegenerateScenarioError(EcosimError):
    """One side starts at zero; the outcome is decided without dynamics."""


class UnsupportedLawError(EcosimError):
    """Closed-form evaluation requested for a law that has none here."""


class PastExtinctionError(EcosimError):
    """Closed-form evaluation requested beyond the extinction time."""


class StepTooLargeError(EcosimError):
    """Integrator invariant drift exceeded the refusal threshold."""

    def __init__(self, message: str, suggested_dt: float):
        self.suggested_dt = suggested_dt
        super().__init__(f"{message} (suggested dt: {suggested_dt:.3e})")


# ---------------------------------------------------------------------------
# moderation simulation


class InvalidPolicyError(EcosimError):
    """Moderation policy or adaptation rule is malformed."""

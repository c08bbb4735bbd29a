"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class Docs2OasError(Exception):
    """Base class; ``stage`` names the pipeline step that raised."""

    stage = "pipeline"


# ingest
class SourceUnreachable(Docs2OasError):
    stage = "ingest"


class EmptyDocument(Docs2OasError):
    stage = "ingest"


class ParseFailure(Docs2OasError):
    stage = "ingest"


class DegenerateHistogram(Docs2OasError):
    stage = "ingest"


# extractor
class MalformedExample(Docs2OasError):
    stage = "extract"


# scope
class ScopeNotFound(Docs2OasError):
    stage = "scope"


class NoCandidates(Docs2OasError):
    stage = "scope"


class BudgetImpossible(Docs2OasError):
    stage = "scope"


# gateway
class EmptyLibrary(Docs2OasError):
    stage = "gateway"


class ProviderError(Docs2OasError):
    stage = "gateway"


class ValidationExhausted(Docs2OasError):
    stage = "gateway"

    def __init__(self, message: str, outputs: list[str] | None = None):
        super().__init__(message)
        self.outputs = outputs or []


class OracleUnsupported(Docs2OasError):
    stage = "gateway"


# builder
class InvalidThreshold(Docs2OasError):
    stage = "builder"


class NotJson(Docs2OasError):
    stage = "builder"


class InconsistentPrefixes(Docs2OasError):
    stage = "builder"


class MergeWarning(UserWarning):
    """Two schema parts disagreed on a primitive type; the first one was kept."""


# enrich
class MalformedTsv(Docs2OasError):
    stage = "enrich"


class MalformedSchema(Docs2OasError):
    stage = "enrich"


# validate / evaluate
class EmptyCorpus(Docs2OasError):
    stage = "evaluate"


class SelectorMiss(Docs2OasError):
    stage = "evaluate"


class NoEligiblePairs(Docs2OasError):
    stage = "evaluate"

"""Syntactic checks: JSON validity, OpenAPI 3.0 meta-schema validity, warning counts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable

from jsonschema import Draft4Validator

from .errors import EmptyCorpus

META_SCHEMA_FILE = "openapi-3.0-2021-09-28.json"
META_SCHEMA_ID = "https://spec.openapis.org/oas/3.0/schema/2021-09-28"


@lru_cache(maxsize=1)
def meta_schema() -> dict:
    text = (resources.files("docs2oas") / "resources" / META_SCHEMA_FILE).read_text(encoding="utf-8")
    return json.loads(text)


@lru_cache(maxsize=1)
def _validator() -> Draft4Validator:
    return Draft4Validator(meta_schema())


@dataclass(frozen=True)
class ValidationWarning:
    json_pointer: str
    message: str

    def to_dict(self) -> dict:
        return {"json_pointer": self.json_pointer, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    is_valid_json: bool
    is_valid_oas: bool
    warnings: tuple[ValidationWarning, ...] = ()
    error: str | None = None

    def __post_init__(self) -> None:
        if self.is_valid_oas and (not self.is_valid_json or self.warnings):
            raise ValueError("a valid OAS document is valid JSON with no warnings")

    @property
    def warning_count(self) -> int:
        return len(self.warnings)

    def to_dict(self) -> dict:
        out = {
            "is_valid_json": self.is_valid_json,
            "is_valid_oas": self.is_valid_oas,
            "warning_count": self.warning_count,
            "warnings": [w.to_dict() for w in self.warnings],
        }
        if self.error:
            out["error"] = self.error
        return out


def _pointer(path: Iterable) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def _reject_constant(token: str):
    raise ValueError(f"{token} is not valid JSON")


def check_document(text: str) -> ValidationReport:
    """Parse ``text`` strictly and validate it against the bundled meta-schema.

    Every top-level violation reported by the validator counts as one
    warning, located by the JSON pointer of the offending instance.
    """
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except (ValueError, TypeError) as exc:
        return ValidationReport(False, False, error=str(exc))
    errors = sorted(_validator().iter_errors(data), key=lambda e: (_pointer(e.absolute_path), e.message))
    warnings = tuple(ValidationWarning(_pointer(e.absolute_path), e.message) for e in errors)
    return ValidationReport(True, not warnings, warnings)


@dataclass(frozen=True)
class SyntaxSummary:
    n_docs: int
    valid_json_ratio: float
    valid_oas_ratio: float
    avg_warnings: float
    per_doc: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "n_docs": self.n_docs,
            "valid_json_ratio": self.valid_json_ratio,
            "valid_oas_ratio": self.valid_oas_ratio,
            "avg_warnings": self.avg_warnings,
        }

    def row(self) -> str:
        """Compact ``json / oas / warnings`` line, two decimals."""
        return f"{self.valid_json_ratio:.2f} / {self.valid_oas_ratio:.2f} / {self.avg_warnings:.2f}"


def summarize(reports: list[ValidationReport]) -> SyntaxSummary:
    """Corpus ratios; warnings are averaged over the JSON-valid documents only."""
    if not reports:
        raise EmptyCorpus("no documents to summarize")
    n = len(reports)
    valid_json = [r for r in reports if r.is_valid_json]
    avg = sum(r.warning_count for r in valid_json) / len(valid_json) if valid_json else 0.0
    return SyntaxSummary(
        n_docs=n,
        valid_json_ratio=len(valid_json) / n,
        valid_oas_ratio=sum(r.is_valid_oas for r in reports) / n,
        avg_warnings=avg,
    )

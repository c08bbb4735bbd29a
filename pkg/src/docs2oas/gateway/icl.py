"""Labeled in-context examples and their selection by tag-histogram similarity."""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import EmptyLibrary, MalformedSchema
from ..ingest import DomNode, TagHistogram, histogram_similarity, parse_dom, serialize, tag_frequency
from .tasks import Task, output_validator

log = logging.getLogger(__name__)

DEFAULT_K = 3
DEFAULT_METRIC = "cosine"


def fingerprint(fragment: DomNode) -> str:
    """Content hash of a fragment, insensitive to attributes and whitespace runs."""
    text = serialize(fragment, strip_attributes=True)
    text = re.sub(r"\s+", " ", text).strip()
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class IclExample:
    example_id: str
    task: Task
    input_html: str
    expected_output: str
    histogram: TagHistogram
    source_site: str = ""
    fingerprint: str = ""

    @classmethod
    def create(cls, example_id: str, task: Task | str, input_html: str, expected_output: str,
               source_site: str = "", validate: bool = True) -> IclExample:
        task = Task(task)
        if validate and not output_validator(task)(expected_output):
            raise MalformedSchema(f"ICL example {example_id}: expected output fails the {task.value} check")
        root = parse_dom(input_html).root
        return cls(
            example_id=example_id,
            task=task,
            input_html=input_html,
            expected_output=expected_output,
            histogram=tag_frequency(root),
            source_site=source_site,
            fingerprint=fingerprint(root),
        )


@dataclass(frozen=True)
class IclLibrary:
    examples: tuple[IclExample, ...]
    _by_task: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        ids = [e.example_id for e in self.examples]
        if len(ids) != len(set(ids)):
            raise ValueError("ICL example ids must be unique")
        index: dict[Task, list[IclExample]] = {}
        for e in self.examples:
            index.setdefault(e.task, []).append(e)
        object.__setattr__(self, "_by_task", {t: tuple(v) for t, v in index.items()})

    def for_task(self, task: Task | str) -> tuple[IclExample, ...]:
        return self._by_task.get(Task(task), ())

    def __len__(self) -> int:
        return len(self.examples)


def load_library(directory: str | Path) -> IclLibrary:
    """Read ``<dir>/<example_id>/{input.html, output.tsv|output.json, meta.json}``."""
    root = Path(directory)
    if not root.is_dir():
        raise EmptyLibrary(f"ICL directory not found: {root}")
    examples = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        meta = json.loads((sub / "meta.json").read_text(encoding="utf-8"))
        task = Task(meta["task"])
        output = sub / f"output.{task.output_suffix}"
        examples.append(
            IclExample.create(
                example_id=sub.name,
                task=task,
                input_html=(sub / "input.html").read_text(encoding="utf-8"),
                expected_output=output.read_text(encoding="utf-8"),
                source_site=meta.get("source_site", ""),
            )
        )
    return IclLibrary(tuple(examples))


def default_library() -> IclLibrary:
    """The labeled examples shipped with the package."""
    with resources.as_file(resources.files("docs2oas") / "data" / "icl") as path:
        return load_library(path)


def select_icl_examples(
    fragment: DomNode,
    library: IclLibrary,
    task: Task | str,
    k: int = DEFAULT_K,
    metric: str = DEFAULT_METRIC,
    exclude_self: bool = True,
) -> list[IclExample]:
    """Top ``k`` examples for ``task`` by histogram similarity to ``fragment``.

    Cosine ranks descending, KL divergence ascending; ties go to the smaller
    example id. With ``exclude_self`` an example whose content hash equals
    the fragment's is never returned (leave-one-out).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pool = list(library.for_task(task))
    if not pool:
        raise EmptyLibrary(f"no ICL examples for task {Task(task).value}")
    if exclude_self:
        own = fingerprint(fragment)
        pool = [e for e in pool if e.fingerprint != own]
    query = tag_frequency(fragment)
    if not query.counts:
        # nothing structural to compare: fall back to id order
        ranked = sorted(pool, key=lambda e: e.example_id)
    elif metric == "cosine":
        ranked = sorted(pool, key=lambda e: (-histogram_similarity(query, e.histogram, "cosine"), e.example_id))
    else:
        ranked = sorted(pool, key=lambda e: (histogram_similarity(query, e.histogram, metric), e.example_id))
    if len(ranked) < k:
        log.warning("only %d ICL examples available for %s (k=%d)", len(ranked), Task(task).value, k)
    return ranked[:k]

"""Prompt assembly from frozen per-task templates."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from typing import Sequence

from .icl import IclExample
from .tasks import Task


@lru_cache(maxsize=None)
def instruction(task: Task | str) -> str:
    name = f"{Task(task).value}.txt"
    text = (resources.files("docs2oas") / "gateway" / "templates" / name).read_text(encoding="utf-8")
    return text.strip()


def build_prompt(task: Task | str, icl: Sequence[IclExample], input_payload: str) -> str:
    """Instruction block, one input/output demonstration per example, then the new input.

    The layout depends only on the arguments.
    """
    task = Task(task)
    if task.is_enrichment and not icl:
        raise ValueError(f"{task.value} prompts need at least one in-context example")
    parts = [instruction(task), ""]
    for i, ex in enumerate(icl, 1):
        parts += [
            f"### Example {i} input",
            ex.input_html.strip(),
            f"### Example {i} output",
            ex.expected_output.strip(),
            "",
        ]
    parts += ["### Input", input_payload.strip(), "### Output", ""]
    return "\n".join(parts)

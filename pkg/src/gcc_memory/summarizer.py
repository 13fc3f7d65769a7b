"""Progress-summary regeneration for commit and merge entries.

The default summarizer is a deterministic concatenation with a length budget.
An external command can stand in for a language model: it receives the two
texts on stdin separated by a NUL byte and prints the summary.
"""

from __future__ import annotations

import logging
import shlex
import subprocess
from dataclasses import dataclass
from typing import Literal

logger = logging.getLogger(__name__)

SEPARATOR = "\n---\n"
ELISION = "\n[... elided ...]\n"
MERGE_LABEL = "[merged from branch]"
HEAD_SHARE = 0.25
TAIL_SHARE = 0.65
MIN_CHARS = 200


@dataclass(frozen=True)
class SummarizerSpec:
    kind: Literal["default", "external"] = "default"
    max_chars: int = 2000
    external_command: str | None = None
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.max_chars < MIN_CHARS:
            raise ValueError(f"max_chars must be >= {MIN_CHARS}")
        if self.kind == "external" and not self.external_command:
            raise ValueError("external summarizer needs a command")


DEFAULT = SummarizerSpec()


class FallbackSummary(str):
    """Summary produced by the default rule after the external command failed."""


def apply_budget(text: str, max_chars: int) -> str:
    """Keep the head and tail of ``text`` around an elision marker."""
    if len(text) <= max_chars:
        return text
    head = int(max_chars * HEAD_SHARE)
    tail = int(max_chars * TAIL_SHARE)
    return text[:head] + ELISION + text[len(text) - tail:]


def _default_fold(previous: str, contribution: str, max_chars: int) -> str:
    joined = contribution if not previous else previous + SEPARATOR + contribution
    return apply_budget(joined, max_chars)


def _default_merge(current: str, target: str, max_chars: int) -> str:
    block = f"{MERGE_LABEL}\n{target}"
    joined = block if not current else f"{current}\n{block}"
    return apply_budget(joined, max_chars)


def _run_external(spec: SummarizerSpec, first: str, second: str) -> str:
    proc = subprocess.run(
        shlex.split(spec.external_command),
        input=(first + "\x00" + second).encode("utf-8"),
        capture_output=True,
        timeout=spec.timeout,
        check=True,
    )
    return apply_budget(proc.stdout.decode("utf-8"), spec.max_chars)


def _dispatch(spec: SummarizerSpec, first: str, second: str, default) -> str:
    if spec.kind == "default":
        return default(first, second, spec.max_chars)
    try:
        return _run_external(spec, first, second)
    except (OSError, subprocess.SubprocessError, UnicodeDecodeError) as exc:
        logger.warning("external summarizer failed (%s); using default", exc)
        return FallbackSummary(default(first, second, spec.max_chars))


def fold(previous_summary: str, contribution: str, spec: SummarizerSpec = DEFAULT) -> str:
    return _dispatch(spec, previous_summary, contribution, _default_fold)


def merge_summaries(current: str, target: str, spec: SummarizerSpec = DEFAULT) -> str:
    return _dispatch(spec, current, target, _default_merge)

"""Document types for the ``.GCC/`` tree and their canonical text forms.

Four formats live here:

* ``main.md``       -- :class:`Roadmap`
* ``commit.md``     -- a list of :class:`CommitEntry`
* ``log.md``        -- a list of :class:`OtaRecord`
* ``metadata.yaml`` -- :class:`MetadataDoc` (see :mod:`gcc_memory._yaml`)

Every ``render_*`` produces text that the matching ``parse_*`` maps back to an
equal value.  Free-text blocks may contain any characters; body lines that
would be mistaken for structure are escaped with a leading backslash.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Iterable, Sequence

from . import _yaml
from .errors import ParseError

Clock = Callable[[], datetime]

TS_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
_TS_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z\Z")


def utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime(TS_FORMAT)


def parse_ts(text: str) -> datetime:
    if not _TS_RE.match(text):
        raise ValueError(f"not an RFC-3339 UTC timestamp: {text!r}")
    return datetime.strptime(text, TS_FORMAT).replace(tzinfo=timezone.utc)


class FixedClock:
    """Clock that always returns the same instant; settable between calls."""

    def __init__(self, when: datetime | str) -> None:
        self.set(when)

    def set(self, when: datetime | str) -> None:
        self.now = parse_ts(when) if isinstance(when, str) else when.replace(microsecond=0)

    def __call__(self) -> datetime:
        return self.now


def _check_single_line(label: str, text: str) -> None:
    if "\n" in text:
        raise ValueError(f"{label} must be a single line")


# -- escaping of free-text blocks ---------------------------------------------


def _escape_block(text: str, is_structural: Callable[[str], bool]) -> list[str]:
    if text == "":
        return []
    out = []
    for line in text.split("\n"):
        if is_structural(line.lstrip("\\")):
            line = "\\" + line
        out.append(line)
    return out


def _unescape_line(line: str, is_structural: Callable[[str], bool]) -> str:
    if line.startswith("\\") and is_structural(line.lstrip("\\")):
        return line[1:]
    return line


def _split_lines(text: str) -> list[str]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _block_body(lines: list[str], start: int, end: int, is_structural) -> str:
    """Body between a heading and the next structural line.

    The last line of the span is the blank separator that render emits.
    """
    body = lines[start:end]
    if body and body[-1] == "":
        body = body[:-1]
    return "\n".join(_unescape_line(x, is_structural) for x in body)


# -- main.md -------------------------------------------------------------------

ROADMAP_HEADER = "# Project Roadmap"
_GOAL = "## Goal"
_MILESTONES = "## Milestones"
_NOTES = "## Notes"
_MILESTONE_RE = re.compile(r"^- \[([ x])\] (.*)\Z")


@dataclass
class Milestone:
    text: str
    done: bool = False


@dataclass
class Roadmap:
    goal: str
    milestones: list[Milestone] = field(default_factory=list)
    notes: str = ""

    @classmethod
    def from_todo(cls, goal: str, todo: Iterable[str]) -> "Roadmap":
        return cls(goal=goal, milestones=[Milestone(t) for t in todo])


def _roadmap_structural(line: str) -> bool:
    return line in (ROADMAP_HEADER, _GOAL, _MILESTONES, _NOTES)


def render_roadmap(roadmap: Roadmap) -> str:
    lines = [ROADMAP_HEADER, "", _GOAL]
    lines += _escape_block(roadmap.goal, _roadmap_structural)
    lines += ["", _MILESTONES]
    for m in roadmap.milestones:
        _check_single_line("milestone text", m.text)
        lines.append(f"- [{'x' if m.done else ' '}] {m.text}")
    if roadmap.notes:
        lines += ["", _NOTES]
        lines += roadmap.notes.split("\n")
    return "\n".join(lines) + "\n"


def parse_roadmap(text: str) -> Roadmap:
    lines = _split_lines(text)
    if not lines or lines[0] != ROADMAP_HEADER:
        raise ParseError(f"expected {ROADMAP_HEADER!r}", line=1)
    try:
        goal_at = lines.index(_GOAL)
    except ValueError:
        raise ParseError(f"missing {_GOAL!r} section", line=len(lines) or 1) from None
    if any(x.strip() for x in lines[1:goal_at]):
        raise ParseError("unexpected text before goal", line=2)
    try:
        ms_at = lines.index(_MILESTONES, goal_at + 1)
    except ValueError:
        raise ParseError(f"missing {_MILESTONES!r} section", line=len(lines)) from None
    goal = _block_body(lines, goal_at + 1, ms_at, _roadmap_structural)

    milestones = []
    notes = ""
    i = ms_at + 1
    while i < len(lines):
        line = lines[i]
        m = _MILESTONE_RE.match(line)
        if m:
            milestones.append(Milestone(m.group(2), m.group(1) == "x"))
        elif line == "":
            pass
        elif line == _NOTES:
            notes = "\n".join(lines[i + 1:])
            break
        else:
            # unknown trailing section, kept verbatim
            notes = "\n".join(lines[i:])
            break
        i += 1
    return Roadmap(goal=goal, milestones=milestones, notes=notes)


# -- commit.md -----------------------------------------------------------------

COMMIT_PREFIX = "# COMMIT "
PURPOSE_HEADING = "## Branch Purpose"
PROGRESS_HEADING = "## Previous Progress Summary"
CONTRIBUTION_HEADING = "## This Commit Contribution"
_BLOCK_HEADINGS = (PURPOSE_HEADING, PROGRESS_HEADING, CONTRIBUTION_HEADING)
_ID_RE = re.compile(r"^[0-9a-f]{8}\Z")


@dataclass
class CommitEntry:
    id: str
    timestamp: datetime
    message: str
    branch_purpose: str = ""
    previous_progress: str = ""
    contribution: str = ""

    def header(self) -> str:
        return f"{COMMIT_PREFIX}{self.id} | {format_ts(self.timestamp)} | {self.message}"

    def summary(self) -> dict[str, str]:
        return {"id": self.id, "timestamp": format_ts(self.timestamp), "message": self.message}


def _commit_structural(line: str) -> bool:
    return line.startswith(COMMIT_PREFIX) or line in _BLOCK_HEADINGS


def compute_commit_id(parent_id: str, timestamp: datetime | str, message: str, contribution: str) -> str:
    """First 8 hex chars of SHA-256 over the NUL-joined inputs."""
    ts = timestamp if isinstance(timestamp, str) else format_ts(timestamp)
    payload = "\x00".join([parent_id, ts, message, contribution]).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:8]


def render_commit_entry(entry: CommitEntry) -> str:
    if not _ID_RE.match(entry.id):
        raise ValueError(f"bad commit id {entry.id!r}")
    _check_single_line("commit message", entry.message)
    lines = [entry.header()]
    for heading, body in zip(_BLOCK_HEADINGS, (entry.branch_purpose, entry.previous_progress, entry.contribution)):
        lines.append(heading)
        lines += _escape_block(body, _commit_structural)
        lines.append("")
    return "\n".join(lines) + "\n"


def render_commit_file(entries: Sequence[CommitEntry]) -> str:
    return "".join(render_commit_entry(e) for e in entries)


def _parse_commit_header(line: str, lineno: int) -> tuple[str, datetime, str]:
    parts = line[len(COMMIT_PREFIX):].split(" | ", 2)
    if len(parts) != 3 or not _ID_RE.match(parts[0]):
        raise ParseError("malformed commit header", line=lineno)
    try:
        ts = parse_ts(parts[1])
    except ValueError as exc:
        raise ParseError(str(exc), line=lineno) from None
    return parts[0], ts, parts[2]


def parse_commit_file(text: str) -> list[CommitEntry]:
    lines = _split_lines(text)
    entries: list[CommitEntry] = []
    i = 0
    n = len(lines)
    while i < n:
        if lines[i] == "":
            i += 1
            continue
        if not lines[i].startswith(COMMIT_PREFIX):
            raise ParseError("expected commit header", line=i + 1)
        cid, ts, message = _parse_commit_header(lines[i], i + 1)
        i += 1
        blocks = []
        for heading in _BLOCK_HEADINGS:
            if i >= n or lines[i] != heading:
                raise ParseError(f"missing {heading!r}", line=min(i, n - 1) + 1)
            start = i = i + 1
            while i < n and not _commit_structural(lines[i]):
                i += 1
            blocks.append(_block_body(lines, start, i, _commit_structural))
        entries.append(CommitEntry(cid, ts, message, *blocks))
    return entries


# -- log.md --------------------------------------------------------------------

_OTA_HEADER_RE = re.compile(r"^=== OTA (\d+) (\S+) ===\Z")
_TAG_RE = re.compile(r"^== Branch (\S+) ==\Z")
_END_TAG_RE = re.compile(r"^== End Branch (\S+) ==\Z")
_FIELD_PREFIXES = ("[O] ", "[T] ", "[A] ")
_CONT = "    "


@dataclass
class OtaRecord:
    seq: int
    timestamp: datetime
    observation: str = ""
    thought: str = ""
    action: str = ""
    origin: str | None = None


def origin_tag(branch: str) -> str:
    return f"== Branch {branch} ==\n\n"


def end_origin_tag(branch: str) -> str:
    return f"== End Branch {branch} ==\n\n"


def render_ota(record: OtaRecord) -> str:
    """One record; the origin field is carried by surrounding tags, not here."""
    if record.seq < 1:
        raise ValueError("seq must be positive")
    lines = [f"=== OTA {record.seq} {format_ts(record.timestamp)} ==="]
    for prefix, text in zip(_FIELD_PREFIXES, (record.observation, record.thought, record.action)):
        first, *rest = text.split("\n")
        lines.append(prefix + first)
        lines += [_CONT + x for x in rest]
    return "\n".join(lines) + "\n\n"


def render_log(records: Sequence[OtaRecord]) -> str:
    """Render records, opening and closing origin tags where ``origin`` changes."""
    out = []
    current: str | None = None
    for rec in records:
        if rec.origin != current:
            if current is not None:
                out.append(end_origin_tag(current))
            if rec.origin is not None:
                out.append(origin_tag(rec.origin))
            current = rec.origin
        out.append(render_ota(rec))
    if current is not None:
        out.append(end_origin_tag(current))
    return "".join(out)


def parse_log(text: str) -> list[OtaRecord]:
    lines = _split_lines(text)
    records: list[OtaRecord] = []
    origins: list[str] = []
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        if line == "":
            i += 1
            continue
        tag = _TAG_RE.match(line)
        if tag:
            origins.append(tag.group(1))
            i += 1
            continue
        end = _END_TAG_RE.match(line)
        if end:
            if not origins or origins[-1] != end.group(1):
                raise ParseError(f"unbalanced end tag for {end.group(1)!r}", line=i + 1)
            origins.pop()
            i += 1
            continue
        head = _OTA_HEADER_RE.match(line)
        if not head:
            raise ParseError("malformed record header", line=i + 1)
        try:
            ts = parse_ts(head.group(2))
        except ValueError as exc:
            raise ParseError(str(exc), line=i + 1) from None
        seq = int(head.group(1))
        if seq < 1:
            raise ParseError("seq must be positive", line=i + 1)
        i += 1
        fields = []
        for prefix in _FIELD_PREFIXES:
            if i >= n or not lines[i].startswith(prefix):
                raise ParseError(f"expected {prefix.strip()!r} line", line=min(i, n - 1) + 1)
            parts = [lines[i][len(prefix):]]
            i += 1
            while i < n and lines[i].startswith(_CONT):
                parts.append(lines[i][len(_CONT):])
                i += 1
            fields.append("\n".join(parts))
        records.append(OtaRecord(seq, ts, *fields, origin=origins[-1] if origins else None))
    if origins:
        raise ParseError(f"unterminated origin tag for {origins[-1]!r}", line=n)
    return records


# -- metadata.yaml -------------------------------------------------------------

DEFAULT_SEGMENTS = ("file_structure", "env_config")


@dataclass
class MetadataDoc:
    segments: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def default(cls) -> "MetadataDoc":
        return cls({name: {} for name in DEFAULT_SEGMENTS})


def render_metadata(doc: MetadataDoc) -> str:
    return _yaml.dump(doc.segments)


def parse_metadata(text: str) -> MetadataDoc:
    return MetadataDoc(_yaml.load(text))

"""CONTEXT: read-only views of the repository at several resolutions.

* :func:`context_status`   -- roadmap progress and the branch list
* :func:`context_branch`   -- purpose, progress and the latest 10 commits
* :func:`context_commit`   -- one commit entry in full
* :func:`context_log`      -- the last 20 physical lines of ``log.md``
* :func:`context_metadata` -- one segment of ``metadata.yaml``

Windows over commits or log lines come with a :class:`Cursor`; pass it to
:func:`scroll` to move toward older (``up``) or newer (``down``) content.
Cursors carry a fingerprint of the file they were cut from and go stale when
that file changes.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
from dataclasses import dataclass
from typing import Any, Literal

from . import store
from .errors import (
    AmbiguousCommit,
    CorruptRepo,
    ParseError,
    StaleCursor,
    UnknownCommit,
    UnknownSegment,
)
from .model import (
    CommitEntry,
    Milestone,
    OtaRecord,
    Roadmap,
    MetadataDoc,
    parse_commit_file,
    parse_log,
    parse_metadata,
    parse_roadmap,
)
from .summarizer import DEFAULT, SummarizerSpec, fold

COMMIT_WINDOW = 10
LOG_WINDOW = 20
MERGED_SEGMENT = "merged"

View = Literal["commits", "log"]
PAGE_SIZE = {"commits": COMMIT_WINDOW, "log": LOG_WINDOW}


# -- document readers ------------------------------------------------------------


def read_roadmap(repo: store.RepoPaths) -> Roadmap:
    try:
        return parse_roadmap(store.read_text(repo.main_file))
    except (ParseError, UnicodeDecodeError) as exc:
        raise CorruptRepo(f"main.md: {exc}") from exc


def read_entries(bp: store.BranchPaths) -> list[CommitEntry]:
    return parse_commit_file(store.read_text(bp.commit_file))


def read_log(bp: store.BranchPaths) -> list[OtaRecord]:
    return parse_log(store.read_text(bp.log_file))


def read_metadata(bp: store.BranchPaths) -> MetadataDoc:
    return parse_metadata(store.read_text(bp.metadata_file))


def entry_progress(entry: CommitEntry | None, spec: SummarizerSpec = DEFAULT) -> str:
    """Progress as of ``entry``: its summary folded with its own contribution."""
    if entry is None:
        return ""
    return fold(entry.previous_progress, entry.contribution, spec)


def branch_purpose(repo: store.RepoPaths, entries: list[CommitEntry]) -> str:
    # a branch without entries (only ever the initial one) serves the project goal
    if entries:
        return entries[-1].branch_purpose
    return read_roadmap(repo).goal


def is_merged(bp: store.BranchPaths) -> bool:
    return MERGED_SEGMENT in read_metadata(bp).segments


def format_snapshot(name: str, purpose: str, progress: str) -> str:
    return f"branch: {name}\npurpose:\n{purpose}\nprogress:\n{progress}"


def _fingerprint(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def _lines(data: bytes) -> list[str]:
    lines = data.decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


# -- cursor ----------------------------------------------------------------------


@dataclass(frozen=True)
class Cursor:
    """Window ``[start, start + size)`` over a branch's commits or log lines.

    Indices count in file order (oldest first).  ``size`` is the actual window
    length, which is short of the page size only at the oldest edge or when
    the content is smaller than a page.
    """

    view: View
    branch: str
    start: int
    size: int
    fingerprint: str

    def token(self) -> str:
        raw = f"{self.view}:{self.branch}:{self.start}:{self.size}:{self.fingerprint}"
        return base64.urlsafe_b64encode(raw.encode("utf-8")).decode("ascii").rstrip("=")

    @classmethod
    def from_token(cls, token: str) -> "Cursor":
        try:
            padded = token + "=" * (-len(token) % 4)
            raw = base64.urlsafe_b64decode(padded.encode("ascii")).decode("utf-8")
            view, branch, start, size, fp = raw.split(":")
            if view not in PAGE_SIZE:
                raise ValueError(view)
            cursor = cls(view, branch, int(start), int(size), fp)
        except (ValueError, UnicodeError, binascii.Error, TypeError, AttributeError):
            raise StaleCursor("malformed cursor token") from None
        if cursor.start < 0 or cursor.size < 0:
            raise StaleCursor("malformed cursor token")
        return cursor


@dataclass
class Page:
    items: list[Any]
    cursor: Cursor
    at_edge: bool = False


def _initial_window(total: int, page: int) -> tuple[int, int]:
    start = max(0, total - page)
    return start, total - start


def _source(repo: store.RepoPaths, view: View, branch: str) -> bytes:
    bp = store.require_branch(repo, branch)
    return store.read_bytes(bp.commit_file if view == "commits" else bp.log_file)


def _items(view: View, data: bytes) -> list[Any]:
    if view == "commits":
        return parse_commit_file(data.decode("utf-8"))
    return _lines(data)


def _window_items(view: View, items: list[Any], start: int, size: int) -> list[Any]:
    chunk = items[start:start + size]
    if view == "commits":
        # newest first
        return [e.summary() for e in reversed(chunk)]
    return chunk


# -- views -----------------------------------------------------------------------


@dataclass
class StatusSnapshot:
    goal: str
    milestones: list[Milestone]
    branches: list[tuple[str, bool]]
    head: str


@dataclass
class BranchView:
    branch: str
    purpose: str
    progress: str
    commits: list[dict[str, str]]
    total: int
    cursor: Cursor


def context_status(repo: store.RepoPaths) -> StatusSnapshot:
    roadmap = read_roadmap(repo)
    branches = []
    for name in store.list_branches(repo):
        try:
            merged = is_merged(repo.branch(name))
        except (ParseError, UnicodeDecodeError) as exc:
            raise CorruptRepo(f"{name}/metadata.yaml: {exc}") from exc
        branches.append((name, merged))
    return StatusSnapshot(roadmap.goal, roadmap.milestones, branches, store.get_head(repo))


def context_branch(repo: store.RepoPaths, branch: str, spec: SummarizerSpec = DEFAULT) -> BranchView:
    data = _source(repo, "commits", branch)
    entries = parse_commit_file(data.decode("utf-8"))
    start, size = _initial_window(len(entries), COMMIT_WINDOW)
    cursor = Cursor("commits", branch, start, size, _fingerprint(data))
    return BranchView(
        branch=branch,
        purpose=branch_purpose(repo, entries),
        progress=entry_progress(entries[-1] if entries else None, spec),
        commits=_window_items("commits", entries, start, size),
        total=len(entries),
        cursor=cursor,
    )


def context_commit(repo: store.RepoPaths, commit_id: str) -> CommitEntry:
    found: list[tuple[str, CommitEntry]] = []
    for name in store.list_branches(repo):
        for entry in read_entries(repo.branch(name)):
            if entry.id == commit_id:
                found.append((name, entry))
    if not found:
        raise UnknownCommit(str(commit_id))
    if len(found) > 1:
        raise AmbiguousCommit(f"{commit_id} on {', '.join(sorted({n for n, _ in found}))}")
    return found[0][1]


def commit_branch(repo: store.RepoPaths, commit_id: str) -> str:
    """Name of the branch holding ``commit_id``."""
    for name in store.list_branches(repo):
        if any(e.id == commit_id for e in read_entries(repo.branch(name))):
            return name
    raise UnknownCommit(str(commit_id))


def context_log(repo: store.RepoPaths, branch: str | None = None) -> Page:
    branch = branch or store.get_head(repo)
    data = _source(repo, "log", branch)
    lines = _lines(data)
    start, size = _initial_window(len(lines), LOG_WINDOW)
    cursor = Cursor("log", branch, start, size, _fingerprint(data))
    # nothing older to scroll to
    return Page(lines[start:], cursor, at_edge=start == 0)


def context_metadata(repo: store.RepoPaths, segment: str, branch: str | None = None) -> Any:
    bp = store.require_branch(repo, branch or store.get_head(repo))
    segments = read_metadata(bp).segments
    if segment not in segments:
        raise UnknownSegment(str(segment))
    return segments[segment]


def scroll(repo: store.RepoPaths, cursor: Cursor | str, direction: Literal["up", "down"]) -> Page:
    """Shift the window one page toward older (up) or newer (down) content.

    ``at_edge`` is set when no further movement in ``direction`` is possible;
    at the edge the same window comes back unchanged.
    """
    if isinstance(cursor, str):
        cursor = Cursor.from_token(cursor)
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', not {direction!r}")
    data = _source(repo, cursor.view, cursor.branch)
    if _fingerprint(data) != cursor.fingerprint:
        raise StaleCursor(f"{cursor.view} of {cursor.branch} changed since cursor was issued")
    items = _items(cursor.view, data)
    total = len(items)
    if cursor.start + cursor.size > total:
        raise StaleCursor("cursor window out of range")
    page = PAGE_SIZE[cursor.view]
    start, end = cursor.start, cursor.start + cursor.size
    if direction == "up" and start > 0:
        start, end = max(0, start - page), start
    elif direction == "down" and end < total:
        start, end = end, min(total, end + page)
    at_edge = start == 0 if direction == "up" else end == total
    new = Cursor(cursor.view, cursor.branch, start, end - start, cursor.fingerprint)
    return Page(_window_items(cursor.view, items, start, end - start), new, at_edge)

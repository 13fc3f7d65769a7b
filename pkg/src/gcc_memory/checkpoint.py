"""Durable checkpoints mirroring memory commits and merges.

Every checkpoint appends one tab-separated line to ``.GCC/checkpoints.log``::

    <timestamp>\t<commit id>\t<vcs revision or ->\t<message>

When a version-control adapter is supplied and the workspace is a repository,
the workspace is also committed and the revision id is recorded.
"""

from __future__ import annotations

import logging
import subprocess
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Protocol

from . import store
from .errors import ParseError, UnknownCommit, VcsError
from .model import COMMIT_PREFIX, Clock, format_ts, parse_ts, utc_now

logger = logging.getLogger(__name__)

NO_REF = "-"


@dataclass
class CheckpointRecord:
    commit_id: str
    message: str
    timestamp: datetime
    vcs_ref: str | None = None

    def to_line(self) -> str:
        message = self.message.replace("\n", " ")
        return f"{format_ts(self.timestamp)}\t{self.commit_id}\t{self.vcs_ref or NO_REF}\t{message}\n"


class VcsAdapter(Protocol):
    def is_repository(self, root: Path) -> bool: ...

    def commit_all(self, root: Path, message: str) -> str:
        """Stage every change under ``root``, commit, return the revision id."""
        ...


class GitAdapter:
    """Shells out to ``git``; commits even when nothing but memory changed."""

    def __init__(self, executable: str = "git") -> None:
        self.executable = executable

    def _git(self, root: Path, *args: str) -> str:
        try:
            proc = subprocess.run(
                [self.executable, *args], cwd=root, capture_output=True, text=True, check=True
            )
        except (OSError, subprocess.CalledProcessError) as exc:
            detail = getattr(exc, "stderr", "") or str(exc)
            raise VcsError(detail.strip()) from exc
        return proc.stdout.strip()

    def is_repository(self, root: Path) -> bool:
        try:
            return self._git(root, "rev-parse", "--is-inside-work-tree") == "true"
        except VcsError:
            return False

    def commit_all(self, root: Path, message: str) -> str:
        self._git(root, "add", "-A")
        self._git(root, "commit", "--allow-empty", "-q", "-m", message)
        return self._git(root, "rev-parse", "HEAD")


@dataclass
class InMemoryVcs:
    """Fake adapter that records commits in a list."""

    history: list[str] = field(default_factory=list)
    repository: bool = True
    fail: bool = False

    def is_repository(self, root: Path) -> bool:
        return self.repository

    def commit_all(self, root: Path, message: str) -> str:
        if self.fail:
            raise VcsError("simulated failure")
        self.history.append(message)
        return f"r{len(self.history):04d}"


def _commit_exists(repo: store.RepoPaths, commit_id: str) -> bool:
    needle = f"{COMMIT_PREFIX}{commit_id} | "
    for name in store.list_branches(repo):
        text = store.read_text(repo.branch(name).commit_file)
        if any(line.startswith(needle) for line in text.split("\n")):
            return True
    return False


def record_checkpoint(
    repo: store.RepoPaths,
    commit_id: str,
    message: str,
    *,
    clock: Clock | None = None,
    vcs: VcsAdapter | None = None,
) -> CheckpointRecord:
    """Append a checkpoint; callers hold the repository lock."""
    if not _commit_exists(repo, commit_id):
        raise UnknownCommit(commit_id)
    record = CheckpointRecord(commit_id, message, (clock or utc_now)())
    if vcs is not None:
        try:
            if vcs.is_repository(repo.root):
                record.vcs_ref = vcs.commit_all(repo.root, message)
        except VcsError as exc:
            logger.warning("workspace checkpoint failed, ledger only: %s", exc)
    store.append_text(repo.checkpoints_file, record.to_line())
    return record


def parse_checkpoints(text: str) -> list[CheckpointRecord]:
    out = []
    for no, line in enumerate(text.split("\n"), start=1):
        if line == "":
            continue
        parts = line.split("\t", 3)
        if len(parts) != 4:
            raise ParseError("expected 4 tab-separated fields", line=no)
        stamp, commit_id, ref, message = parts
        try:
            ts = parse_ts(stamp)
        except ValueError as exc:
            raise ParseError(str(exc), line=no) from None
        out.append(CheckpointRecord(commit_id, message, ts, None if ref == NO_REF else ref))
    return out


def list_checkpoints(repo: store.RepoPaths) -> list[CheckpointRecord]:
    return parse_checkpoints(store.read_text(repo.checkpoints_file))

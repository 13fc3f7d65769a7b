"""Mutating commands: OTA logging, COMMIT, BRANCH, MERGE, roadmap and metadata.

Each public function takes the repository lock for its whole duration.  The
``clock`` argument supplies every timestamp written by the call, which makes
runs with a fixed clock byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Any, Mapping

from . import store
from .checkpoint import VcsAdapter, record_checkpoint
from .errors import AlreadyMerged, BranchExists, EmptyMessage, SelfMerge
from .model import (
    Clock,
    CommitEntry,
    MetadataDoc,
    OtaRecord,
    Roadmap,
    compute_commit_id,
    end_origin_tag,
    format_ts,
    origin_tag,
    render_commit_entry,
    render_metadata,
    render_ota,
    render_roadmap,
    utc_now,
)
from .retrieve import (
    MERGED_SEGMENT,
    branch_purpose,
    entry_progress,
    format_snapshot,
    read_entries,
    read_log,
    read_metadata,
)
from .summarizer import DEFAULT, SummarizerSpec, fold, merge_summaries

BOOTSTRAP_MESSAGE = "branch created"
PRE_MERGE_THOUGHT = "pre-merge context retrieval"


@dataclass
class CommitRequest:
    message: str
    contribution: str = ""
    revise_roadmap: Roadmap | None = None
    metadata_updates: Mapping[str, Any] | None = None


@dataclass
class MergeRequest:
    target: str
    synthesis: str = ""
    updated_purpose: str | None = None
    roadmap_update: Roadmap | None = None


def _check_message(message: str) -> None:
    if not isinstance(message, str) or not message.strip() or "\n" in message or "\r" in message:
        raise EmptyMessage("commit message must be a nonempty single line")


def _check_tree(tree: Any) -> None:
    # raises ValueError for anything the metadata format cannot hold
    render_metadata(MetadataDoc({"_": tree}))


def _locked(repo: store.RepoPaths, action, now: datetime):
    # one clock reading per operation stamps the lock and everything written
    return store.with_lock(repo, action, clock=lambda: now)


def _current(repo: store.RepoPaths) -> store.BranchPaths:
    return store.require_branch(repo, store.get_head(repo))


def _append_ota(repo, bp, observation, thought, action, now) -> OtaRecord:
    records = read_log(bp)
    seq = max((r.seq for r in records if r.origin is None), default=0) + 1
    record = OtaRecord(seq, now, observation, thought, action)
    store.append_text(bp.log_file, render_ota(record))
    return record


def _write_metadata_segments(bp: store.BranchPaths, updates: Mapping[str, Any]) -> None:
    doc = read_metadata(bp)
    for name, tree in updates.items():
        doc.segments[name] = tree
    store.atomic_write(bp.metadata_file, render_metadata(doc))


def _append_entry(repo, bp, message, purpose, progress, contribution, now) -> CommitEntry:
    entries = read_entries(bp)
    parent = entries[-1].id if entries else ""
    entry = CommitEntry(
        id=compute_commit_id(parent, now, message, contribution),
        timestamp=now,
        message=message,
        branch_purpose=purpose,
        previous_progress=progress,
        contribution=contribution,
    )
    store.append_text(bp.commit_file, render_commit_entry(entry))
    return entry


def append_ota(
    repo: store.RepoPaths,
    observation: str = "",
    thought: str = "",
    action: str = "",
    *,
    clock: Clock | None = None,
) -> OtaRecord:
    """Append one Observation-Thought-Action record to the current branch's log."""
    now = (clock or utc_now)()

    def run() -> OtaRecord:
        return _append_ota(repo, _current(repo), observation, thought, action, now)

    return _locked(repo, run, now)


def commit(
    repo: store.RepoPaths,
    req: CommitRequest,
    *,
    clock: Clock | None = None,
    summarizer: SummarizerSpec = DEFAULT,
    vcs: VcsAdapter | None = None,
) -> CommitEntry:
    """Record a milestone on the current branch.

    The new entry inherits the branch purpose from the latest entry (the
    project goal when there is none) and folds the latest entry's summary and
    contribution into its own progress summary.
    """
    _check_message(req.message)
    updates = dict(req.metadata_updates or {})
    for tree in updates.values():
        _check_tree(tree)
    now = (clock or utc_now)()

    def run() -> CommitEntry:
        bp = _current(repo)
        entries = read_entries(bp)
        prior = entries[-1] if entries else None
        progress = fold(prior.previous_progress, prior.contribution, summarizer) if prior else ""
        entry = _append_entry(
            repo, bp, req.message, branch_purpose(repo, entries), progress, req.contribution, now
        )
        if req.revise_roadmap is not None:
            store.atomic_write(repo.main_file, render_roadmap(req.revise_roadmap))
        if updates:
            _write_metadata_segments(bp, updates)
        record_checkpoint(repo, entry.id, req.message, clock=lambda: now, vcs=vcs)
        return entry

    return _locked(repo, run, now)


def branch(
    repo: store.RepoPaths,
    name: str,
    purpose: str = "",
    *,
    clock: Clock | None = None,
) -> store.BranchPaths:
    """Create branch ``name`` off the current one and switch HEAD to it."""
    store.validate_branch_name(name)
    now = (clock or utc_now)()

    def run() -> store.BranchPaths:
        if repo.branch(name).dir.exists():
            raise BranchExists(name)
        source = _current(repo)
        source_entries = read_entries(source)
        metadata = read_metadata(source)
        metadata.segments.pop(MERGED_SEGMENT, None)
        # the bootstrap entry forks from the source branch's latest commit
        parent = source_entries[-1].id if source_entries else ""
        bootstrap = CommitEntry(
            id=compute_commit_id(parent, now, BOOTSTRAP_MESSAGE, ""),
            timestamp=now,
            message=BOOTSTRAP_MESSAGE,
            branch_purpose=purpose,
        )
        bp = store.create_branch_dir(repo, name, render_commit_entry(bootstrap), metadata)
        store.set_head(repo, name)
        return bp

    return _locked(repo, run, now)


def checkout(repo: store.RepoPaths, name: str, *, clock: Clock | None = None) -> None:
    """Point HEAD at an existing branch."""
    _locked(repo, lambda: store.set_head(repo, name), (clock or utc_now)())


def merge(
    repo: store.RepoPaths,
    req: MergeRequest,
    *,
    clock: Clock | None = None,
    summarizer: SummarizerSpec = DEFAULT,
    vcs: VcsAdapter | None = None,
) -> CommitEntry:
    """Fold branch ``req.target`` into the current branch.

    Records the target's status snapshot as an OTA step, appends a merge
    entry, appends the target's log under ``== Branch <target> ==``, and
    flags the target as merged in its own metadata.
    """
    now = (clock or utc_now)()

    def run() -> CommitEntry:
        target = store.require_branch(repo, req.target)
        bp = _current(repo)
        if target.name == bp.name:
            raise SelfMerge(target.name)
        target_meta = read_metadata(target)
        if MERGED_SEGMENT in target_meta.segments:
            raise AlreadyMerged(target.name)

        target_entries = read_entries(target)
        target_purpose = branch_purpose(repo, target_entries)
        target_progress = entry_progress(target_entries[-1] if target_entries else None, summarizer)
        target_log = store.read_text(target.log_file)
        read_log(target)  # refuse to splice a malformed log

        snapshot = format_snapshot(target.name, target_purpose, target_progress)
        _append_ota(repo, bp, snapshot, PRE_MERGE_THOUGHT, f"MERGE {target.name}", now)

        entries = read_entries(bp)
        current_progress = entry_progress(entries[-1] if entries else None, summarizer)
        purpose = req.updated_purpose if req.updated_purpose is not None else branch_purpose(repo, entries)
        message = f"merge {target.name}"
        entry = _append_entry(
            repo,
            bp,
            message,
            purpose,
            merge_summaries(current_progress, target_progress, summarizer),
            req.synthesis,
            now,
        )
        store.append_text(bp.log_file, origin_tag(target.name) + target_log + end_origin_tag(target.name))
        if req.roadmap_update is not None:
            store.atomic_write(repo.main_file, render_roadmap(req.roadmap_update))
        target_meta.segments[MERGED_SEGMENT] = {"into": bp.name, "at": format_ts(now)}
        store.atomic_write(target.metadata_file, render_metadata(target_meta))
        record_checkpoint(repo, entry.id, message, clock=lambda: now, vcs=vcs)
        return entry

    return _locked(repo, run, now)


def update_roadmap(repo: store.RepoPaths, roadmap: Roadmap, *, clock: Clock | None = None) -> None:
    text = render_roadmap(roadmap)
    _locked(repo, lambda: store.atomic_write(repo.main_file, text), (clock or utc_now)())


def set_metadata_segment(
    repo: store.RepoPaths,
    segment: str,
    tree: Any,
    *,
    clock: Clock | None = None,
) -> None:
    """Create or replace one segment of the current branch's metadata."""
    if not isinstance(segment, str) or not segment:
        raise ValueError("segment name must be a nonempty string")
    _check_tree(tree)
    _locked(repo, lambda: _write_metadata_segments(_current(repo), {segment: tree}), (clock or utc_now)())

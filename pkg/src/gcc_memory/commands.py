"""Named operations with JSON arguments and JSON results.

This is the single command surface behind the CLI (``--json`` output), the
tool server and the replay harness, so all three agree on argument names,
result shapes and error codes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import ops, retrieve, store
from .checkpoint import CheckpointRecord, VcsAdapter, list_checkpoints
from .errors import BadRequest, CorruptRepo, GccError, IoError, UnknownOp
from .model import (
    Clock,
    CommitEntry,
    Milestone,
    Roadmap,
    format_ts,
    utc_now,
)
from .summarizer import DEFAULT, SummarizerSpec

MUTATING = frozenset(
    {"init", "ota", "commit", "branch", "checkout", "merge", "set_metadata", "update_roadmap"}
)
READ_ONLY = frozenset({"context", "scroll", "checkpoints"})
OPS = MUTATING | READ_ONLY


# -- argument checking -----------------------------------------------------------


def _text(value: Any, key: str) -> str:
    if not isinstance(value, str):
        raise BadRequest(f"{key} must be a string")
    try:
        value.encode("utf-8")
    except UnicodeEncodeError:
        raise BadRequest(f"{key} is not valid unicode") from None
    return value


class _Args:
    def __init__(self, args: Any, allowed: set[str]) -> None:
        if not isinstance(args, dict):
            raise BadRequest("args must be an object")
        extra = set(args) - allowed
        if extra:
            raise BadRequest(f"unexpected argument(s): {', '.join(sorted(map(str, extra)))}")
        self.args = args

    def text(self, key: str, default: str | None = None, required: bool = False) -> str | None:
        if key not in self.args or self.args[key] is None:
            if required:
                raise BadRequest(f"missing argument {key!r}")
            return default
        return _text(self.args[key], key)

    def flag(self, key: str) -> bool:
        value = self.args.get(key, False)
        if not isinstance(value, bool):
            raise BadRequest(f"{key} must be a boolean")
        return value

    def raw(self, key: str) -> Any:
        return self.args.get(key)


def _tree(value: Any, key: str) -> Any:
    """Validate a JSON value as a metadata tree."""
    if isinstance(value, str):
        return _text(value, key)
    if isinstance(value, dict):
        return {_text(k, key): _tree(v, key) for k, v in value.items()}
    if isinstance(value, list):
        return [_tree(v, key) for v in value]
    if value is None or isinstance(value, (bool, int, float)):
        return value
    raise BadRequest(f"{key}: unsupported value")


def roadmap_from_json(value: Any) -> Roadmap:
    if not isinstance(value, dict):
        raise BadRequest("roadmap must be an object")
    a = _Args(value, {"goal", "milestones", "notes"})
    milestones = []
    raw = a.raw("milestones") or []
    if not isinstance(raw, list):
        raise BadRequest("milestones must be a list")
    for item in raw:
        if isinstance(item, str):
            milestones.append(Milestone(_text(item, "milestone")))
        elif isinstance(item, dict):
            m = _Args(item, {"text", "done"})
            milestones.append(Milestone(m.text("text", required=True), m.flag("done")))
        else:
            raise BadRequest("milestone must be a string or {text, done}")
        if "\n" in milestones[-1].text:
            raise BadRequest("milestone text must be a single line")
    return Roadmap(a.text("goal", required=True), milestones, a.text("notes", ""))


# -- result shapes ---------------------------------------------------------------


def roadmap_json(roadmap: Roadmap) -> dict[str, Any]:
    return {
        "goal": roadmap.goal,
        "milestones": [{"text": m.text, "done": m.done} for m in roadmap.milestones],
        "notes": roadmap.notes,
    }


def entry_json(entry: CommitEntry) -> dict[str, str]:
    return {
        "id": entry.id,
        "timestamp": format_ts(entry.timestamp),
        "message": entry.message,
        "branch_purpose": entry.branch_purpose,
        "previous_progress": entry.previous_progress,
        "contribution": entry.contribution,
    }


def checkpoint_json(record: CheckpointRecord) -> dict[str, Any]:
    return {
        "timestamp": format_ts(record.timestamp),
        "commit_id": record.commit_id,
        "vcs_ref": record.vcs_ref,
        "message": record.message,
    }


def page_json(page: retrieve.Page) -> dict[str, Any]:
    return {
        "view": page.cursor.view,
        "branch": page.cursor.branch,
        "items": page.items,
        "start": page.cursor.start,
        "size": page.cursor.size,
        "cursor": page.cursor.token(),
        "at_edge": page.at_edge,
    }


# -- session ---------------------------------------------------------------------


@dataclass
class Session:
    """Executes named operations against the repository rooted at ``root``.

    Holds no repository state of its own: every call re-opens the ``.GCC/``
    tree, so a fresh session resumes exactly where another left off.
    """

    root: Path
    clock: Clock = field(default=utc_now)
    summarizer: SummarizerSpec = DEFAULT
    vcs: VcsAdapter | None = None

    def repo(self) -> store.RepoPaths:
        return store.open_repo(self.root)

    def execute(self, op: str, args: Any = None) -> Any:
        """Run ``op``; raises :class:`GccError` subclasses on failure."""
        handler = _HANDLERS.get(op) if isinstance(op, str) else None
        if handler is None:
            raise UnknownOp(str(op))
        try:
            return handler(self, {} if args is None else args)
        except GccError:
            raise
        except UnicodeDecodeError as exc:
            raise CorruptRepo(f"file is not UTF-8: {exc}") from exc
        except (ValueError, TypeError) as exc:
            raise BadRequest(str(exc)) from exc
        except OSError as exc:
            raise IoError(str(exc)) from exc

    def respond(self, request_id: Any, op: str, args: Any = None) -> dict[str, Any]:
        try:
            data = self.execute(op, args)
        except GccError as exc:
            return error_response(request_id, exc)
        return {"id": request_id, "ok": True, "data": data}

    # handlers ---------------------------------------------------------------

    def _init(self, args):
        a = _Args(args, {"goal", "todo"})
        todo = a.raw("todo") or []
        if not isinstance(todo, list):
            raise BadRequest("todo must be a list of strings")
        todo = [_text(t, "todo") for t in todo]
        if any("\n" in t for t in todo):
            raise BadRequest("todo items must be single lines")
        repo = store.init_repo(self.root, a.text("goal", ""), todo)
        return {"head": store.get_head(repo), "branches": store.list_branches(repo)}

    def _ota(self, args):
        a = _Args(args, {"observation", "thought", "action"})
        repo = self.repo()
        rec = ops.append_ota(
            repo, a.text("observation", ""), a.text("thought", ""), a.text("action", ""), clock=self.clock
        )
        return {"branch": store.get_head(repo), "seq": rec.seq, "timestamp": format_ts(rec.timestamp)}

    def _commit(self, args):
        a = _Args(args, {"message", "contribution", "roadmap", "metadata"})
        roadmap = roadmap_from_json(a.raw("roadmap")) if a.raw("roadmap") is not None else None
        metadata = a.raw("metadata")
        if metadata is not None:
            if not isinstance(metadata, dict):
                raise BadRequest("metadata must be an object of segments")
            metadata = {_text(k, "segment"): _tree(v, "metadata") for k, v in metadata.items()}
        req = ops.CommitRequest(
            message=a.text("message", ""),
            contribution=a.text("contribution", ""),
            revise_roadmap=roadmap,
            metadata_updates=metadata,
        )
        repo = self.repo()
        entry = ops.commit(repo, req, clock=self.clock, summarizer=self.summarizer, vcs=self.vcs)
        return {"branch": store.get_head(repo), **entry_json(entry)}

    def _branch(self, args):
        a = _Args(args, {"name", "purpose"})
        bp = ops.branch(self.repo(), a.text("name", required=True), a.text("purpose", ""), clock=self.clock)
        return {"branch": bp.name, "head": bp.name}

    def _checkout(self, args):
        a = _Args(args, {"name"})
        name = a.text("name", required=True)
        ops.checkout(self.repo(), name, clock=self.clock)
        return {"head": name}

    def _merge(self, args):
        a = _Args(args, {"target", "synthesis", "purpose", "roadmap"})
        roadmap = roadmap_from_json(a.raw("roadmap")) if a.raw("roadmap") is not None else None
        req = ops.MergeRequest(
            target=a.text("target", required=True),
            synthesis=a.text("synthesis", ""),
            updated_purpose=a.text("purpose"),
            roadmap_update=roadmap,
        )
        repo = self.repo()
        entry = ops.merge(repo, req, clock=self.clock, summarizer=self.summarizer, vcs=self.vcs)
        return {"branch": store.get_head(repo), "merged": req.target, **entry_json(entry)}

    def _context(self, args):
        a = _Args(args, {"branch", "commit", "log", "metadata"})
        repo = self.repo()
        branch, commit_id, segment = a.text("branch"), a.text("commit"), a.text("metadata")
        log = a.flag("log")
        if sum([commit_id is not None, log, segment is not None]) > 1:
            raise BadRequest("choose one of commit, log, metadata")
        if commit_id is not None:
            if branch is not None:
                raise BadRequest("commit lookup takes no branch")
            entry = retrieve.context_commit(repo, commit_id)
            return {"kind": "commit", "branch": retrieve.commit_branch(repo, commit_id), "entry": entry_json(entry)}
        if log:
            page = retrieve.context_log(repo, branch)
            return {"kind": "log", **page_json(page)}
        if segment is not None:
            name = branch or store.get_head(repo)
            tree = retrieve.context_metadata(repo, segment, name)
            return {"kind": "metadata", "branch": name, "segment": segment, "tree": tree}
        if branch is not None:
            view = retrieve.context_branch(repo, branch, self.summarizer)
            return {
                "kind": "branch",
                "branch": view.branch,
                "purpose": view.purpose,
                "progress": view.progress,
                "total": view.total,
                "commits": view.commits,
                "start": view.cursor.start,
                "size": view.cursor.size,
                "cursor": view.cursor.token(),
            }
        snap = retrieve.context_status(repo)
        return {
            "kind": "status",
            "goal": snap.goal,
            "milestones": [{"text": m.text, "done": m.done} for m in snap.milestones],
            "branches": [{"name": n, "merged": merged} for n, merged in snap.branches],
            "head": snap.head,
        }

    def _scroll(self, args):
        a = _Args(args, {"cursor", "direction"})
        direction = a.text("direction", required=True)
        if direction not in ("up", "down"):
            raise BadRequest("direction must be 'up' or 'down'")
        page = retrieve.scroll(self.repo(), a.text("cursor", required=True), direction)
        return {"kind": "scroll", **page_json(page)}

    def _checkpoints(self, args):
        _Args(args, set())
        return {"checkpoints": [checkpoint_json(r) for r in list_checkpoints(self.repo())]}

    def _set_metadata(self, args):
        a = _Args(args, {"segment", "tree"})
        if "tree" not in args:
            raise BadRequest("missing argument 'tree'")
        segment = a.text("segment", required=True)
        repo = self.repo()
        ops.set_metadata_segment(repo, segment, _tree(args["tree"], "tree"), clock=self.clock)
        return {"branch": store.get_head(repo), "segment": segment}

    def _update_roadmap(self, args):
        a = _Args(args, {"roadmap"})
        roadmap = roadmap_from_json(a.raw("roadmap"))
        ops.update_roadmap(self.repo(), roadmap, clock=self.clock)
        return roadmap_json(roadmap)


_HANDLERS: dict[str, Callable[[Session, Any], Any]] = {
    "init": Session._init,
    "ota": Session._ota,
    "commit": Session._commit,
    "branch": Session._branch,
    "checkout": Session._checkout,
    "merge": Session._merge,
    "context": Session._context,
    "scroll": Session._scroll,
    "checkpoints": Session._checkpoints,
    "set_metadata": Session._set_metadata,
    "update_roadmap": Session._update_roadmap,
}
assert set(_HANDLERS) == OPS


def error_response(request_id: Any, exc: GccError) -> dict[str, Any]:
    return {"id": request_id, "ok": False, "error": {"code": exc.code, "message": exc.message}}

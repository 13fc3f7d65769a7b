"""Command-line frontend.

    gcc-memory init --goal "Build a CLI" --todo scaffold --todo tests
    gcc-memory ota -o "tests fail" -t "missing import" -a "add import"
    gcc-memory commit -m "add io helper" --contribution-file notes.md
    gcc-memory branch RAG-memory --purpose "Prototype a retriever"
    gcc-memory checkout main
    gcc-memory merge RAG-memory --synthesis "Abandoned; kept summaries"
    gcc-memory context [--branch B | --commit ID | --log | --metadata SEG]
    gcc-memory scroll up --cursor TOKEN
    gcc-memory checkpoints

Every subcommand accepts ``--json``.  Exit status is 0 on success, 1 on a
domain error (``error: <code>: <message>`` on stderr) and 2 on bad usage.

Environment: ``GCC_ROOT`` names the repository root (otherwise the nearest
``.GCC/`` above the working directory); ``GCC_VCS=git`` mirrors checkpoints
as git commits; ``GCC_SUMMARIZER_CMD`` plugs in an external summarizer.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import store
from .checkpoint import GitAdapter, VcsAdapter
from .commands import Session, roadmap_json
from .errors import BadRequest, GccError
from .model import (
    Clock,
    CommitEntry,
    MetadataDoc,
    parse_roadmap,
    parse_ts,
    render_commit_entry,
    render_metadata,
    utc_now,
)
from .summarizer import DEFAULT, SummarizerSpec

PROG = "gcc-memory"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="emit one JSON object")

    parser = _Parser(prog=PROG, description="Version-controlled agent memory under .GCC/", parents=[common])
    sub = parser.add_subparsers(dest="command", metavar="<command>", parser_class=_Parser)

    p = sub.add_parser("init", parents=[common], help="create .GCC/ with a roadmap")
    p.add_argument("--goal", default="", help="project goal")
    p.add_argument("--todo", action="append", default=[], help="initial to-do item (repeatable)")

    p = sub.add_parser("ota", parents=[common], help="append an observation-thought-action record")
    p.add_argument("-o", "--observation", default="")
    p.add_argument("-t", "--thought", default="")
    p.add_argument("-a", "--action", default="")

    p = sub.add_parser("commit", parents=[common], help="record a milestone on the current branch")
    p.add_argument("-m", "--message", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--contribution", help="what this commit achieved")
    src.add_argument("--contribution-file", help="read contribution from file ('-' for stdin)")
    p.add_argument("--roadmap-file", help="replacement main.md")
    p.add_argument(
        "--metadata", action="append", default=[], metavar="SEGMENT=JSON", help="set a metadata segment"
    )

    p = sub.add_parser("branch", parents=[common], help="create a branch and switch to it")
    p.add_argument("name")
    p.add_argument("--purpose", default="")

    p = sub.add_parser("checkout", parents=[common], help="switch the current branch")
    p.add_argument("name")

    p = sub.add_parser("merge", parents=[common], help="merge a branch into the current one")
    p.add_argument("target")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--synthesis", help="explanation of the merge outcome")
    src.add_argument("--synthesis-file", help="read synthesis from file ('-' for stdin)")
    p.add_argument("--purpose", help="replacement branch purpose")
    p.add_argument("--roadmap-file", help="replacement main.md")

    p = sub.add_parser("context", parents=[common], help="retrieve memory")
    p.add_argument("--branch", help="branch view (or branch for --log/--metadata)")
    p.add_argument("--commit", metavar="HASH", help="one commit entry in full")
    p.add_argument("--log", action="store_true", help="last 20 lines of log.md")
    p.add_argument("--metadata", metavar="SEGMENT", help="one metadata.yaml segment")

    p = sub.add_parser("scroll", parents=[common], help="move a context window")
    p.add_argument("direction", choices=["up", "down"])
    p.add_argument("--cursor", required=True)

    sub.add_parser("checkpoints", parents=[common], help="list checkpoints")
    return parser


# -- input helpers -----------------------------------------------------------------


def _read_source(path: str | None, inline: str | None, stdin: io.TextIOBase | None, cwd: Path) -> str:
    # text from a file or stdin loses its trailing newlines, as with git messages
    if inline is not None:
        return inline
    if path == "-" or (path is None and stdin is not None):
        return stdin.read().rstrip("\n") if stdin is not None else ""
    if path is None:
        return ""
    try:
        return (cwd / path).read_text(encoding="utf-8").rstrip("\n")
    except OSError as exc:
        raise BadRequest(f"{path}: {exc.strerror or exc}") from None


def _roadmap_arg(path: str | None, cwd: Path) -> dict[str, Any] | None:
    if path is None:
        return None
    text = _read_source(path, None, None, cwd)
    return roadmap_json(parse_roadmap(text))


def _metadata_arg(pairs: list[str]) -> dict[str, Any] | None:
    if not pairs:
        return None
    out = {}
    for pair in pairs:
        name, sep, raw = pair.partition("=")
        if not sep or not name:
            raise BadRequest(f"expected SEGMENT=JSON, got {pair!r}")
        try:
            out[name] = json.loads(raw)
        except ValueError:
            raise BadRequest(f"segment {name!r}: value is not JSON") from None
    return out


def _request(ns: argparse.Namespace, stdin, cwd: Path) -> tuple[str, dict[str, Any]]:
    cmd = ns.command
    if cmd == "init":
        return cmd, {"goal": ns.goal, "todo": ns.todo}
    if cmd == "ota":
        return cmd, {"observation": ns.observation, "thought": ns.thought, "action": ns.action}
    if cmd == "commit":
        args = {
            "message": ns.message,
            "contribution": _read_source(ns.contribution_file, ns.contribution, stdin, cwd),
        }
        roadmap = _roadmap_arg(ns.roadmap_file, cwd)
        if roadmap is not None:
            args["roadmap"] = roadmap
        metadata = _metadata_arg(ns.metadata)
        if metadata is not None:
            args["metadata"] = metadata
        return cmd, args
    if cmd == "branch":
        return cmd, {"name": ns.name, "purpose": ns.purpose}
    if cmd == "checkout":
        return cmd, {"name": ns.name}
    if cmd == "merge":
        args = {
            "target": ns.target,
            "synthesis": _read_source(ns.synthesis_file, ns.synthesis, stdin, cwd),
        }
        if ns.purpose is not None:
            args["purpose"] = ns.purpose
        roadmap = _roadmap_arg(ns.roadmap_file, cwd)
        if roadmap is not None:
            args["roadmap"] = roadmap
        return cmd, args
    if cmd == "context":
        args = {"log": ns.log}
        for key in ("branch", "commit", "metadata"):
            if getattr(ns, key) is not None:
                args[key] = getattr(ns, key)
        return cmd, args
    if cmd == "scroll":
        return cmd, {"direction": ns.direction, "cursor": ns.cursor}
    return cmd, {}


# -- plain-text rendering ------------------------------------------------------------


def _commit_line(item: Mapping[str, str]) -> str:
    return f"{item['id']} {item['timestamp']} {item['message']}"


def _page_lines(data: Mapping[str, Any]) -> list[str]:
    if data["view"] == "commits":
        lines = [_commit_line(c) for c in data["items"]]
    else:
        lines = list(data["items"])
    if data.get("kind") == "scroll" and data["at_edge"]:
        lines.append("(no more entries)")
    lines.append(f"cursor: {data['cursor']}")
    return lines


def format_plain(command: str, data: Mapping[str, Any]) -> str:
    if command == "init":
        lines = [f"Initialized empty GCC repository on branch {data['head']}"]
    elif command == "ota":
        lines = [f"[{data['branch']}] OTA {data['seq']} {data['timestamp']}"]
    elif command in ("commit", "merge"):
        lines = [f"[{data['branch']} {data['id']}] {data['message']}"]
    elif command == "branch":
        lines = [f"Switched to a new branch '{data['branch']}'"]
    elif command == "checkout":
        lines = [f"Switched to branch '{data['head']}'"]
    elif command == "checkpoints":
        lines = [
            f"{c['timestamp']}\t{c['commit_id']}\t{c['vcs_ref'] or '-'}\t{c['message']}"
            for c in data["checkpoints"]
        ]
    elif command == "scroll" or data.get("kind") == "log":
        lines = _page_lines(data)
    elif data["kind"] == "status":
        lines = [f"On branch {data['head']}", "", "Goal:", data["goal"], "", "Milestones:"]
        lines += [f"  [{'x' if m['done'] else ' '}] {m['text']}" for m in data["milestones"]]
        lines += ["", "Branches:"]
        for b in data["branches"]:
            mark = "*" if b["name"] == data["head"] else " "
            lines.append(f"{mark} {b['name']}{' (merged)' if b['merged'] else ''}")
    elif data["kind"] == "branch":
        first, last = data["start"] + 1, data["start"] + data["size"]
        lines = [f"Branch: {data['branch']}", "Purpose:", data["purpose"], "Progress:", data["progress"]]
        lines.append(f"Commits ({first}-{last} of {data['total']}, newest first):" if data["size"] else "Commits: none")
        lines += [_commit_line(c) for c in data["commits"]]
        lines.append(f"cursor: {data['cursor']}")
    elif data["kind"] == "commit":
        e = data["entry"]
        entry = CommitEntry(
            e["id"], parse_ts(e["timestamp"]), e["message"],
            e["branch_purpose"], e["previous_progress"], e["contribution"],
        )
        return f"Branch: {data['branch']}\n" + render_commit_entry(entry)
    elif data["kind"] == "metadata":
        return render_metadata(MetadataDoc({data["segment"]: data["tree"]}))
    else:  # pragma: no cover - every result kind is handled above
        lines = [json.dumps(data)]
    return "".join(line + "\n" for line in lines)


# -- entry points ----------------------------------------------------------------------


def _root(command: str, cwd: Path, env: Mapping[str, str]) -> Path:
    if env.get("GCC_ROOT"):
        return (cwd / env["GCC_ROOT"]).resolve()
    if command == "init":
        return cwd.resolve()
    return store.find_repo(cwd).root


def _vcs_from_env(env: Mapping[str, str]) -> VcsAdapter | None:
    return GitAdapter() if env.get("GCC_VCS", "").lower() == "git" else None


def _summarizer_from_env(env: Mapping[str, str]) -> SummarizerSpec:
    cmd = env.get("GCC_SUMMARIZER_CMD")
    return SummarizerSpec(kind="external", external_command=cmd) if cmd else DEFAULT


def run(
    argv: Sequence[str],
    working_dir: str | os.PathLike | None = None,
    *,
    stdin: io.TextIOBase | None = None,
    env: Mapping[str, str] | None = None,
    clock: Clock | None = None,
    vcs: VcsAdapter | None = None,
) -> tuple[int, str, str]:
    """Run one CLI invocation in-process; returns (exit code, stdout, stderr)."""
    cwd = Path(working_dir or os.getcwd())
    env = os.environ if env is None else env
    parser = build_parser()
    out, err = io.StringIO(), io.StringIO()
    try:
        with redirect_stdout(out), redirect_stderr(err):
            ns = parser.parse_args(list(argv))
    except UsageError as exc:
        return EXIT_USAGE, out.getvalue(), err.getvalue() + str(exc)
    except SystemExit as exc:  # --help
        return int(exc.code or 0), out.getvalue(), err.getvalue()
    if ns.command is None:
        return EXIT_USAGE, "", parser.format_usage()

    as_json = getattr(ns, "json", False)
    try:
        op, args = _request(ns, stdin, cwd)
        session = Session(
            _root(op, cwd, env),
            clock=clock or utc_now,
            summarizer=_summarizer_from_env(env),
            vcs=vcs if vcs is not None else _vcs_from_env(env),
        )
        data = session.execute(op, args)
    except GccError as exc:
        return EXIT_ERROR, "", f"error: {exc.code}: {exc.message}\n"
    if as_json:
        return EXIT_OK, json.dumps(data, ensure_ascii=False) + "\n", ""
    return EXIT_OK, format_plain(op, data), ""


def main(argv: Sequence[str] | None = None) -> int:
    stdin = None if sys.stdin is None or sys.stdin.isatty() else sys.stdin
    code, out, err = run(sys.argv[1:] if argv is None else argv, stdin=stdin)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    raise SystemExit(main())

"""Line-delimited JSON tool server over standard streams.

Each input line is one request ``{"id": int, "op": str, "args": {...}}`` and
produces exactly one response line, in order::

    {"id": 1, "ok": true, "data": {...}}
    {"id": 2, "ok": false, "error": {"code": "UnknownBranch", "message": "ghost"}}

Undecodable or malformed lines get ``"id": null`` and code ``BadRequest``.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path
from typing import IO, Any, Iterable

from .commands import OPS, Session, error_response
from .errors import BadRequest, GccError, UnknownOp
from .store import RepoPaths

logger = logging.getLogger(__name__)


def _reject_constant(name: str) -> Any:
    raise ValueError(f"{name} is not valid JSON")


def parse_request(line: bytes | str) -> tuple[Any, str, Any]:
    """Decode one request line into (id, op, args); raises BadRequest/UnknownOp."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError:
            raise BadRequest("request is not UTF-8") from None
    try:
        req = json.loads(line, parse_constant=_reject_constant)
    except (ValueError, RecursionError):
        raise BadRequest("request is not valid JSON") from None
    if not isinstance(req, dict):
        raise BadRequest("request must be a JSON object")
    rid = req.get("id")
    if not isinstance(rid, int) or isinstance(rid, bool):
        raise BadRequest("id must be an integer")
    op = req.get("op")
    if not isinstance(op, str):
        raise _WithId(rid, BadRequest("op must be a string"))
    if op not in OPS:
        raise _WithId(rid, UnknownOp(op))
    args = req.get("args", {})
    if not isinstance(args, dict):
        raise _WithId(rid, BadRequest("args must be an object"))
    extra = set(req) - {"id", "op", "args"}
    if extra:
        raise _WithId(rid, BadRequest(f"unexpected field(s): {', '.join(sorted(extra))}"))
    return rid, op, args


class _WithId(Exception):
    def __init__(self, rid: Any, error: GccError) -> None:
        super().__init__(error.message)
        self.rid = rid
        self.error = error


def handle_line(session: Session, line: bytes | str) -> dict[str, Any]:
    try:
        rid, op, args = parse_request(line)
    except _WithId as wrapped:
        return error_response(wrapped.rid, wrapped.error)
    except GccError as exc:
        return error_response(None, exc)
    try:
        return session.respond(rid, op, args)
    except Exception as exc:  # the loop must survive anything a request triggers
        logger.exception("unexpected failure handling %s", op)
        return error_response(rid, GccError(f"{type(exc).__name__}: {exc}"))


def encode_response(response: dict[str, Any]) -> bytes:
    return (json.dumps(response, ensure_ascii=True) + "\n").encode("ascii")


def serve_lines(session: Session, lines: Iterable[bytes]) -> Iterable[bytes]:
    for line in lines:
        if line.endswith(b"\n"):
            line = line[:-1]
        yield encode_response(handle_line(session, line))


def serve(
    repo: RepoPaths | Session | str | os.PathLike,
    instream: IO[bytes] | None = None,
    outstream: IO[bytes] | None = None,
) -> None:
    """Answer requests from ``instream`` until it closes."""
    if isinstance(repo, Session):
        session = repo
    elif isinstance(repo, RepoPaths):
        session = Session(repo.root)
    else:
        session = Session(Path(repo))
    instream = instream if instream is not None else sys.stdin.buffer
    outstream = outstream if outstream is not None else sys.stdout.buffer
    for out in serve_lines(session, iter(instream.readline, b"")):
        outstream.write(out)
        outstream.flush()


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(prog="gcc-memory-server", description=__doc__.splitlines()[0])
    parser.add_argument("--root", default=os.environ.get("GCC_ROOT", "."), help="repository root")
    args = parser.parse_args(argv)
    serve(Path(args.root))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

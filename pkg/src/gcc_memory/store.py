"""On-disk layout of a ``.GCC/`` repository.

::

    <root>/.GCC/
        main.md
        HEAD               current branch name
        LOCK               present only while a mutation is in flight
        checkpoints.log
        branches/<name>/{commit.md, log.md, metadata.yaml}

All writes go through :func:`atomic_write` (temp file + rename), and all
mutations go through :func:`with_lock`.
"""

from __future__ import annotations

import os
import re
import socket
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, TypeVar

from .errors import (
    AlreadyInitialized,
    CorruptRepo,
    InvalidName,
    IoError,
    LockHeld,
    NotARepo,
    UnknownBranch,
)
from .model import (
    Clock,
    MetadataDoc,
    Roadmap,
    format_ts,
    parse_ts,
    render_metadata,
    render_roadmap,
    utc_now,
)

GCC_DIR = ".GCC"
DEFAULT_BRANCH = "main"
LOCK_STALE_SECONDS = 300.0

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+\Z")

T = TypeVar("T")

# Test hook: called with the target path after the temp file is written and
# before it replaces the target.  Raising here simulates a crash.
before_replace: Callable[[Path], None] | None = None


@dataclass(frozen=True)
class BranchPaths:
    name: str
    dir: Path

    @property
    def commit_file(self) -> Path:
        return self.dir / "commit.md"

    @property
    def log_file(self) -> Path:
        return self.dir / "log.md"

    @property
    def metadata_file(self) -> Path:
        return self.dir / "metadata.yaml"


@dataclass(frozen=True)
class RepoPaths:
    root: Path

    @property
    def gcc_dir(self) -> Path:
        return self.root / GCC_DIR

    @property
    def main_file(self) -> Path:
        return self.gcc_dir / "main.md"

    @property
    def branches_dir(self) -> Path:
        return self.gcc_dir / "branches"

    @property
    def head_file(self) -> Path:
        return self.gcc_dir / "HEAD"

    @property
    def lock_file(self) -> Path:
        return self.gcc_dir / "LOCK"

    @property
    def checkpoints_file(self) -> Path:
        return self.gcc_dir / "checkpoints.log"

    def branch(self, name: str) -> BranchPaths:
        return BranchPaths(name, self.branches_dir / name)


def validate_branch_name(name: str) -> str:
    if not isinstance(name, str) or not _NAME_RE.match(name) or name in (".", ".."):
        raise InvalidName(str(name))
    return name


# -- file primitives -------------------------------------------------------------


def atomic_write(path: Path, content: bytes | str) -> None:
    """Replace ``path`` with ``content`` all-or-nothing."""
    if isinstance(content, str):
        content = content.encode("utf-8")
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.{threading.get_ident()}.tmp")
    try:
        with open(tmp, "wb") as fh:
            fh.write(content)
            fh.flush()
            os.fsync(fh.fileno())
        if before_replace is not None:
            before_replace(path)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc
    finally:
        if tmp.exists():
            tmp.unlink()


def append_text(path: Path, text: str) -> None:
    """Append by rewriting atomically, so readers never see a torn tail."""
    atomic_write(path, read_bytes(path) + text.encode("utf-8"))


def read_bytes(path: Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError:
        return b""
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc


def read_text(path: Path) -> str:
    return read_bytes(path).decode("utf-8")


# -- repository ------------------------------------------------------------------


def _write_branch(repo: RepoPaths, name: str, commit_text: str, metadata: MetadataDoc) -> BranchPaths:
    bp = repo.branch(name)
    try:
        bp.dir.mkdir(parents=True)
    except OSError as exc:
        raise IoError(f"{bp.dir}: {exc.strerror or exc}") from exc
    atomic_write(bp.log_file, b"")
    atomic_write(bp.commit_file, commit_text)
    atomic_write(bp.metadata_file, render_metadata(metadata))
    return bp


def init_repo(root: str | os.PathLike, project_goal: str, todo: Iterable[str] = ()) -> RepoPaths:
    repo = RepoPaths(Path(root).resolve())
    if repo.gcc_dir.exists():
        raise AlreadyInitialized(str(repo.gcc_dir))
    roadmap = Roadmap.from_todo(project_goal, todo)
    text = render_roadmap(roadmap)
    try:
        repo.gcc_dir.mkdir(parents=True)
        repo.branches_dir.mkdir()
    except OSError as exc:
        raise IoError(f"{repo.gcc_dir}: {exc.strerror or exc}") from exc
    atomic_write(repo.main_file, text)
    _write_branch(repo, DEFAULT_BRANCH, "", MetadataDoc.default())
    atomic_write(repo.checkpoints_file, b"")
    atomic_write(repo.head_file, DEFAULT_BRANCH + "\n")
    return repo


def create_branch_dir(repo: RepoPaths, name: str, commit_text: str, metadata: MetadataDoc) -> BranchPaths:
    return _write_branch(repo, name, commit_text, metadata)


def open_repo(root: str | os.PathLike) -> RepoPaths:
    repo = RepoPaths(Path(root).resolve())
    if not repo.main_file.is_file():
        raise NotARepo(str(root))
    head = read_text(repo.head_file).strip()
    if not head or not repo.branch(head).dir.is_dir():
        raise CorruptRepo(f"HEAD names missing branch {head!r}")
    return repo


def find_repo(start: str | os.PathLike) -> RepoPaths:
    """Walk up from ``start`` to the nearest directory holding ``.GCC/``."""
    here = Path(start).resolve()
    for candidate in (here, *here.parents):
        if (candidate / GCC_DIR).is_dir():
            return open_repo(candidate)
    raise NotARepo(str(start))


def list_branches(repo: RepoPaths) -> list[str]:
    if not repo.branches_dir.is_dir():
        raise CorruptRepo("missing branches directory")
    return sorted(p.name for p in repo.branches_dir.iterdir() if p.is_dir())


def require_branch(repo: RepoPaths, name: str) -> BranchPaths:
    if not isinstance(name, str) or not _NAME_RE.match(name) or not repo.branch(name).dir.is_dir():
        raise UnknownBranch(str(name))
    return repo.branch(name)


def get_head(repo: RepoPaths) -> str:
    head = read_text(repo.head_file).strip()
    if not head:
        raise CorruptRepo("empty HEAD")
    return head


def set_head(repo: RepoPaths, name: str) -> None:
    require_branch(repo, name)
    atomic_write(repo.head_file, name + "\n")


# -- locking ---------------------------------------------------------------------


def default_holder() -> str:
    return f"{socket.gethostname()}:{os.getpid()}:{threading.get_ident()}"


def _read_lock(repo: RepoPaths) -> tuple[str, float] | None:
    try:
        raw = repo.lock_file.read_text(encoding="utf-8")
    except FileNotFoundError:
        return None
    holder, _, stamp = raw.strip().partition("\n")
    try:
        return holder, parse_ts(stamp.strip()).timestamp()
    except ValueError:
        # unreadable lock: treat as infinitely old
        return holder, float("-inf")


def with_lock(
    repo: RepoPaths,
    action: Callable[[], T],
    *,
    holder: str | None = None,
    clock: Clock | None = None,
    stale_after: float = LOCK_STALE_SECONDS,
    wait: float = 0.0,
) -> T:
    """Run ``action`` while holding the repository's advisory lock.

    The LOCK file holds the holder id and acquisition time.  A lock older than
    ``stale_after`` seconds (per ``clock``) is broken.  With ``wait`` > 0 the
    call polls for up to that many wall-clock seconds before giving up.
    """
    clock = clock or utc_now
    holder = holder or default_holder()
    deadline = time.monotonic() + wait
    tmp = repo.lock_file.with_name(f".LOCK.{os.getpid()}.{threading.get_ident()}.tmp")
    while True:
        now = clock()
        try:
            tmp.write_text(f"{holder}\n{format_ts(now)}\n", encoding="utf-8")
            try:
                # link() fails if LOCK exists, and publishes complete contents
                os.link(tmp, repo.lock_file)
                break
            finally:
                tmp.unlink()
        except FileExistsError:
            current = _read_lock(repo)
            if current is None:
                continue
            if now.timestamp() - current[1] > stale_after:
                try:
                    repo.lock_file.unlink()
                except FileNotFoundError:
                    pass
                continue
            if time.monotonic() < deadline:
                time.sleep(0.01)
                continue
            raise LockHeld(current[0]) from None
        except OSError as exc:
            raise IoError(f"{repo.lock_file}: {exc.strerror or exc}") from exc
    try:
        return action()
    finally:
        current = _read_lock(repo)
        if current is not None and current[0] == holder:
            repo.lock_file.unlink()

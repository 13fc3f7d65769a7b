"""CLI golden transcripts.

Set GCC_UPDATE_GOLDENS=1 to rewrite the files under tests/golden/ after an
intended output change, then review the diff.
"""

import io
import json
import os
import re
from pathlib import Path

import pytest

from gcc_memory import cli
from gcc_memory.checkpoint import InMemoryVcs

from conftest import TickClock

GOLDEN_DIR = Path(__file__).parent / "golden"
UPDATE = os.environ.get("GCC_UPDATE_GOLDENS") == "1"

ROADMAP_V2 = """# Project Roadmap

## Goal
Build a CLI

## Milestones
- [x] scaffold
- [ ] tests

## Notes
io helper landed
"""

# One fixture session touching every subcommand.  "{cursor}" is replaced by
# the cursor from the most recent output that carried one.
SCENARIO = [
    ["init", "--goal", "Build a CLI", "--todo", "scaffold", "--todo", "tests"],
    ["context"],
    ["ota", "-o", "tests fail", "-t", "missing import", "-a", "add import"],
    ["ota", "-o", "tests pass", "-t", "ready to commit", "-a", "commit"],
    ["commit", "-m", "add write_file helper", "--contribution",
     "Defines a reusable file output abstraction `write_file(path, content)` in `io.py`."],
    ["commit", "-m", "update roadmap", "--contribution-file", "-", "--roadmap-file", "roadmap.md",
     "--metadata", 'file_structure={"src": ["io.py"]}'],
    ["branch", "RAG-memory", "--purpose", "Prototype a retriever-augmented memory system."],
    ["ota", "-o", "index built", "-t", "recall is low", "-a", "give up"],
    ["commit", "-m", "try retriever", "--contribution", "Recall stayed below 40%."],
    ["context", "--branch", "RAG-memory"],
    ["checkout", "main"],
    ["merge", "RAG-memory", "--synthesis", "Abandoned; keep plain summaries.", "--purpose", "Build a CLI, simply"],
    ["context"],
    ["context", "--branch", "main"],
    ["context", "--log"],
    ["scroll", "up", "--cursor", "{cursor}"],
    ["scroll", "up", "--cursor", "{cursor}"],
    ["scroll", "down", "--cursor", "{cursor}"],
    ["context", "--commit", "{first_commit}"],
    ["context", "--metadata", "file_structure"],
    ["context", "--metadata", "merged", "--branch", "RAG-memory"],
    ["checkpoints"],
    ["merge", "nope"],
    ["commit", "-m", ""],
    ["context", "--commit", "00000000"],
    ["scroll", "up", "--cursor", "not-a-cursor"],
]

STDIN = {5: "Marked scaffold done.\nRecorded file layout.\n"}

_CURSOR_RE = re.compile(r"^cursor: (\S+)$", re.M)


def _run_scenario(tmp_path, as_json):
    (tmp_path / "roadmap.md").write_text(ROADMAP_V2)
    clock = TickClock()
    vcs = InMemoryVcs()
    env = {}
    cursor, first_commit = None, None
    chunks = []
    for i, argv in enumerate(SCENARIO):
        argv = [a.replace("{cursor}", cursor or "").replace("{first_commit}", first_commit or "") for a in argv]
        if as_json:
            argv = argv + ["--json"]
        stdin = io.StringIO(STDIN[i]) if i in STDIN else None
        code, out, err = cli.run(argv, tmp_path, stdin=stdin, env=env, clock=clock, vcs=vcs)
        chunks.append(f"$ gcc-memory {' '.join(_quote(a) for a in argv)}\nexit: {code}\n--- stdout\n{out}--- stderr\n{err}\n")
        if as_json and out:
            data = json.loads(out)
            cursor = data.get("cursor", cursor)
            if argv[0] == "commit" and first_commit is None:
                first_commit = data["id"]
        else:
            found = _CURSOR_RE.findall(out)
            cursor = found[-1] if found else cursor
            if argv[0] == "commit" and first_commit is None and code == 0:
                first_commit = out.split()[1].rstrip("]")
    return "".join(chunks)


def _quote(arg):
    return arg if re.fullmatch(r"[A-Za-z0-9_./=:-]+", arg) else json.dumps(arg, ensure_ascii=False)


def _check_golden(name, text):
    path = GOLDEN_DIR / name
    if UPDATE:
        GOLDEN_DIR.mkdir(exist_ok=True)
        path.write_text(text, encoding="utf-8")
    assert path.exists(), f"missing golden {name}; run with GCC_UPDATE_GOLDENS=1"
    assert text == path.read_text(encoding="utf-8")


def test_golden_plain(tmp_path):
    _check_golden("cli_plain.txt", _run_scenario(tmp_path, as_json=False))


def test_golden_json(tmp_path):
    _check_golden("cli_json.txt", _run_scenario(tmp_path, as_json=True))


def test_scenario_covers_every_subcommand():
    used = {argv[0] for argv in SCENARIO}
    commands = set(cli.build_parser()._subparsers._group_actions[0].choices)
    assert used == commands


# -- behaviour checks independent of the goldens ---------------------------------


@pytest.fixture
def cli_repo(tmp_path):
    code, _, _ = cli.run(["init", "--goal", "g"], tmp_path, env={}, clock=TickClock())
    assert code == 0
    return tmp_path


def test_no_args_is_usage(tmp_path):
    code, out, err = cli.run([], tmp_path, env={})
    assert code == 2 and err.startswith("usage: gcc-memory")


def test_bad_flag_is_usage(cli_repo):
    code, _, err = cli.run(["context", "--bogus"], cli_repo, env={})
    assert code == 2 and "unrecognized arguments" in err


def test_unknown_branch_merge(cli_repo):
    code, out, err = cli.run(["merge", "nope"], cli_repo, env={}, clock=TickClock())
    assert (code, out) == (1, "")
    assert err.startswith("error: UnknownBranch: nope")


def test_not_a_repo(tmp_path):
    code, _, err = cli.run(["context"], tmp_path, env={})
    assert code == 1 and err.startswith("error: NotARepo")


def test_repo_discovered_from_subdirectory(cli_repo):
    sub = cli_repo / "src" / "deep"
    sub.mkdir(parents=True)
    code, out, _ = cli.run(["context"], sub, env={})
    assert code == 0 and out.startswith("On branch main")


def test_gcc_root_env(cli_repo, tmp_path_factory):
    elsewhere = tmp_path_factory.mktemp("elsewhere")
    code, out, _ = cli.run(["context", "--json"], elsewhere, env={"GCC_ROOT": str(cli_repo)})
    assert code == 0 and json.loads(out)["head"] == "main"


def test_log_tail_is_20_lines_plus_cursor(cli_repo):
    clock = TickClock()
    for i in range(5):
        cli.run(["ota", "-o", f"o{i}"], cli_repo, env={}, clock=clock)
    code, out, _ = cli.run(["context", "--log"], cli_repo, env={})
    lines = out.splitlines()
    assert code == 0 and len(lines) == 21
    assert lines[-1].startswith("cursor: ")


def test_init_twice(cli_repo):
    code, _, err = cli.run(["init"], cli_repo, env={})
    assert code == 1 and err.startswith("error: AlreadyInitialized")


def test_bad_metadata_arg(cli_repo):
    code, _, err = cli.run(["commit", "-m", "x", "--metadata", "nojson"], cli_repo, env={}, clock=TickClock())
    assert code == 1 and err.startswith("error: BadRequest")

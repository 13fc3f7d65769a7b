"""
A roadmap and a chain of commits
================================

Start a memory repository for a small coding task, log a few reasoning
steps, and record two milestones.  Each commit carries forward a summary
of everything before it, so the newest entry alone tells a fresh agent
where the work stands.
"""

import tempfile
from pathlib import Path

from gcc_memory import ops, init_repo
from gcc_memory.model import FixedClock
from gcc_memory.retrieve import context_branch

# a fixed clock keeps the printed ids stable from run to run
clock = FixedClock("2025-01-01T09:00:00Z")
root = Path(tempfile.mkdtemp())
repo = init_repo(root, "Build a CLI that writes reports", ["scaffold", "file output", "tests"])
print((root / ".GCC" / "main.md").read_text())

# Observation-Thought-Action records go to the current branch's log.md
ops.append_ota(repo, "no package yet", "need a layout first", "create src/ and io.py", clock=clock)
ops.append_ota(repo, "io.py exists", "writing files is needed everywhere", "add write_file()", clock=clock)

first = ops.commit(
    repo,
    ops.CommitRequest(
        "add write_file helper",
        "Defines a reusable file output abstraction `write_file(path, content)` in `io.py`. "
        "Validated with a test to ensure correctness and future extensibility.",
    ),
    clock=clock,
)

clock.set("2025-01-01T09:30:00Z")
second = ops.commit(repo, ops.CommitRequest("add report command", "Wired `report` subcommand to write_file."), clock=clock)

# The second entry's progress summary is the first entry's contribution
print((root / ".GCC" / "branches" / "main" / "commit.md").read_text())

# The branch view: purpose, rolling progress, newest commits first
view = context_branch(repo, "main")
print("purpose: ", view.purpose)
print("progress:", view.progress)
for c in view.commits:
    print(" ", c["id"], c["timestamp"], c["message"])

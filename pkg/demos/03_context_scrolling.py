"""
Reading memory a window at a time
=================================

Context retrieval never dumps a whole file.  The branch view shows the
latest 10 commits and the log view the last 20 lines; an opaque cursor
scrolls toward older content.  Any write to the file invalidates the
cursor, so an agent never pages through a view that has shifted under it.
"""

import tempfile
from pathlib import Path

from gcc_memory import ops, init_repo
from gcc_memory.errors import StaleCursor
from gcc_memory.model import FixedClock
from gcc_memory.retrieve import context_branch, context_log, scroll

clock = FixedClock("2025-01-01T00:00:00Z")
repo = init_repo(Path(tempfile.mkdtemp()), "Long task")
for i in range(25):
    ops.commit(repo, ops.CommitRequest(f"step {i + 1}", f"finished step {i + 1}"), clock=clock)

view = context_branch(repo, "main")
print([c["message"] for c in view.commits])

# scroll up until the oldest edge
page = scroll(repo, view.cursor, "up")
while True:
    print([c["message"] for c in page.items], "edge" if page.at_edge else "")
    if page.at_edge:
        break
    page = scroll(repo, page.cursor, "up")

# log windows are raw lines of log.md
for i in range(9):
    ops.append_ota(repo, f"observation {i}", "think", "act", clock=clock)
log = context_log(repo)
print("\n".join(log.items))

ops.append_ota(repo, "something new", clock=clock)
try:
    scroll(repo, log.cursor, "up")
except StaleCursor as exc:
    print("cursor refused:", exc)

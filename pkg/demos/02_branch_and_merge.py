"""
Exploring on a branch, then merging back
========================================

A branch is a sandbox with its own log, commits and metadata.  Here the
agent tries a retrieval-based memory, finds it does not pay off, and
merges the lesson back into main.  The merged log keeps every branch step
under an origin tag, and the branch is flagged as merged.
"""

import tempfile
from pathlib import Path

from gcc_memory import ops, init_repo
from gcc_memory.model import FixedClock, parse_log
from gcc_memory.retrieve import context_metadata, context_status

clock = FixedClock("2025-01-01T10:00:00Z")
root = Path(tempfile.mkdtemp())
repo = init_repo(root, "Build a CLI", ["scaffold", "memory"])
ops.append_ota(repo, "plain summaries work", "could retrieval do better?", "branch", clock=clock)
ops.commit(repo, ops.CommitRequest("baseline", "Plain rolling summaries in place."), clock=clock)

# branch() switches HEAD to the new branch
ops.branch(
    repo,
    "RAG-memory",
    "Prototype a retriever-augmented memory system that indexes fine-grained OTA records "
    "to support semantic retrieval and long-horizon reasoning.",
    clock=clock,
)
for obs in ("index built", "recall 0.31", "recall 0.38 after tuning"):
    ops.append_ota(repo, obs, "measure", "tune", clock=clock)
ops.commit(repo, ops.CommitRequest("evaluate retriever", "Recall stayed below 0.4."), clock=clock)

# back on main, fold the branch in
ops.checkout(repo, "main", clock=clock)
entry = ops.merge(repo, ops.MergeRequest("RAG-memory", "Abandoned retrieval; keep plain summaries."), clock=clock)
print("merge entry", entry.id, "-", entry.message)
print(entry.previous_progress)

# native records first, then the branch's records under its origin tag
for rec in parse_log((root / ".GCC/branches/main/log.md").read_text()):
    print(f"{rec.origin or 'main':>10}  #{rec.seq}  {rec.observation.splitlines()[0]}")

print(context_status(repo).branches)
print(context_metadata(repo, "merged", branch="RAG-memory"))

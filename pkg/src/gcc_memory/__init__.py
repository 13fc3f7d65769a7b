"""Version-controlled, file-backed memory for long-horizon agents.

The memory lives in a ``.GCC/`` directory: a shared roadmap (``main.md``) and,
per branch, milestone entries (``commit.md``), an observation-thought-action
trace (``log.md``) and structured metadata (``metadata.yaml``).  Agents drive
it with COMMIT, BRANCH, MERGE and CONTEXT.
"""

from .checkpoint import CheckpointRecord, GitAdapter, InMemoryVcs, list_checkpoints, record_checkpoint
from .commands import Session
from .errors import ERROR_CODES, GccError, ParseError
from .model import (
    CommitEntry,
    FixedClock,
    MetadataDoc,
    Milestone,
    OtaRecord,
    Roadmap,
    compute_commit_id,
    parse_commit_file,
    parse_log,
    parse_metadata,
    parse_roadmap,
    render_commit_file,
    render_log,
    render_metadata,
    render_ota,
    render_roadmap,
)
from .ops import (
    CommitRequest,
    MergeRequest,
    append_ota,
    branch,
    checkout,
    commit,
    merge,
    set_metadata_segment,
    update_roadmap,
)
from .retrieve import (
    Cursor,
    context_branch,
    context_commit,
    context_log,
    context_metadata,
    context_status,
    scroll,
)
from .store import RepoPaths, get_head, init_repo, open_repo, set_head
from .summarizer import SummarizerSpec, fold, merge_summaries

__version__ = "0.1.0"

import pytest

from gcc_memory import ops, store
from gcc_memory.checkpoint import list_checkpoints
from gcc_memory.errors import (
    AlreadyMerged,
    BranchExists,
    EmptyMessage,
    InvalidName,
    IoError,
    LockHeld,
    ParseError,
    SelfMerge,
    UnknownBranch,
)
from gcc_memory.model import (
    Milestone,
    Roadmap,
    compute_commit_id,
    format_ts,
    parse_commit_file,
    parse_log,
    parse_metadata,
    parse_roadmap,
)
from gcc_memory.retrieve import context_metadata, read_entries
from gcc_memory.summarizer import fold, merge_summaries

RAG_PURPOSE = (
    "Prototype a retriever-augmented memory system that indexes fine-grained OTA records "
    "to support semantic retrieval and long-horizon reasoning."
)


def _log(repo, name="main"):
    return parse_log(repo.branch(name).log_file.read_text())


def _entries(repo, name="main"):
    return parse_commit_file(repo.branch(name).commit_file.read_text())


# -- OTA -------------------------------------------------------------------------


def test_first_ota_is_seq_1(repo, clock):
    rec = ops.append_ota(repo, "o", "t", "a", clock=clock)
    assert rec.seq == 1
    assert _log(repo) == [rec]


def test_three_otas(repo, clock):
    for i in range(3):
        ops.append_ota(repo, f"o{i}", clock=clock)
    assert [r.seq for r in _log(repo)] == [1, 2, 3]


def test_empty_ota(repo, clock):
    rec = ops.append_ota(repo, clock=clock)
    assert (rec.observation, rec.thought, rec.action) == ("", "", "")
    assert _log(repo) == [rec]


def test_ota_lock_held(repo, clock):
    repo.lock_file.write_text(f"other\n{format_ts(clock())}\n")
    with pytest.raises(LockHeld):
        ops.append_ota(repo, "o", clock=clock)


# -- COMMIT ----------------------------------------------------------------------


def test_first_commit(repo, clock):
    entry = ops.commit(repo, ops.CommitRequest("first", "C"), clock=clock)
    assert entry.previous_progress == ""
    assert entry.contribution == "C"
    assert entry.branch_purpose == "Build a CLI"
    assert entry.id == compute_commit_id("", entry.timestamp, "first", "C")
    assert _entries(repo) == [entry]


def test_second_commit_folds(repo, clock):
    first = ops.commit(repo, ops.CommitRequest("first", "did X"), clock=clock)
    second = ops.commit(repo, ops.CommitRequest("second", "did Y"), clock=clock)
    assert second.previous_progress == fold("", first.contribution) == "did X"
    assert second.id == compute_commit_id(first.id, second.timestamp, "second", "did Y")
    assert _entries(repo)[1] == second


@pytest.mark.parametrize("message", ["", "   ", "two\nlines"])
def test_bad_message(repo, clock, message):
    with pytest.raises(EmptyMessage):
        ops.commit(repo, ops.CommitRequest(message, "c"), clock=clock)
    assert _entries(repo) == []


def test_commit_revises_roadmap_and_metadata(repo, clock):
    roadmap = Roadmap("Build a CLI", [Milestone("scaffold", True), Milestone("tests")])
    ops.commit(
        repo,
        ops.CommitRequest("m", "c", revise_roadmap=roadmap, metadata_updates={"file_structure": {"src": ["io.py"]}}),
        clock=clock,
    )
    assert parse_roadmap(repo.main_file.read_text()) == roadmap
    assert context_metadata(repo, "file_structure") == {"src": ["io.py"]}
    assert context_metadata(repo, "env_config") == {}


def test_commit_without_new_otas_is_allowed(repo, clock):
    ops.commit(repo, ops.CommitRequest("a", "x"), clock=clock)
    ops.commit(repo, ops.CommitRequest("b", "y"), clock=clock)
    assert len(_entries(repo)) == 2


def test_chain_rederives(repo, clock):
    for i in range(12):
        ops.commit(repo, ops.CommitRequest(f"m{i}", f"contribution {i}\nline two"), clock=clock)
    entries = _entries(repo)
    summary = ""
    for k, entry in enumerate(entries):
        assert entry.previous_progress == summary, k
        summary = fold(entry.previous_progress, entry.contribution)


# -- BRANCH ----------------------------------------------------------------------


def test_branch_bootstrap(repo, clock):
    ops.set_metadata_segment(repo, "env_config", {"python": "3.11"}, clock=clock)
    bp = ops.branch(repo, "RAG-memory", RAG_PURPOSE, clock=clock)
    assert store.get_head(repo) == "RAG-memory"
    assert bp.log_file.read_bytes() == b""
    (boot,) = _entries(repo, "RAG-memory")
    assert boot.branch_purpose == RAG_PURPOSE
    assert boot.message == "branch created"
    assert boot.previous_progress == boot.contribution == ""
    assert parse_metadata(bp.metadata_file.read_text()).segments == {
        "file_structure": {},
        "env_config": {"python": "3.11"},
    }


def test_commit_on_branch_inherits_purpose(repo, clock):
    ops.branch(repo, "x", "explore x", clock=clock)
    entry = ops.commit(repo, ops.CommitRequest("m", "c"), clock=clock)
    assert entry.branch_purpose == "explore x"
    assert entry.previous_progress == ""


def test_branch_errors(repo, clock):
    with pytest.raises(BranchExists):
        ops.branch(repo, "main", "", clock=clock)
    with pytest.raises(InvalidName):
        ops.branch(repo, "a/b", "", clock=clock)
    assert store.get_head(repo) == "main"


# -- MERGE -----------------------------------------------------------------------


def _setup_merge(repo, clock, native=3, target=2):
    for i in range(native):
        ops.append_ota(repo, f"main {i}", clock=clock)
    ops.commit(repo, ops.CommitRequest("main work", "main did things"), clock=clock)
    ops.branch(repo, "feat", "try feat", clock=clock)
    for i in range(target):
        ops.append_ota(repo, f"feat {i}", clock=clock)
    ops.commit(repo, ops.CommitRequest("feat work", "feat did things"), clock=clock)
    ops.checkout(repo, "main", clock=clock)


def test_merge_log_counts(repo, clock):
    _setup_merge(repo, clock)
    before = repo.branch("main").log_file.read_bytes()
    entry = ops.merge(repo, ops.MergeRequest("feat", "kept feat"), clock=clock)
    records = _log(repo)
    # 3 native + the pre-merge context record, then the 2 target records
    assert len(records) == 6
    assert [r.origin for r in records[-2:]] == ["feat", "feat"]
    assert [r.seq for r in records] == [1, 2, 3, 4, 1, 2]
    after = repo.branch("main").log_file.read_bytes()
    assert after.startswith(before)
    assert b"\n== Branch feat ==\n" in after
    assert entry.contribution == "kept feat"


def test_merge_entry_and_snapshot(repo, clock):
    _setup_merge(repo, clock)
    main_latest = read_entries(repo.branch("main"))[-1]
    feat_latest = read_entries(repo.branch("feat"))[-1]
    entry = ops.merge(repo, ops.MergeRequest("feat", "synth", updated_purpose="new purpose"), clock=clock)
    assert entry.branch_purpose == "new purpose"
    assert entry.previous_progress == merge_summaries(
        fold(main_latest.previous_progress, main_latest.contribution),
        fold(feat_latest.previous_progress, feat_latest.contribution),
    )
    pre = [r for r in _log(repo) if r.origin is None][-1]
    assert pre.thought == "pre-merge context retrieval"
    assert pre.action == "MERGE feat"
    assert "try feat" in pre.observation and "feat did things" in pre.observation
    meta = parse_metadata(repo.branch("feat").metadata_file.read_text())
    assert meta.segments["merged"] == {"into": "main", "at": format_ts(entry.timestamp)}


def test_merge_inherits_purpose_by_default(repo, clock):
    _setup_merge(repo, clock)
    entry = ops.merge(repo, ops.MergeRequest("feat", "s"), clock=clock)
    assert entry.branch_purpose == "Build a CLI"


def test_merge_updates_roadmap(repo, clock):
    _setup_merge(repo, clock)
    roadmap = Roadmap("Build a CLI", [Milestone("scaffold", True)], "feat merged")
    ops.merge(repo, ops.MergeRequest("feat", "s", roadmap_update=roadmap), clock=clock)
    assert parse_roadmap(repo.main_file.read_text()) == roadmap


def test_merge_errors(repo, clock):
    _setup_merge(repo, clock)
    with pytest.raises(SelfMerge):
        ops.merge(repo, ops.MergeRequest("main"), clock=clock)
    with pytest.raises(UnknownBranch):
        ops.merge(repo, ops.MergeRequest("ghost"), clock=clock)
    ops.merge(repo, ops.MergeRequest("feat"), clock=clock)
    with pytest.raises(AlreadyMerged):
        ops.merge(repo, ops.MergeRequest("feat"), clock=clock)


def test_native_seq_continues_after_merge(repo, clock):
    _setup_merge(repo, clock)
    ops.merge(repo, ops.MergeRequest("feat"), clock=clock)
    rec = ops.append_ota(repo, "after", clock=clock)
    assert rec.seq == 5
    assert _log(repo)[-1].origin is None


def test_nested_merge_keeps_inner_origins(repo, clock):
    ops.branch(repo, "a", "", clock=clock)
    ops.append_ota(repo, "a1", clock=clock)
    ops.branch(repo, "b", "", clock=clock)
    ops.append_ota(repo, "b1", clock=clock)
    ops.checkout(repo, "a", clock=clock)
    ops.merge(repo, ops.MergeRequest("b"), clock=clock)
    ops.checkout(repo, "main", clock=clock)
    ops.merge(repo, ops.MergeRequest("a"), clock=clock)
    origins = [(r.origin, r.observation) for r in _log(repo) if r.origin]
    assert origins[0] == ("a", "a1")
    assert ("b", "b1") in origins
    assert len(origins) == len(_log(repo, "a"))


def test_branch_from_merged_branch_drops_flag(repo, clock):
    _setup_merge(repo, clock)
    ops.merge(repo, ops.MergeRequest("feat"), clock=clock)
    ops.checkout(repo, "feat", clock=clock)
    bp = ops.branch(repo, "feat2", "", clock=clock)
    assert "merged" not in parse_metadata(bp.metadata_file.read_text()).segments


def test_checkpoint_parity(repo, clock):
    _setup_merge(repo, clock)
    ops.merge(repo, ops.MergeRequest("feat"), clock=clock)
    ops.commit(repo, ops.CommitRequest("after", "x"), clock=clock)
    created = [e for name in ("main", "feat") for e in _entries(repo, name) if e.message != "branch created"]
    assert len(list_checkpoints(repo)) == len(created) == 4


# -- roadmap and metadata ----------------------------------------------------------


def test_update_roadmap(repo, clock):
    roadmap = parse_roadmap(repo.main_file.read_text())
    roadmap.milestones[0].done = True
    ops.update_roadmap(repo, roadmap, clock=clock)
    assert parse_roadmap(repo.main_file.read_text()).milestones[0].done
    roadmap.goal = "Build a better CLI"
    ops.update_roadmap(repo, roadmap, clock=clock)
    assert parse_roadmap(repo.main_file.read_text()).goal == "Build a better CLI"


def test_update_roadmap_crash_keeps_old(repo, clock, monkeypatch):
    before = repo.main_file.read_bytes()

    def crash(path):
        raise OSError("simulated crash")

    monkeypatch.setattr(store, "before_replace", crash)
    with pytest.raises(IoError):
        ops.update_roadmap(repo, Roadmap("other"), clock=clock)
    assert repo.main_file.read_bytes() == before
    assert not repo.lock_file.exists()


def test_set_metadata_segment(repo, clock):
    ops.set_metadata_segment(repo, "env_config", {"python": "3.11"}, clock=clock)
    assert context_metadata(repo, "env_config") == {"python": "3.11"}
    before = repo.branch("main").metadata_file.read_text().split("\n")[0]
    ops.set_metadata_segment(repo, "deps", ["numpy"], clock=clock)
    text = repo.branch("main").metadata_file.read_text()
    assert list(parse_metadata(text).segments) == ["file_structure", "env_config", "deps"]
    assert text.split("\n")[0] == before == "file_structure: {}"


def test_set_metadata_on_corrupt_file(repo, clock):
    path = repo.branch("main").metadata_file
    path.write_text("a: 1\na: 2\n")
    with pytest.raises(ParseError):
        ops.set_metadata_segment(repo, "env_config", {}, clock=clock)
    assert path.read_text() == "a: 1\na: 2\n"


def test_set_metadata_rejects_unrepresentable(repo, clock):
    with pytest.raises(ValueError):
        ops.set_metadata_segment(repo, "x", {"f": float("inf")}, clock=clock)


def test_head_always_valid(repo, clock):
    ops.branch(repo, "x", "", clock=clock)
    with pytest.raises(UnknownBranch):
        ops.checkout(repo, "nope", clock=clock)
    store.open_repo(repo.root)
    assert store.get_head(repo) == "x"

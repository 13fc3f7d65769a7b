import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gcc_memory.summarizer import (
    ELISION,
    FallbackSummary,
    SummarizerSpec,
    fold,
    merge_summaries,
)


def test_fold_first_commit():
    assert fold("", "did X") == "did X"


def test_fold_under_budget():
    assert fold("A", "B") == "A\n---\nB"
    a, b = "a" * 995, "b" * 1000
    assert fold(a, b) == a + "\n---\n" + b
    assert len(fold(a, b)) == 2000


def test_fold_over_budget():
    out = fold("p" * 3000, "c" * 3000)
    assert len(out) <= 2000
    assert "[... elided ...]" in out
    # head share then tail share of the budget
    assert out == "p" * 500 + ELISION + "c" * 1300


def test_fold_deterministic():
    assert fold("x" * 5000, "y" * 7) == fold("x" * 5000, "y" * 7)


def test_merge_summaries():
    assert merge_summaries("", "T") == "[merged from branch]\nT"
    assert merge_summaries("C", "") == "C\n[merged from branch]\n"
    assert len(merge_summaries("c" * 3000, "t" * 3000)) <= 2000


@given(st.text(max_size=3000), st.text(max_size=3000), st.integers(min_value=200, max_value=2500))
def test_length_bound(a, b, budget):
    spec = SummarizerSpec(max_chars=budget)
    assert len(fold(a, b, spec)) <= budget
    assert len(merge_summaries(a, b, spec)) <= budget


def test_spec_validation():
    with pytest.raises(ValueError):
        SummarizerSpec(max_chars=199)
    with pytest.raises(ValueError):
        SummarizerSpec(kind="external")


def _script(tmp_path, body):
    path = tmp_path / "summ.py"
    path.write_text(body)
    return f"{sys.executable} {path}"


def test_external_summarizer(tmp_path):
    cmd = _script(
        tmp_path,
        "import sys\nprev, new = sys.stdin.read().split('\\x00')\nprint(f'{len(prev)}+{len(new)}', end='')\n",
    )
    spec = SummarizerSpec(kind="external", external_command=cmd)
    out = fold("abc", "de", spec)
    assert out == "3+2"
    assert not isinstance(out, FallbackSummary)


def test_external_failure_falls_back(tmp_path):
    cmd = _script(tmp_path, "import sys\nsys.exit(3)\n")
    spec = SummarizerSpec(kind="external", external_command=cmd)
    out = fold("A", "B", spec)
    assert out == "A\n---\nB"
    assert isinstance(out, FallbackSummary)


def test_external_output_is_budgeted(tmp_path):
    cmd = _script(tmp_path, "print('z' * 5000, end='')\n")
    spec = SummarizerSpec(kind="external", external_command=cmd, max_chars=300)
    assert len(merge_summaries("a", "b", spec)) <= 300

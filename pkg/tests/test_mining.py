from __future__ import annotations

import random

import pytest

from repotailor.errors import BranchMissing, EmptyInput, RepoUnreadable
from repotailor.mining import (
    CommitRecord,
    added_lines,
    filter_bots,
    filter_outliers,
    stream_commits,
)

from conftest import BASE_TS, commit_files, init_repo, run_git
from oracles import q3_iqr_oracle


def make_commit(author="alice", email="a@x.com", files=1, ts=BASE_TS, sha="0" * 40):
    return CommitRecord(
        repo_id="r",
        sha=sha,
        author_name=author,
        author_email=email,
        timestamp=ts,
        first_parent_sha=None,
        changed_java_files=(),
        files_changed_count=files,
        java_added_lines=0,
    )


def test_stream_linear_history(tmp_path):
    repo = init_repo(tmp_path / "lin")
    commit_files(repo, {"A.java": "class A {}\n"}, "one", "Alice", "a@x.com", BASE_TS)
    commit_files(repo, {"A.java": "class A { int x; }\n"}, "two", "Alice", "a@x.com", BASE_TS + 60)
    commit_files(repo, {"B.java": "class B {}\n"}, "three", "Bob", "b@y.com", BASE_TS + 120)
    commits = stream_commits(repo, "main")
    assert [c.author_name for c in commits] == ["Alice", "Alice", "Bob"]
    assert [c.timestamp for c in commits] == [BASE_TS, BASE_TS + 60, BASE_TS + 120]
    assert commits[0].first_parent_sha is None
    assert commits[1].first_parent_sha == commits[0].sha
    assert commits[0].changed_java_files == ("A.java",)
    assert commits[0].java_added_lines == 1


def test_stream_merge_commit_follows_first_parent(tmp_path):
    repo = init_repo(tmp_path / "merge")
    commit_files(repo, {"A.java": "class A {}\n"}, "base", "Alice", "a@x.com", BASE_TS)
    commit_files(repo, {"A.java": "class A { int x; }\n"}, "mainline", "Alice", "a@x.com", BASE_TS + 60)
    main_head = run_git(repo, "rev-parse", "HEAD").strip()
    run_git(repo, "checkout", "-q", "-b", "side", "HEAD~1")
    side_sha = commit_files(repo, {"B.java": "class B {}\n"}, "side work", "Bob", "b@y.com", BASE_TS + 90)
    run_git(repo, "checkout", "-q", "main")
    date = f"{BASE_TS + 120} +0000"
    run_git(
        repo, "merge", "-q", "--no-ff", "-m", "merge side", "side",
        env={"GIT_AUTHOR_DATE": date, "GIT_COMMITTER_DATE": date},
    )
    commits = stream_commits(repo, "main")
    shas = [c.sha for c in commits]
    assert side_sha not in shas  # side branch commits excluded from the chain
    assert len(commits) == 3
    merge = commits[-1]
    assert merge.first_parent_sha == main_head
    assert merge.changed_java_files == ("B.java",)  # diffed vs first parent


def test_stream_empty_repository(tmp_path):
    repo = init_repo(tmp_path / "empty")
    assert stream_commits(repo, "main") == []


def test_stream_missing_branch(tmp_path):
    repo = init_repo(tmp_path / "mb")
    commit_files(repo, {"A.java": "class A {}\n"}, "one", "Alice", "a@x.com", BASE_TS)
    with pytest.raises(BranchMissing):
        stream_commits(repo, "nope")


def test_stream_unreadable_repo(tmp_path):
    with pytest.raises(RepoUnreadable):
        stream_commits(tmp_path / "missing", "main")


def test_filter_bots():
    commits = [
        make_commit("dependabot[bot]"),
        make_commit("GitHub Actions"),
        make_commit("alice"),
        make_commit("BIGithub Person"),  # substring match, case-insensitive
        make_commit("Alice [BOT] Smith"),
    ]
    kept = filter_bots(commits)
    assert [c.author_name for c in kept] == ["alice"]


def test_filter_bots_idempotent():
    commits = [make_commit("alice"), make_commit("bot-like but fine")]
    once = filter_bots(commits)
    assert filter_bots(once) == once


def test_filter_outliers_degenerate():
    commits = [make_commit(files=4, sha=f"{i:040x}") for i in range(6)]
    kept, threshold = filter_outliers(commits)
    assert len(kept) == 6
    assert threshold.iqr == 0.0
    assert threshold.cutoff == 4.0


def test_filter_outliers_derived_case():
    counts = [1, 1, 2, 2, 3, 3, 3, 4, 4, 200]
    commits = [make_commit(files=c, sha=f"{i:040x}") for i, c in enumerate(counts)]
    kept, threshold = filter_outliers(commits)
    q3, iqr = q3_iqr_oracle([float(c) for c in counts])
    assert threshold.q3 == pytest.approx(q3)
    assert threshold.iqr == pytest.approx(iqr)
    assert threshold.cutoff == pytest.approx(q3 + 1.5 * iqr)
    assert [c.files_changed_count for c in kept] == counts[:-1]


def test_filter_outliers_single_commit():
    kept, threshold = filter_outliers([make_commit(files=7)])
    assert len(kept) == 1
    assert threshold.cutoff == 7.0


def test_filter_outliers_empty_raises():
    with pytest.raises(EmptyInput):
        filter_outliers([])


def test_filter_outliers_idempotent_and_safe_below_q3():
    rng = random.Random(5)
    for _ in range(50):
        counts = [rng.randint(1, 30) for _ in range(rng.randint(1, 40))]
        commits = [make_commit(files=c, sha=f"{i:040x}") for i, c in enumerate(counts)]
        kept, threshold = filter_outliers(commits)
        for c in commits:
            if c.files_changed_count <= threshold.q3:
                assert c in kept  # never drops anything at or below Q3
        again, _ = filter_outliers(kept)
        assert again == kept


def test_added_lines_identical_texts():
    assert added_lines("a\nb", "a\nb") == []


def test_added_lines_single_insertion():
    result = added_lines("a\nb", "a\nX\nb")
    assert [(l.line_number, l.text) for l in result] == [(2, "X")]


def test_added_lines_modification_reported_as_insert():
    result = added_lines("a\nb\nc", "a\nB\nc\nd")
    assert [(l.line_number, l.text) for l in result] == [(2, "B"), (4, "d")]


def test_added_lines_from_empty_parent():
    result = added_lines("", "x\ny\nz")
    assert [(l.line_number, l.text) for l in result] == [(1, "x"), (2, "y"), (3, "z")]


def test_added_lines_positions_match_child_fuzz():
    rng = random.Random(17)
    for _ in range(200):
        parent = [rng.choice("abcde") for _ in range(rng.randint(0, 12))]
        child = [rng.choice("abcde") for _ in range(rng.randint(0, 12))]
        parent_text = "\n".join(parent)
        child_text = "\n".join(child)
        result = added_lines(parent_text, child_text)
        child_lines = child_text.split("\n") if child_text else []
        for line in result:
            assert child_lines[line.line_number - 1] == line.text
        assert added_lines(parent_text, parent_text) == []

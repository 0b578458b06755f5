"""Commit streaming and commit-level filters.

Commits come from the first-parent chain of a branch in an on-disk
clone, oldest first, with change stats taken against the first parent
(the root commit is diffed against the empty tree). Line-level change
attribution uses a minimal Myers diff and reports only inserted lines.
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BranchMissing, EmptyInput, RepoUnreadable
from .javamethods import AddedLine

_LOG_HEADER = "\x01"
_FIELD_SEP = "\x00"


@dataclass(frozen=True, slots=True)
class CommitRecord:
    repo_id: str
    sha: str
    author_name: str
    author_email: str
    timestamp: int  # UTC seconds
    first_parent_sha: str | None
    changed_java_files: tuple[str, ...]
    files_changed_count: int
    java_added_lines: int  # numstat additions summed over changed .java files

    def to_record(self) -> dict:
        return {
            "repo": self.repo_id,
            "sha": self.sha,
            "author_name": self.author_name,
            "author_email": self.author_email,
            "ts": self.timestamp,
            "parent": self.first_parent_sha,
            "java_files": list(self.changed_java_files),
            "files_changed": self.files_changed_count,
            "java_added": self.java_added_lines,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CommitRecord":
        return cls(
            repo_id=rec["repo"],
            sha=rec["sha"],
            author_name=rec["author_name"],
            author_email=rec["author_email"],
            timestamp=rec["ts"],
            first_parent_sha=rec["parent"],
            changed_java_files=tuple(rec["java_files"]),
            files_changed_count=rec["files_changed"],
            java_added_lines=rec["java_added"],
        )


@dataclass(frozen=True, slots=True)
class OutlierThreshold:
    q3: float
    iqr: float
    cutoff: float  # q3 + 1.5 * iqr


def _run_git(repo_path: str | Path, *args: str) -> str:
    result = subprocess.run(
        ["git", "-C", str(repo_path), *args],
        capture_output=True,
        text=True,
        encoding="utf-8",
        errors="replace",
    )
    if result.returncode != 0:
        raise RuntimeError(f"git {args[0]} failed: {result.stderr.strip()}")
    return result.stdout


def stream_commits(repo_path: str | Path, branch: str, repo_id: str | None = None) -> list[CommitRecord]:
    """First-parent chain of ``branch``, oldest first, with diff stats."""
    path = Path(repo_path)
    if repo_id is None:
        repo_id = path.name
    try:
        _run_git(path, "rev-parse", "--git-dir")
    except (RuntimeError, OSError) as exc:
        raise RepoUnreadable(f"{path}: {exc}") from exc

    probe = subprocess.run(
        ["git", "-C", str(path), "rev-parse", "--verify", "--quiet", f"refs/heads/{branch}"],
        capture_output=True,
        text=True,
    )
    if probe.returncode != 0:
        heads = _run_git(path, "for-each-ref", "refs/heads")
        if not heads.strip():
            return []  # repository without commits
        raise BranchMissing(f"branch {branch!r} not found in {path}")

    out = _run_git(
        path,
        "log",
        "--first-parent",
        "--reverse",
        "--diff-merges=first-parent",
        "--no-renames",  # keeps numstat paths literal
        "--numstat",
        # %x01/%x00 expand inside git, keeping NUL out of the argv
        "--format=%x01%H%x00%an%x00%ae%x00%at%x00%P",
        branch,
    )

    commits: list[CommitRecord] = []
    header: list[str] | None = None
    files: list[tuple[str, int]] = []
    total = 0

    def flush() -> None:
        nonlocal header, files, total
        if header is None:
            return
        sha, name, email, ts, parents = header
        first_parent = parents.split()[0] if parents.strip() else None
        java = [(p, a) for p, a in files if p.endswith(".java")]
        commits.append(CommitRecord(
            repo_id=repo_id,
            sha=sha,
            author_name=name,
            author_email=email,
            timestamp=int(ts),
            first_parent_sha=first_parent,
            changed_java_files=tuple(p for p, _ in java),
            files_changed_count=total,
            java_added_lines=sum(a for _, a in java),
        ))
        header = None
        files = []
        total = 0

    for line in out.split("\n"):
        if line.startswith(_LOG_HEADER):
            flush()
            header = line[1:].split(_FIELD_SEP)
        elif line.strip():
            parts = line.split("\t")
            if len(parts) >= 3:
                added = 0 if parts[0] == "-" else int(parts[0])
                files.append((parts[2], added))
                total += 1
    flush()
    return commits


def read_blob(repo_path: str | Path, sha: str, file: str) -> str | None:
    """File content at a commit; None for missing or undecodable blobs."""
    result = subprocess.run(
        ["git", "-C", str(repo_path), "show", f"{sha}:{file}"],
        capture_output=True,
    )
    if result.returncode != 0:
        return None
    try:
        return result.stdout.decode("utf-8")
    except UnicodeDecodeError:
        return None


def filter_bots(commits: list[CommitRecord]) -> list[CommitRecord]:
    """Drop commits whose author name looks automated; order preserved."""
    kept = []
    for c in commits:
        name = c.author_name.lower()
        if "[bot]" in name or "github" in name:
            continue
        kept.append(c)
    return kept


def filter_outliers(commits: list[CommitRecord]) -> tuple[list[CommitRecord], OutlierThreshold]:
    """Drop commits touching more than Q3 + 1.5*IQR files.

    Quartiles use linear interpolation between order statistics.
    """
    if not commits:
        raise EmptyInput("no commits to filter")
    counts = np.array([c.files_changed_count for c in commits], dtype=float)
    q1, q3 = np.quantile(counts, [0.25, 0.75])
    iqr = float(q3 - q1)
    threshold = OutlierThreshold(q3=float(q3), iqr=iqr, cutoff=float(q3) + 1.5 * iqr)
    kept = [c for c in commits if c.files_changed_count <= threshold.cutoff]
    return kept, threshold


def added_lines(parent_text: str, child_text: str, file: str = "") -> list[AddedLine]:
    """Lines classified as insertions by a minimal line diff.

    Modified lines surface as delete+insert; only the insert side is
    reported. Line numbers refer to the child version.
    """
    a = parent_text.split("\n")
    b = child_text.split("\n")
    if a and a[-1] == "":
        a.pop()
    if b and b[-1] == "":
        b.pop()
    return [
        AddedLine(file=file, line_number=j + 1, text=b[j])
        for j in _myers_inserted(a, b)
    ]


def _myers_inserted(a: list[str], b: list[str]) -> list[int]:
    """0-based indices of b-lines inserted by the shortest edit script."""
    n, m = len(a), len(b)
    if m == 0:
        return []
    if n == 0:
        return list(range(m))

    v: dict[int, int] = {1: 0}
    trace: list[dict[int, int]] = []
    found = False
    for d in range(n + m + 1):
        trace.append(dict(v))
        for k in range(-d, d + 1, 2):
            if k == -d or (k != d and v.get(k - 1, 0) < v.get(k + 1, 0)):
                x = v.get(k + 1, 0)
            else:
                x = v.get(k - 1, 0) + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            v[k] = x
            if x >= n and y >= m:
                found = True
                break
        if found:
            break

    inserted: list[int] = []
    x, y = n, m
    for d in range(len(trace) - 1, -1, -1):
        vd = trace[d]
        k = x - y
        if k == -d or (k != d and vd.get(k - 1, 0) < vd.get(k + 1, 0)):
            prev_k = k + 1
        else:
            prev_k = k - 1
        prev_x = vd.get(prev_k, 0)
        prev_y = prev_x - prev_k
        while x > prev_x and y > prev_y:  # diagonal: matching lines
            x -= 1
            y -= 1
        if d > 0:
            if x == prev_x:  # vertical step: insertion of b[prev_y]
                inserted.append(prev_y)
            x, y = prev_x, prev_y
    inserted.reverse()
    return inserted

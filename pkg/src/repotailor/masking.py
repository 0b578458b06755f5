"""Build fill-in-the-middle completion instances from changed methods.

Added lines are grouped into isolated lines and blocks of at most three
counted lines (empty and single-token lines ride along for free), then
the last n lexical tokens of each segment are replaced by a sentinel,
with n drawn uniformly from [3, min(50, N-1)] for a segment of N
tokens. Generic (non-change-based) instances reuse the same surgery
with n drawn from a log-normal fitted to a target length distribution.
"""

from __future__ import annotations

import hashlib
import math
import random
from collections import Counter
from dataclasses import dataclass

from .javamethods import MethodUnit

SENTINEL = "<FILL_ME>"

ISOLATED_LINE = "isolated-line"
BLOCK = "block"

MIN_MASK_TOKENS = 3
MAX_MASK_TOKENS = 50

MAX_GENERIC_PER_METHOD = 3
_GENERIC_ATTEMPTS = 12


@dataclass(frozen=True, slots=True)
class MaskSegment:
    line_numbers: tuple[int, ...]
    counted_line_count: int
    kind: str


@dataclass(frozen=True, slots=True)
class Provenance:
    repo_id: str = ""
    commit_sha: str = ""
    author_id: str = ""
    timestamp: int = 0
    file: str = ""


@dataclass(frozen=True, slots=True)
class CompletionInstance:
    instance_id: str
    context: str
    target: str
    n: int
    N: int
    kind: str
    repo_id: str
    commit_sha: str
    author_id: str
    timestamp: int
    file: str
    signature: str

    def to_record(self) -> dict:
        return {
            "id": self.instance_id,
            "context": self.context,
            "target": self.target,
            "n": self.n,
            "N": self.N,
            "kind": self.kind,
            "repo": self.repo_id,
            "sha": self.commit_sha,
            "author": self.author_id,
            "ts": self.timestamp,
            "file": self.file,
            "signature": self.signature,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CompletionInstance":
        return cls(
            instance_id=rec["id"],
            context=rec["context"],
            target=rec["target"],
            n=rec["n"],
            N=rec["N"],
            kind=rec["kind"],
            repo_id=rec["repo"],
            commit_sha=rec["sha"],
            author_id=rec["author"],
            timestamp=rec["ts"],
            file=rec["file"],
            signature=rec["signature"],
        )


@dataclass(frozen=True, slots=True)
class MaskLengthDistribution:
    mean: float
    median: float
    min: int = MIN_MASK_TOKENS
    max: int = MAX_MASK_TOKENS

    def __post_init__(self) -> None:
        if not self.min <= self.median <= self.max:
            raise ValueError("median must lie within [min, max]")

    @classmethod
    def from_samples(cls, samples: list[int]) -> "MaskLengthDistribution":
        if not samples:
            raise ValueError("no samples")
        ordered = sorted(samples)
        mid = len(ordered) // 2
        if len(ordered) % 2:
            median = float(ordered[mid])
        else:
            median = (ordered[mid - 1] + ordered[mid]) / 2.0
        return cls(
            mean=sum(ordered) / len(ordered),
            median=median,
            min=ordered[0],
            max=ordered[-1],
        )


# length targets measured on merged developer change histories
APACHE_MASK_DISTRIBUTION = MaskLengthDistribution(mean=11.0, median=8.0, min=3, max=50)
SPRING_MASK_DISTRIBUTION = MaskLengthDistribution(mean=13.0, median=10.0, min=3, max=50)


def _line_token_counts(method: MethodUnit) -> Counter:
    return Counter(t.line for t in method.tokens)


def segment(added: list[int], method: MethodUnit) -> list[MaskSegment]:
    """Group sorted added line numbers into maskable segments.

    Maximal runs of contiguous lines become blocks split greedily
    left-to-right so that at most three counted lines (non-empty, at
    least two tokens) fall in each; a lone line is an isolated-line
    segment.
    """
    counts = _line_token_counts(method)

    def is_counted(line: int) -> bool:
        return counts.get(line, 0) >= 2

    runs: list[list[int]] = []
    for line in added:
        if runs and line == runs[-1][-1] + 1:
            runs[-1].append(line)
        else:
            runs.append([line])

    segments: list[MaskSegment] = []
    for run in runs:
        if len(run) == 1:
            line = run[0]
            segments.append(MaskSegment((line,), 1 if is_counted(line) else 0, ISOLATED_LINE))
            continue
        cur: list[int] = []
        counted = 0
        for line in run:
            if is_counted(line):
                if counted == 3:
                    segments.append(MaskSegment(tuple(cur), counted, BLOCK))
                    cur = []
                    counted = 0
                cur.append(line)
                counted += 1
            else:
                cur.append(line)
        if cur:
            segments.append(MaskSegment(tuple(cur), counted, BLOCK))
    return segments


def _text_offset(method: MethodUnit, line: int, col: int) -> int:
    lines = method.text.split("\n")
    rel = line - method.start_line
    return sum(len(lines[i]) + 1 for i in range(rel)) + col


def _instance_id(context: str, target: str, provenance: Provenance, signature: str) -> str:
    h = hashlib.sha256()
    for part in (
        context,
        target,
        provenance.repo_id,
        provenance.commit_sha,
        provenance.author_id,
        str(provenance.timestamp),
        provenance.file,
        signature,
    ):
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:20]


def _mask_last_tokens(
    method: MethodUnit,
    segment_tokens: list,
    n: int,
    kind: str,
    provenance: Provenance,
) -> CompletionInstance | None:
    if SENTINEL in method.text:  # cannot place an unambiguous sentinel
        return None
    masked = segment_tokens[-n:]
    start = _text_offset(method, masked[0].line, masked[0].col)
    last = masked[-1]
    end = _text_offset(method, last.line, last.col) + len(last.text)
    target = method.text[start:end]
    context = method.text[:start] + SENTINEL + method.text[end:]
    return CompletionInstance(
        instance_id=_instance_id(context, target, provenance, method.signature),
        context=context,
        target=target,
        n=n,
        N=len(segment_tokens),
        kind=kind,
        repo_id=provenance.repo_id,
        commit_sha=provenance.commit_sha,
        author_id=provenance.author_id,
        timestamp=provenance.timestamp,
        file=provenance.file,
        signature=method.signature,
    )


def mask(
    seg: MaskSegment,
    method: MethodUnit,
    rng: random.Random,
    provenance: Provenance = Provenance(),
) -> CompletionInstance | None:
    """Mask the last n tokens of a segment; None when no legal n exists."""
    lines = set(seg.line_numbers)
    toks = [t for t in method.tokens if t.line in lines]
    big_n = len(toks)
    if big_n <= MIN_MASK_TOKENS:
        return None
    n = rng.randint(MIN_MASK_TOKENS, min(MAX_MASK_TOKENS, big_n - 1))
    return _mask_last_tokens(method, toks, n, seg.kind, provenance)


def fit_log_normal(dist: MaskLengthDistribution) -> tuple[float, float]:
    """Parameters (mu, sigma) of a log-normal with the target median/mean."""
    if dist.median <= 0:
        raise ValueError("median must be positive")
    mu = math.log(dist.median)
    ratio = dist.mean / dist.median
    sigma = math.sqrt(2.0 * math.log(ratio)) if ratio > 1.0 else 0.0
    return mu, sigma


def draw_mask_length(dist: MaskLengthDistribution, upper: int, rng: random.Random) -> int | None:
    """One clipped draw from the fitted length distribution, or None."""
    lo = max(MIN_MASK_TOKENS, dist.min)
    hi = min(MAX_MASK_TOKENS, dist.max, upper)
    if hi < lo:
        return None
    mu, sigma = fit_log_normal(dist)
    value = dist.median if sigma == 0.0 else rng.lognormvariate(mu, sigma)
    return min(hi, max(lo, round(value)))


def generate_generic(
    method: MethodUnit,
    dist: MaskLengthDistribution,
    rng: random.Random,
    provenance: Provenance = Provenance(),
    max_instances: int = MAX_GENERIC_PER_METHOD,
) -> list[CompletionInstance]:
    """Mask up to three line/block end-spans of a method.

    Mask lengths follow a log-normal fitted to ``dist`` so a corpus of
    generated instances mirrors the target mean and median; spans that
    collide are deduplicated.
    """
    open_idx = next((i for i, t in enumerate(method.tokens) if t.text == "{"), None)
    if open_idx is None:
        return []
    body_counts = Counter(t.line for t in method.tokens[open_idx + 1 : -1])
    start_lines = sorted(line for line, c in body_counts.items() if c >= 2)
    if not start_lines:
        return []
    out: dict[tuple[int, ...], CompletionInstance] = {}
    # first prefer spans wide enough to carry the target median, then
    # fall back to any maskable span so short methods still contribute
    for floor in (dist.median, 0.0):
        for _ in range(_GENERIC_ATTEMPTS):
            if len(out) >= max_instances:
                break
            start = rng.choice(start_lines)
            window = set(range(start, start + 3))
            toks = [t for t in method.tokens if t.line in window]
            big_n = len(toks)
            if big_n <= MIN_MASK_TOKENS or big_n - 1 < floor:
                continue
            span = tuple(sorted({t.line for t in toks}))
            if span in out:  # same line/block already masked
                continue
            n = draw_mask_length(dist, big_n - 1, rng)
            if n is None:
                continue
            kind = ISOLATED_LINE if len(span) == 1 else BLOCK
            instance = _mask_last_tokens(method, toks, n, kind, provenance)
            if instance is not None:
                out[span] = instance
        if out:
            break
    return list(out.values())

"""Independent reference implementations used only to check the
production code. Deliberately brute-force: positional n-gram scans,
explicit subset-sum enumeration, direct binomial tail sums.
"""

from __future__ import annotations

import math
import statistics

import numpy as np


def bleu_oracle(candidate: list[str], reference: list[str], max_order: int = 4) -> float:
    """Sentence BLEU by positional scanning (no Counter clipping)."""
    if not candidate:
        return 0.0
    logs = []
    for order in range(1, max_order + 1):
        ref_ngrams = [tuple(reference[i : i + order]) for i in range(len(reference) - order + 1)]
        if not ref_ngrams:
            continue
        cand_ngrams = [tuple(candidate[i : i + order]) for i in range(len(candidate) - order + 1)]
        remaining = list(ref_ngrams)
        matched = 0
        for gram in cand_ngrams:
            if gram in remaining:
                matched += 1
                remaining.remove(gram)
        precision = matched / len(cand_ngrams) if cand_ngrams else 0.0
        if precision <= 0.0:
            precision = 1e-9
        logs.append(math.log(precision))
    if not logs:
        return 0.0
    geo_mean = math.exp(sum(logs) / len(logs))
    c, r = len(candidate), len(reference)
    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return brevity * geo_mean


def binomial_two_sided_oracle(k: int, n: int) -> float:
    """Doubled smaller tail of Bin(n, 1/2) via direct pmf sums."""
    pmf = [math.comb(n, i) / 2.0**n for i in range(n + 1)]
    lower = sum(pmf[: k + 1])
    upper = sum(pmf[k:])
    return min(1.0, 2.0 * min(lower, upper))


def wilcoxon_enumeration_oracle(a: list[float], b: list[float]) -> float:
    """Two-sided signed-rank p by enumerating all sign assignments.

    Subset sums are enumerated explicitly (meet-in-the-middle for
    feasibility up to ~30 pairs); ties get midranks.
    """
    diffs = [x - y for x, y in zip(a, b) if x != y]
    if not diffs:
        return 1.0
    magnitudes = [abs(d) for d in diffs]
    order = sorted(range(len(magnitudes)), key=lambda i: magnitudes[i])
    ranks = [0.0] * len(magnitudes)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and magnitudes[order[j + 1]] == magnitudes[order[i]]:
            j += 1
        for idx in order[i : j + 1]:
            ranks[idx] = (i + j) / 2.0 + 1.0
        i = j + 1

    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    total = sum(ranks)
    center = total / 2.0
    deviation = abs(w_plus - center) - 1e-9

    def all_sums(values: list[float]) -> np.ndarray:
        sums = np.zeros(1)
        for v in values:
            sums = np.concatenate([sums, sums + v])
        return sums

    half = len(ranks) // 2
    left = all_sums(ranks[:half])
    right = np.sort(all_sums(ranks[half:]))
    hits = 0
    for value in left:
        lo = center - deviation - value  # right <= lo  -> |sum-center| >= dev
        hi = center + deviation - value  # right >= hi
        hits += np.searchsorted(right, lo, side="right")
        hits += len(right) - np.searchsorted(right, hi, side="left")
    return min(1.0, hits / 2.0 ** len(ranks))


def cliffs_delta_oracle(a: list[float], b: list[float]) -> float:
    score = 0
    for x, y in zip(a, b):
        if x > y:
            score += 1
        elif x < y:
            score -= 1
    return score / len(a)


def q3_iqr_oracle(values: list[float]) -> tuple[float, float]:
    """Quartiles by the inclusive (linear interpolation) rule."""
    if len(values) == 1:
        return values[0], 0.0
    q1, _, q3 = statistics.quantiles(values, n=4, method="inclusive")
    return q3, q3 - q1

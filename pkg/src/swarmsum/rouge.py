"""Exact ROUGE-1 / ROUGE-2 / ROUGE-L scoring over whitespace tokens."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass


@dataclass
class RougeScore:
    precision: float
    recall: float
    f1: float


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def ngram_counts(tokens: list[str], n: int) -> Counter:
    """Multiset of contiguous n-grams; empty when the sequence is shorter than n."""
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: list[str], reference: list[str], n: int) -> RougeScore:
    """Clipped n-gram overlap; zero-denominator sides score 0."""
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    overlap = sum(min(cand[g], ref[g]) for g in cand.keys() & ref.keys())
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    p = overlap / cand_total if cand_total else 0.0
    r = overlap / ref_total if ref_total else 0.0
    return RougeScore(p, r, _f1(p, r))


def lcs_length(a: list[str], b: list[str]) -> int:
    """Longest common (non-contiguous) subsequence length, O(len(a)*len(b))."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            curr[j] = prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> RougeScore:
    """Subsequence-based score over whole summaries; empty inputs score 0."""
    length = lcs_length(candidate, reference)
    p = length / len(candidate) if candidate else 0.0
    r = length / len(reference) if reference else 0.0
    return RougeScore(p, r, _f1(p, r))


def score_pair(candidate: str, reference: str) -> dict[str, RougeScore]:
    """All three metrics for one candidate/reference pair of cleaned text."""
    c, r = candidate.split(), reference.split()
    return {"rouge1": rouge_n(c, r, 1), "rouge2": rouge_n(c, r, 2), "rougeL": rouge_l(c, r)}

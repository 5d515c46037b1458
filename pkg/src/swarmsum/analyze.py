"""Corpus statistics: token-length histograms and word-frequency tables."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .corpus import Document
from .errors import EmptyCorpusError, UncleanedDocumentError


@dataclass
class Histogram:
    bin_width: int
    bins: list[tuple[int, int]]  # (lower_bound, count), contiguous


@dataclass
class FrequencyTable:
    entries: list[tuple[str, int]]  # sorted by count desc, then token asc


def _clean_field(doc: Document, which: str) -> str:
    text = doc.article_clean if which == "article" else doc.summary_clean
    if text is None:
        raise UncleanedDocumentError(doc.id)
    return text


def length_histogram(docs: list[Document], field: str, bin_width: int) -> Histogram:
    """Histogram of whitespace-token lengths of the chosen clean field.

    Bins are contiguous from the first to the last occupied bin; empty
    bins in between get zero counts.
    """
    if not docs:
        raise EmptyCorpusError("no documents")
    lengths = [len(_clean_field(d, field).split()) for d in docs]
    lowers = [(n // bin_width) * bin_width for n in lengths]
    counts = Counter(lowers)
    lo, hi = min(lowers), max(lowers)
    bins = [(b, counts.get(b, 0)) for b in range(lo, hi + bin_width, bin_width)]
    return Histogram(bin_width=bin_width, bins=bins)


def word_frequencies(docs: list[Document], field: str, top_k: int) -> FrequencyTable:
    """Top-k whitespace tokens of the chosen clean field; ties break lexicographically."""
    if not docs:
        raise EmptyCorpusError("no documents")
    counts = Counter()
    for d in docs:
        counts.update(_clean_field(d, field).split())
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return FrequencyTable(entries=ordered[:top_k])


def write_histogram_csv(hist: Histogram, path) -> None:
    lines = ["lower_bound,count"] + [f"{lo},{n}" for lo, n in hist.bins]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_frequency_csv(table: FrequencyTable, path) -> None:
    lines = ["token,count"] + [f"{tok},{n}" for tok, n in table.entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

"""Story-file ingestion, text cleaning and train/validation/test splitting.

Input stories are plain UTF-8 files: article text, then zero or more
``@highlight`` marker lines, each followed by one highlight sentence.
Cleaning expands contractions, strips channel branding and noise symbols,
collapses whitespace and lowercases.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import (
    BadFractionsError,
    EmptyArticleError,
    IoFailureError,
    MalformedStoryError,
    NoDocumentsError,
)
from .numcore import RngStream

log = logging.getLogger(__name__)

CONTRACTIONS_VERSION = 1

# Fixed, versioned expansion table.  Matching is case-insensitive on word
# boundaries; replacements are the lowercase expansions below.
CONTRACTIONS = {
    "can't": "cannot",
    "don't": "do not",
    "won't": "will not",
    "i've": "i have",
    "they've": "they have",
    "we've": "we have",
    "you've": "you have",
    "it's": "it is",
    "he's": "he is",
    "she's": "she is",
    "that's": "that is",
    "what's": "what is",
    "there's": "there is",
    "i'm": "i am",
    "isn't": "is not",
    "aren't": "are not",
    "wasn't": "was not",
    "weren't": "were not",
    "didn't": "did not",
    "doesn't": "does not",
    "couldn't": "could not",
    "wouldn't": "would not",
    "shouldn't": "should not",
    "hasn't": "has not",
    "haven't": "have not",
    "you're": "you are",
    "we're": "we are",
    "they're": "they are",
    "i'll": "i will",
    "you'll": "you will",
    "we'll": "we will",
    "let's": "let us",
}

REMOVE_CHARS = "$%^&*#"

_CONTRACTION_RE = re.compile(
    r"\b(" + "|".join(re.escape(k) for k in sorted(CONTRACTIONS, key=len, reverse=True)) + r")\b",
    re.IGNORECASE,
)
_REMOVE_RE = re.compile("[" + re.escape(REMOVE_CHARS) + "]")
_WS_RE = re.compile(r"\s+")

HIGHLIGHT_MARKER = "@highlight"
SUMMARY_MARKER = "@summary"
HIGHLIGHT_JOIN = " . "


@dataclass
class Document:
    """One article/summary pair; clean fields stay None until cleaned."""

    id: str
    article_raw: str
    summary_raw: str
    article_clean: str | None = None
    summary_clean: str | None = None


@dataclass
class CorpusSplits:
    train: list[Document]
    validation: list[Document]
    test: list[Document]
    split_seed: int = 0

    def all_documents(self) -> list[Document]:
        return self.train + self.validation + self.test


def parse_story(raw: str, doc_id: str = "") -> Document:
    """Split a story body into article text and joined highlight sentences."""
    lines = raw.split("\n")
    marker_idx = [i for i, ln in enumerate(lines) if ln.strip() == HIGHLIGHT_MARKER]
    if not marker_idx:
        article = raw.strip()
        if not article:
            raise EmptyArticleError(doc_id or "<story>")
        return Document(id=doc_id, article_raw=article, summary_raw="")

    article = "\n".join(lines[: marker_idx[0]]).strip()
    if not article:
        raise EmptyArticleError(doc_id or "<story>")

    highlights = []
    for n, i in enumerate(marker_idx):
        end = marker_idx[n + 1] if n + 1 < len(marker_idx) else len(lines)
        block = [ln.strip() for ln in lines[i + 1 : end] if ln.strip()]
        if not block:
            raise MalformedStoryError(f"{doc_id or '<story>'}: marker without sentence")
        highlights.append(" ".join(block))
    return Document(id=doc_id, article_raw=article, summary_raw=HIGHLIGHT_JOIN.join(highlights))


def expand_contractions(text: str) -> str:
    return _CONTRACTION_RE.sub(lambda m: CONTRACTIONS[m.group(0).lower()], text)


def strip_artifacts(text: str) -> str:
    """Drop '(CNN)' branding and the noise symbols, normalize whitespace."""
    text = text.replace("(CNN)", "")
    text = _REMOVE_RE.sub("", text)
    return _WS_RE.sub(" ", text).strip()


def _clean_text(text: str) -> str:
    return strip_artifacts(expand_contractions(text)).lower()


def clean_document(doc: Document) -> Document:
    if not doc.article_raw:
        raise EmptyArticleError(doc.id)
    return replace(
        doc,
        article_clean=_clean_text(doc.article_raw),
        summary_clean=_clean_text(doc.summary_raw),
    )


def split_sizes(count: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    """Cumulative-rounding partition; each part is within 1 of count*fraction."""
    b1 = round(count * fractions[0])
    b2 = round(count * (fractions[0] + fractions[1]))
    return b1, b2 - b1, count - b2


def load_corpus(
    root,
    fractions: tuple[float, float, float] = (0.92, 0.04, 0.04),
    seed: int = 0,
) -> CorpusSplits:
    """Parse and clean every story under root, shuffle by seed, partition.

    Files are read in lexicographic name order, so the (deterministic)
    shuffle is a pure function of the seed.  Malformed files are skipped
    with a warning.
    """
    if any(not 0.0 <= f <= 1.0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise BadFractionsError(f"fractions {fractions} must lie in [0,1] and sum to 1")
    root = Path(root)
    if not root.is_dir():
        raise IoFailureError(f"not a directory: {root}")

    docs: list[Document] = []
    skipped = 0
    for path in sorted(p for p in root.iterdir() if p.is_file()):
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailureError(str(exc)) from exc
        try:
            docs.append(clean_document(parse_story(raw, doc_id=path.stem)))
        except (MalformedStoryError, EmptyArticleError) as exc:
            skipped += 1
            log.warning("skipping %s: %s", path.name, exc)
    if not docs:
        raise NoDocumentsError(f"no parseable story files under {root}")
    if skipped:
        log.warning("skipped %d malformed files under %s", skipped, root)

    order = RngStream(seed, stream_id=0).permutation(len(docs))
    shuffled = [docs[i] for i in order]
    n_train, n_val, _ = split_sizes(len(docs), fractions)
    return CorpusSplits(
        train=shuffled[:n_train],
        validation=shuffled[n_train : n_train + n_val],
        test=shuffled[n_train + n_val :],
        split_seed=seed,
    )


def write_clean_corpus(docs: list[Document], out_dir) -> None:
    """One UTF-8 file per document: cleaned article, '@summary' line, cleaned summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        if doc.article_clean is None:
            raise EmptyArticleError(f"{doc.id}: document not cleaned")
        text = f"{doc.article_clean}\n{SUMMARY_MARKER}\n{doc.summary_clean}\n"
        (out_dir / f"{doc.id}.txt").write_text(text, encoding="utf-8")


def read_clean_corpus(path) -> list[Document]:
    """Read documents written by write_clean_corpus, sorted by id.

    Accepts a directory of cleaned files or a single cleaned file.
    """
    path = Path(path)
    if path.is_file():
        files = [path]
    elif path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file())
    else:
        raise IoFailureError(f"no such corpus path: {path}")
    docs = []
    for f in files:
        body = f.read_text(encoding="utf-8")
        article, _, summary = body.partition(f"\n{SUMMARY_MARKER}\n")
        docs.append(
            Document(
                id=f.stem,
                article_raw=article.strip(),
                summary_raw=summary.strip(),
                article_clean=article.strip(),
                summary_clean=summary.strip(),
            )
        )
    if not docs:
        raise NoDocumentsError(f"no documents under {path}")
    return docs

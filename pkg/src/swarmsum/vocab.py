"""Vocabulary building, entity tagging, id encoding and embedding loading.

Reserved ids are fixed: <pad>=0, <unk>=1, <s>=2, </s>=3.  Padding must be 0
because encoded sequences are padded with zeros.  Rare tokens (count below
min_count) are left out of the vocabulary and encode to the unk id.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Document
from .errors import (
    DimMismatchError,
    EmptyCorpusError,
    IoFailureError,
    UnknownIdError,
    ZeroMaxlenError,
)
from .numcore import RngStream

PAD, UNK, START, END = "<pad>", "<unk>", "<s>", "</s>"
RESERVED = (PAD, UNK, START, END)
PAD_ID, UNK_ID, START_ID, END_ID = 0, 1, 2, 3


@dataclass
class Vocabulary:
    token_to_id: dict[str, int]
    id_to_token: list[str]
    counts: dict[str, int]

    def __len__(self) -> int:
        return len(self.id_to_token)

    def id_of(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token_of(self, idx: int) -> str:
        if not 0 <= idx < len(self.id_to_token):
            raise UnknownIdError(f"id {idx} outside vocabulary of {len(self)}")
        return self.id_to_token[idx]


@dataclass
class TokenIds:
    """Fixed-capacity id sequence; positions >= true_length are pad."""

    ids: np.ndarray
    true_length: int

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)

    @property
    def capacity(self) -> int:
        return self.ids.size


@dataclass
class EmbeddingMatrix:
    values: np.ndarray  # |vocab| x dim
    dim: int
    frozen: bool = True

    @property
    def rows(self) -> int:
        return self.values.shape[0]


@dataclass
class Gazetteer:
    """Lowercase multi-word phrases mapped to entity class labels."""

    entries: dict[str, str] = field(default_factory=dict)

    def phrase_tuples(self) -> dict[tuple[str, ...], str]:
        return {tuple(k.split()): v for k, v in self.entries.items()}


def build_vocabulary(docs: list[Document], min_count: int = 2) -> Vocabulary:
    """Count tokens over cleaned article+summary text; keep those >= min_count.

    Ids are assigned after the reserved block in descending count then
    lexicographic order, so the mapping is deterministic.
    """
    if not docs:
        raise EmptyCorpusError("no documents")
    counts = Counter()
    for d in docs:
        if d.article_clean is None:
            raise EmptyCorpusError(f"{d.id}: document not cleaned")
        counts.update(d.article_clean.split())
        counts.update((d.summary_clean or "").split())
    kept = [(tok, n) for tok, n in counts.items() if n >= min_count]
    kept.sort(key=lambda kv: (-kv[1], kv[0]))
    id_to_token = list(RESERVED) + [tok for tok, _ in kept]
    return Vocabulary(
        token_to_id={tok: i for i, tok in enumerate(id_to_token)},
        id_to_token=id_to_token,
        counts=dict(kept),
    )


def tag_entities(tokens: list[str], gaz: Gazetteer) -> list[str]:
    """Replace leftmost-longest gazetteer matches by single <ent:CLASS> tokens."""
    phrases = gaz.phrase_tuples()
    if not phrases:
        return list(tokens)
    max_len = max(len(p) for p in phrases)
    out = []
    i = 0
    while i < len(tokens):
        match = None
        for span in range(min(max_len, len(tokens) - i), 0, -1):
            cand = tuple(tokens[i : i + span])
            if cand in phrases:
                match = (span, phrases[cand])
                break
        if match:
            span, label = match
            out.append(f"<ent:{label}>")
            i += span
        else:
            out.append(tokens[i])
            i += 1
    return out


def encode(tokens: list[str], vocab: Vocabulary, maxlen: int, add_markers: bool = False) -> TokenIds:
    """Map tokens to ids with unk fallback, then truncate/pad to maxlen.

    With markers on, the start id is prepended and the end id appended first;
    if the marked sequence overflows maxlen it is cut to maxlen-1 ids and the
    end id is kept as the final position.
    """
    if maxlen < 1:
        raise ZeroMaxlenError(f"maxlen {maxlen}")
    ids = [vocab.id_of(t) for t in tokens]
    if add_markers:
        ids = [START_ID] + ids + [END_ID]
        if len(ids) > maxlen:
            ids = ids[: maxlen - 1] + [END_ID]
    else:
        ids = ids[:maxlen]
    true_length = len(ids)
    ids = ids + [PAD_ID] * (maxlen - true_length)
    return TokenIds(ids=np.array(ids, dtype=np.int64), true_length=true_length)


def decode_ids(ids: TokenIds, vocab: Vocabulary) -> list[str]:
    """Ids back to tokens, dropping pad/start/end markers."""
    out = []
    for i in ids.ids[: ids.true_length]:
        if i in (PAD_ID, START_ID, END_ID):
            continue
        out.append(vocab.token_of(int(i)))
    return out


def _seeded_row(seed: int, token_id: int, dim: int, scale: float) -> np.ndarray:
    return RngStream(seed, stream_id=token_id).uniform(-scale, scale, dim)


def load_embeddings(path, vocab: Vocabulary, dim: int = 300, seed: int = 0) -> EmbeddingMatrix:
    """Load text-format embeddings (token then dim reals per line).

    Tokens absent from the file get a deterministic uniform[-0.05, 0.05) row
    keyed by (seed, token id); the pad row is forced to zeros.  Any line with
    the wrong number of reals raises, even for out-of-vocabulary tokens.
    """
    path = Path(path)
    if not path.is_file():
        raise IoFailureError(f"no embedding file: {path}")
    found: dict[int, np.ndarray] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) <= 1:
                continue
            token, vals = parts[0], parts[1:]
            if len(vals) != dim:
                raise DimMismatchError(f"{path}:{lineno}: {len(vals)} values, expected {dim}")
            if token in vocab.token_to_id:
                found[vocab.token_to_id[token]] = np.array([float(v) for v in vals])
    values = np.empty((len(vocab), dim), dtype=np.float64)
    for i in range(len(vocab)):
        values[i] = found.get(i, _seeded_row(seed, i, dim, 0.05))
    values[PAD_ID] = 0.0
    return EmbeddingMatrix(values=values, dim=dim, frozen=True)


def random_embeddings(vocab: Vocabulary, dim: int, seed: int = 0, scale: float = 0.5) -> EmbeddingMatrix:
    """Seeded uniform rows for runs without a pre-trained embedding file."""
    values = np.stack([_seeded_row(seed, i, dim, scale) for i in range(len(vocab))])
    values[PAD_ID] = 0.0
    return EmbeddingMatrix(values=values, dim=dim, frozen=True)


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Text lines token<TAB>id<TAB>count, reserved rows first."""
    lines = []
    for i, tok in enumerate(vocab.id_to_token):
        lines.append(f"{tok}\t{i}\t{vocab.counts.get(tok, 0)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_vocabulary(path) -> Vocabulary:
    path = Path(path)
    if not path.is_file():
        raise IoFailureError(f"no vocabulary file: {path}")
    id_to_token: list[str] = []
    counts: dict[str, int] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        tok, idx, count = line.split("\t")
        if int(idx) != len(id_to_token):
            raise UnknownIdError(f"non-contiguous id {idx} in {path}")
        id_to_token.append(tok)
        if int(count) > 0:
            counts[tok] = int(count)
    return Vocabulary(
        token_to_id={tok: i for i, tok in enumerate(id_to_token)},
        id_to_token=id_to_token,
        counts=counts,
    )


def load_gazetteer(path) -> Gazetteer:
    """Lines 'phrase<TAB>class'; phrases lowercased."""
    path = Path(path)
    if not path.is_file():
        raise IoFailureError(f"no gazetteer file: {path}")
    entries = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        phrase, _, label = line.partition("\t")
        entries[phrase.strip().lower()] = label.strip()
    return Gazetteer(entries=entries)

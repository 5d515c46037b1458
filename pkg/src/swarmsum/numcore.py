"""Deterministic numeric kernel.

Everything downstream (models, optimizers) goes through this module for
softmax, activations, seeded randomness and the flat-vector <-> named-weight
bijection, so reproducibility concerns live in one place.  Matrices are plain
2-D float64 numpy arrays, treated as immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadRangeError,
    EmptyInputError,
    LengthMismatchError,
    ShapeMismatchError,
)

# Layout entry: (name, rows, cols) of one named weight matrix.
Layout = list[tuple[str, int, int]]


def softmax(x) -> np.ndarray:
    """Max-subtracted softmax of a 1-D sequence; strictly positive, sums to 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise EmptyInputError("softmax of empty sequence")
    z = np.exp(x - np.max(x))
    return z / z.sum()


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeMismatchError("matmul expects 2-D matrices")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"inner dims differ: {a.shape} x {b.shape}")
    return a @ b


def tanh_map(m) -> np.ndarray:
    return np.tanh(np.asarray(m, dtype=np.float64))


def sigmoid_map(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    # Split by sign to avoid overflow in exp for large |m|.
    out = np.empty_like(m)
    pos = m >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-m[pos]))
    em = np.exp(m[~pos])
    out[~pos] = em / (1.0 + em)
    return out


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id).

    Backed by the counter-based Philox generator, so distinct stream ids are
    statistically independent and a stream's output depends only on
    (seed, stream_id, draw index) -- never on what other streams did.  Each
    stream is owned by a single consumer; drawing advances its own counter
    and nothing else, which keeps population-parallel code bit-reproducible.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._gen = np.random.Generator(
            np.random.Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        )

    def split(self, stream_id: int) -> "RngStream":
        """Fresh independent stream under the same seed."""
        return RngStream(self.seed, stream_id)

    def uniform(self, lo: float, hi: float, n: int) -> np.ndarray:
        return self._gen.uniform(lo, hi, n)

    def normal(self, loc, scale) -> np.ndarray:
        return self._gen.normal(loc, scale)

    def integers(self, n: int) -> int:
        return int(self._gen.integers(n))

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def rand_uniform(stream: RngStream, lo: float, hi: float, n: int) -> np.ndarray:
    """n draws in [lo, hi) from the stream, advancing its counter."""
    if not lo < hi:
        raise BadRangeError(f"need lo < hi, got [{lo}, {hi})")
    return stream.uniform(lo, hi, n)


@dataclass
class ParamVector:
    """Flat float64 view of an ordered set of named weight matrices."""

    values: np.ndarray
    layout: Layout = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()

    @property
    def size(self) -> int:
        return self.values.size


def layout_size(layout: Layout) -> int:
    return sum(r * c for _, r, c in layout)


def flatten(weights: list[tuple[str, np.ndarray]]) -> ParamVector:
    """Concatenate named matrices row-major into one flat vector."""
    layout: Layout = []
    parts = []
    for name, m in weights:
        m = np.asarray(m, dtype=np.float64)
        if m.ndim != 2:
            raise ShapeMismatchError(f"weight {name!r} is not 2-D")
        layout.append((name, m.shape[0], m.shape[1]))
        parts.append(m.ravel())
    values = np.concatenate(parts) if parts else np.empty(0)
    return ParamVector(values, layout)


def unflatten(p: ParamVector) -> list[tuple[str, np.ndarray]]:
    """Inverse of flatten; exact bijection."""
    return [(name, m) for name, m in zip([n for n, _, _ in p.layout],
                                         _split(p.values, p.layout))]


def unpack(values, layout: Layout) -> dict[str, np.ndarray]:
    """Flat vector -> {name: matrix} dict for a known layout."""
    return {name: m for (name, _, _), m in zip(layout, _split(values, layout))}


def _split(values, layout: Layout) -> list[np.ndarray]:
    values = np.asarray(values, dtype=np.float64).ravel()
    total = layout_size(layout)
    if values.size != total:
        raise LengthMismatchError(f"layout needs {total} values, got {values.size}")
    out = []
    i = 0
    for _, r, c in layout:
        out.append(values[i:i + r * c].reshape(r, c))
        i += r * c
    return out

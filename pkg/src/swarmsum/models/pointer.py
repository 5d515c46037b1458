"""Pointer network: decoder steps select source positions, not vocab tokens.

Per step, content scores u_j = v . tanh(W1 e_j + W2 d) over the n encoder
rows are softmaxed into a distribution whose argmax is the emitted input
position; the distribution is never mixed into a context vector.  The chosen
position's encoder representation is what feeds the decoder cell next.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigMismatchError, IndexOutOfRangeError, ShapeMismatchError
from ..numcore import softmax, unpack
from ..vocab import EmbeddingMatrix, TokenIds
from .config import ModelConfig, param_layout
from .recurrent import _Cell, rnn_encode


@dataclass
class PointerParams:
    v: np.ndarray   # (a,)
    w1: np.ndarray  # (a, enc_dim)
    w2: np.ndarray  # (a, dec_dim)


@dataclass
class PointerDecodeState:
    selected: list[int] = field(default_factory=list)


def _raw_scores(enc_states: np.ndarray, dec_state: np.ndarray, pp: PointerParams) -> np.ndarray:
    if enc_states.shape[1] != pp.w1.shape[1] or dec_state.size != pp.w2.shape[1]:
        raise ShapeMismatchError("pointer weight shapes do not match states")
    if pp.v.size != pp.w1.shape[0] or pp.v.size != pp.w2.shape[0]:
        raise ShapeMismatchError("pointer v length does not match W rows")
    return np.tanh(enc_states @ pp.w1.T + pp.w2 @ dec_state) @ np.ravel(pp.v)


def pointer_scores(enc_states: np.ndarray, dec_state: np.ndarray, pp: PointerParams) -> np.ndarray:
    """Softmax distribution over source positions for the current decoder state."""
    return softmax(_raw_scores(enc_states, dec_state, pp))


def pointer_step(enc_states: np.ndarray, dec_state, pp: PointerParams,
                 prev: PointerDecodeState, cell: _Cell):
    """Select a position from the current state, then consume its representation.

    Returns (selected index, grown decode state, next decoder cell state).
    Argmax ties break toward the lowest index.
    """
    n = enc_states.shape[0]
    if any(not 0 <= i < n for i in prev.selected):
        raise IndexOutOfRangeError(f"selected history outside [0, {n})")
    attn = pointer_scores(enc_states, _Cell.hidden_of(dec_state), pp)
    idx = int(np.argmax(attn))
    next_state = cell.step(enc_states[idx], dec_state)
    return idx, PointerDecodeState(prev.selected + [idx]), next_state


def align_targets(src: TokenIds, tgt_out: np.ndarray) -> np.ndarray:
    """First source position holding each target token; -1 when absent."""
    positions = {}
    for j in range(src.true_length - 1, -1, -1):
        positions[int(src.ids[j])] = j
    return np.array([positions.get(int(t), -1) for t in tgt_out], dtype=np.int64)


def pointer_forward(params, src: TokenIds, tgt_out: np.ndarray, emb: EmbeddingMatrix,
                    cfg: ModelConfig, attn_log: list | None = None):
    """Training pass: raw position scores per step plus aligned position targets.

    Teacher forcing feeds the target-aligned position's representation; steps
    whose target token never occurs in the source fall back to the model's
    own argmax selection and are marked -1 (excluded from the loss).
    """
    if cfg.kind != "pointer":
        raise ConfigMismatchError(f"pointer_forward got kind {cfg.kind!r}")
    w = unpack(params, param_layout(cfg))
    enc = rnn_encode(src, emb, w, cfg)
    pp = PointerParams(v=w["ptr.v"][:, 0], w1=w["ptr.w1"], w2=w["ptr.w2"])
    cell = _Cell(cfg.cell, cfg.hidden, w["dec.w"], w["dec.u"], w["dec.b"])

    targets = align_targets(src, tgt_out)
    steps = len(tgt_out)
    logits = np.zeros((steps, enc.shape[0]))
    state = cell.initial()
    for t in range(steps):
        u = _raw_scores(enc, _Cell.hidden_of(state), pp)
        logits[t] = u
        if attn_log is not None:
            attn_log.append(softmax(u))
        feed = int(targets[t]) if targets[t] >= 0 else int(np.argmax(u))
        state = cell.step(enc[feed], state)
    return logits, targets

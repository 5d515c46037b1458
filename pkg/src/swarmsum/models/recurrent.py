"""Bidirectional recurrent encoder and the attention decoder with coverage.

The coverage vector is the running sum of all previous steps' attention
distributions (zero at the first step), and the per-step coverage penalty is
the elementwise min of the current attention and that running sum.  Coverage
enters the attention score as a scalar-weighted extra feature.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigMismatchError, LengthMismatchError, ShapeMismatchError
from ..numcore import sigmoid_map, softmax, unpack
from ..vocab import EmbeddingMatrix, TokenIds
from .config import ModelConfig, param_layout


def gru_cell(x: np.ndarray, h: np.ndarray, w: np.ndarray, u: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One GRU step: gates z/r, candidate through r-masked recurrence."""
    n = h.size
    wx = w @ x + b[:, 0]
    uh = u[: 2 * n] @ h
    z = sigmoid_map(wx[:n] + uh[:n])
    r = sigmoid_map(wx[n : 2 * n] + uh[n : 2 * n])
    cand = np.tanh(wx[2 * n :] + u[2 * n :] @ (r * h))
    return (1.0 - z) * h + z * cand


def lstm_cell(x, state, w, u, b):
    """One LSTM step over state (h, c)."""
    h, c = state
    n = h.size
    a = w @ x + u @ h + b[:, 0]
    i = sigmoid_map(a[:n])
    f = sigmoid_map(a[n : 2 * n])
    g = np.tanh(a[2 * n : 3 * n])
    o = sigmoid_map(a[3 * n :])
    c_new = f * c + i * g
    return o * np.tanh(c_new), c_new


class _Cell:
    """Uniform wrapper so forward loops are cell-agnostic."""

    def __init__(self, kind: str, hidden: int, w, u, b):
        self.kind = kind
        self.hidden = hidden
        self.w, self.u, self.b = w, u, b

    def initial(self):
        h = np.zeros(self.hidden)
        return h if self.kind == "gru" else (h, h.copy())

    def step(self, x, state):
        if self.kind == "gru":
            return gru_cell(x, state, self.w, self.u, self.b)
        return lstm_cell(x, state, self.w, self.u, self.b)

    @staticmethod
    def hidden_of(state):
        return state if isinstance(state, np.ndarray) else state[0]


def rnn_encode(ids: TokenIds, emb: EmbeddingMatrix, weights: dict[str, np.ndarray],
               cfg: ModelConfig) -> np.ndarray:
    """Bidirectional pass over the unpadded prefix; rows are [fwd || bwd] states."""
    seq = emb.values[ids.ids[: ids.true_length]]
    if seq.shape[1] != cfg.embed_dim:
        raise ShapeMismatchError(
            f"embedding dim {seq.shape[1]} != configured {cfg.embed_dim}")
    n = seq.shape[0]
    fwd = _Cell(cfg.cell, cfg.hidden, weights["enc.fw.w"], weights["enc.fw.u"], weights["enc.fw.b"])
    bwd = _Cell(cfg.cell, cfg.hidden, weights["enc.bw.w"], weights["enc.bw.u"], weights["enc.bw.b"])
    states = np.zeros((n, 2 * cfg.hidden))
    s = fwd.initial()
    for t in range(n):
        s = fwd.step(seq[t], s)
        states[t, : cfg.hidden] = _Cell.hidden_of(s)
    s = bwd.initial()
    for t in range(n - 1, -1, -1):
        s = bwd.step(seq[t], s)
        states[t, cfg.hidden :] = _Cell.hidden_of(s)
    return states


def coverage_update(cov: np.ndarray, attn: np.ndarray) -> np.ndarray:
    if cov.shape != attn.shape:
        raise LengthMismatchError(f"coverage {cov.shape} vs attention {attn.shape}")
    return cov + attn


def coverage_loss(attn: np.ndarray, cov: np.ndarray) -> float:
    if cov.shape != attn.shape:
        raise LengthMismatchError(f"coverage {cov.shape} vs attention {attn.shape}")
    return float(np.minimum(attn, cov).sum())


def attention_step(dec_state: np.ndarray, enc_states: np.ndarray, cov: np.ndarray,
                   w_enc: np.ndarray, w_dec: np.ndarray, v: np.ndarray,
                   w_cov: float = 0.0, use_coverage: bool = False):
    """Additive attention over encoder rows; returns (distribution, context).

    Scores are v . tanh(W_enc e_j + W_dec d [+ w_cov * cov_j]); the coverage
    feature is a scalar broadcast into the pre-activation.
    """
    if enc_states.shape[1] != w_enc.shape[1] or dec_state.size != w_dec.shape[1]:
        raise ShapeMismatchError("attention weight shapes do not match states")
    pre = enc_states @ w_enc.T + w_dec @ dec_state
    if use_coverage:
        pre = pre + (w_cov * cov)[:, None]
    scores = np.tanh(pre) @ v.ravel()
    attn = softmax(scores)
    return attn, attn @ enc_states


def seq2seq_forward(params, src: TokenIds, tgt_in: TokenIds, emb: EmbeddingMatrix,
                    cfg: ModelConfig, attn_log: list | None = None,
                    rng=None):
    """Teacher-forced forward pass of the coverage model.

    Returns (logits over the vocabulary, total coverage loss).  When attn_log
    is a list, (attention, coverage-before-update) pairs are appended per step.
    """
    if cfg.kind != "coverage":
        raise ConfigMismatchError(f"seq2seq_forward got kind {cfg.kind!r}")
    if cfg.dropout > 0.0 and rng is None:
        raise ConfigMismatchError("dropout > 0 requires an rng stream")
    w = unpack(params, param_layout(cfg))
    enc = rnn_encode(src, emb, w, cfg)
    cell = _Cell(cfg.cell, cfg.hidden, w["dec.w"], w["dec.u"], w["dec.b"])

    steps = tgt_in.true_length
    logits = np.zeros((steps, cfg.vocab_size))
    state = cell.initial()
    ctx = np.zeros(2 * cfg.hidden)
    cov = np.zeros(enc.shape[0])
    total_covloss = 0.0
    w_cov = float(w["att.cov"][0, 0])
    for t in range(steps):
        x = np.concatenate([emb.values[tgt_in.ids[t]], ctx])
        if cfg.dropout > 0.0:
            keep = rng.uniform(0.0, 1.0, x.size) >= cfg.dropout
            x = x * keep / (1.0 - cfg.dropout)
        state = cell.step(x, state)
        h = _Cell.hidden_of(state)
        attn, ctx = attention_step(h, enc, cov, w["att.enc"], w["att.dec"],
                                   w["att.v"], w_cov, use_coverage=True)
        total_covloss += coverage_loss(attn, cov)
        if attn_log is not None:
            attn_log.append((attn.copy(), cov.copy()))
        cov = coverage_update(cov, attn)
        logits[t] = w["out.w"] @ np.concatenate([h, ctx]) + w["out.b"][:, 0]
    return logits, total_covloss

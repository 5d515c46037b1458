"""Encoder-decoder transformer built on explicit numpy matrices.

Sinusoidal positions are added to token embeddings, then post-norm blocks:
self-attention (masked on the decoder side), cross-attention in the decoder,
and a configurable-depth feed-forward stack, each wrapped residual + layer
normalization.  The whole sequence is processed in one pass; teacher forcing
supplies the shifted target during training.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigMismatchError, OddDimError, ShapeMismatchError
from ..numcore import unpack
from ..vocab import EmbeddingMatrix, TokenIds
from .config import ModelConfig, _ffn_shapes, param_layout

LN_EPS = 1e-5


def positional_encoding(length: int, dim: int) -> np.ndarray:
    """Sin on even columns, cos on odd, geometric wavelengths up to 10000."""
    if dim % 2:
        raise OddDimError(f"positional encoding needs even dim, got {dim}")
    pos = np.arange(length, dtype=np.float64)[:, None]
    inv = 10000.0 ** (-np.arange(0, dim, 2, dtype=np.float64) / dim)
    angles = pos * inv
    pe = np.zeros((length, dim))
    pe[:, 0::2] = np.sin(angles)
    pe[:, 1::2] = np.cos(angles)
    return pe


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + LN_EPS) * gain.ravel() + bias.ravel()


def _rows_softmax(scores: np.ndarray) -> np.ndarray:
    z = np.exp(scores - scores.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def multi_head_attention(q: np.ndarray, k: np.ndarray, v: np.ndarray, heads: int,
                         wq: np.ndarray, wk: np.ndarray, wv: np.ndarray, wo: np.ndarray,
                         causal_mask: bool = False, attn_log: list | None = None) -> np.ndarray:
    """Scaled dot-product attention per head, concatenated and output-projected.

    causal_mask hides key positions after each query position (self-attention
    only, so query and key counts must match).
    """
    d = q.shape[1]
    if d % heads:
        raise ShapeMismatchError(f"dim {d} not divisible by {heads} heads")
    if k.shape[1] != d or v.shape[1] != d or k.shape[0] != v.shape[0]:
        raise ShapeMismatchError("q/k/v dims inconsistent")
    if causal_mask and q.shape[0] != k.shape[0]:
        raise ShapeMismatchError("causal mask needs equal query/key counts")
    dh = d // heads
    qp, kp, vp = q @ wq.T, k @ wk.T, v @ wv.T
    out = np.empty_like(qp)
    for h in range(heads):
        sl = slice(h * dh, (h + 1) * dh)
        scores = qp[:, sl] @ kp[:, sl].T / np.sqrt(dh)
        if causal_mask:
            scores[np.triu_indices_from(scores, k=1)] = -np.inf
        attn = _rows_softmax(scores)
        if attn_log is not None:
            attn_log.extend(attn)
        out[:, sl] = attn @ vp[:, sl]
    return out @ wo.T


def _ffn_apply(x: np.ndarray, w: dict, prefix: str, cfg: ModelConfig) -> np.ndarray:
    for j in range(len(_ffn_shapes(cfg))):
        x = x @ w[f"{prefix}.ffn{j}.w"].T + w[f"{prefix}.ffn{j}.b"][:, 0]
        x = np.maximum(x, 0.0)
    return x


def _sublayer(x, sub_out, w, ln_prefix, cfg, rng):
    if cfg.dropout > 0.0:
        keep = rng.uniform(0.0, 1.0, sub_out.size).reshape(sub_out.shape) >= cfg.dropout
        sub_out = sub_out * keep / (1.0 - cfg.dropout)
    return layer_norm(x + sub_out, w[f"{ln_prefix}.g"], w[f"{ln_prefix}.b"])


def transformer_forward(params, src: TokenIds, tgt_in: TokenIds, emb: EmbeddingMatrix,
                        cfg: ModelConfig, attn_log: list | None = None,
                        rng=None) -> np.ndarray:
    """Full teacher-forced pass; returns target-length x vocab logits."""
    if cfg.kind != "transformer":
        raise ConfigMismatchError(f"transformer_forward got kind {cfg.kind!r}")
    if emb.dim != cfg.embed_dim:
        raise ConfigMismatchError(f"embedding dim {emb.dim} != configured {cfg.embed_dim}")
    if cfg.dropout > 0.0 and rng is None:
        raise ConfigMismatchError("dropout > 0 requires an rng stream")
    w = unpack(params, param_layout(cfg))

    x = emb.values[src.ids[: src.true_length]]
    x = x + positional_encoding(x.shape[0], cfg.embed_dim)
    for i in range(cfg.enc_blocks):
        p = f"enc{i}"
        a = multi_head_attention(x, x, x, cfg.heads, w[f"{p}.self.wq"], w[f"{p}.self.wk"],
                                 w[f"{p}.self.wv"], w[f"{p}.self.wo"], attn_log=attn_log)
        x = _sublayer(x, a, w, f"{p}.ln1", cfg, rng)
        x = _sublayer(x, _ffn_apply(x, w, p, cfg), w, f"{p}.ln2", cfg, rng)

    y = emb.values[tgt_in.ids[: tgt_in.true_length]]
    y = y + positional_encoding(y.shape[0], cfg.embed_dim)
    for i in range(cfg.dec_blocks):
        p = f"dec{i}"
        a = multi_head_attention(y, y, y, cfg.heads, w[f"{p}.self.wq"], w[f"{p}.self.wk"],
                                 w[f"{p}.self.wv"], w[f"{p}.self.wo"],
                                 causal_mask=True, attn_log=attn_log)
        y = _sublayer(y, a, w, f"{p}.ln1", cfg, rng)
        a = multi_head_attention(y, x, x, cfg.heads, w[f"{p}.cross.wq"], w[f"{p}.cross.wk"],
                                 w[f"{p}.cross.wv"], w[f"{p}.cross.wo"], attn_log=attn_log)
        y = _sublayer(y, a, w, f"{p}.ln2", cfg, rng)
        y = _sublayer(y, _ffn_apply(y, w, p, cfg), w, f"{p}.ln3", cfg, rng)

    return y @ w["out.w"].T + w["out.b"][:, 0]

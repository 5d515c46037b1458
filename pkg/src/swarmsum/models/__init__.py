"""Model forward passes, loss, greedy decoding and parameter-file round trip."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import (
    ConfigMismatchError,
    DigestMismatchError,
    IoFailureError,
    LengthMismatchError,
    ShapeMismatchError,
)
from ..numcore import unpack
from ..vocab import END_ID, PAD_ID, START_ID, EmbeddingMatrix, TokenIds
from .config import (
    ModelConfig,
    config_digest,
    desk_config,
    param_count,
    param_layout,
)
from .pointer import (
    PointerDecodeState,
    PointerParams,
    align_targets,
    pointer_forward,
    pointer_scores,
    pointer_step,
)
from .recurrent import (
    _Cell,
    attention_step,
    coverage_loss,
    coverage_update,
    gru_cell,
    lstm_cell,
    rnn_encode,
    seq2seq_forward,
)
from .transformer import (
    layer_norm,
    multi_head_attention,
    positional_encoding,
    transformer_forward,
)

PARAM_MAGIC = b"SLAB1"

__all__ = [
    "ModelConfig", "config_digest", "desk_config", "param_count", "param_layout",
    "PointerDecodeState", "PointerParams", "align_targets", "pointer_forward",
    "pointer_scores", "pointer_step", "attention_step", "coverage_loss",
    "coverage_update", "gru_cell", "lstm_cell", "rnn_encode", "seq2seq_forward",
    "layer_norm", "multi_head_attention", "positional_encoding",
    "transformer_forward", "sequence_loss", "teacher_pair", "pair_loss",
    "greedy_decode", "save_params", "load_params", "PARAM_MAGIC",
]


def sequence_loss(logits: np.ndarray, targets, pad_id: int = PAD_ID,
                  covloss: float = 0.0, coverage_weight: float = 0.0) -> float:
    """Mean negative log-likelihood over non-pad targets plus scaled coverage.

    The coverage penalty is normalized by the same non-pad step count.  A
    target sequence with no non-pad position scores 0 by convention.
    """
    ids = targets.ids if isinstance(targets, TokenIds) else np.asarray(targets)
    mask = ids != pad_id
    count = int(mask.sum())
    if count == 0:
        return 0.0
    steps = np.flatnonzero(mask)
    if logits.shape[0] <= steps.max():
        raise ShapeMismatchError(
            f"{logits.shape[0]} logit rows for target position {steps.max()}")
    rows = logits[steps]
    shifted = rows - rows.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    nll = log_z - shifted[np.arange(count), ids[steps]]
    return float(nll.mean() + coverage_weight * covloss / count)


def teacher_pair(tgt: TokenIds) -> tuple[TokenIds, np.ndarray]:
    """Marker-wrapped target -> (decoder input, shifted prediction targets).

    Input keeps the start marker and drops the end; targets drop the start
    and keep the end, padded back to capacity - 1.
    """
    m, cap = tgt.true_length, tgt.capacity
    pad = np.zeros(cap - m, dtype=np.int64) + PAD_ID
    tgt_in = TokenIds(np.concatenate([tgt.ids[: m - 1], pad]), m - 1)
    tgt_out = np.concatenate([tgt.ids[1:m], pad])
    return tgt_in, tgt_out


def pair_loss(params, src: TokenIds, tgt: TokenIds, emb: EmbeddingMatrix,
              cfg: ModelConfig) -> float:
    """Teacher-forced training loss of one (source, marker-wrapped target) pair."""
    tgt_in, tgt_out = teacher_pair(tgt)
    if cfg.kind == "transformer":
        logits = transformer_forward(params, src, tgt_in, emb, cfg)
        return sequence_loss(logits, tgt_out, PAD_ID)
    if cfg.kind == "coverage":
        logits, covloss = seq2seq_forward(params, src, tgt_in, emb, cfg)
        return sequence_loss(logits, tgt_out, PAD_ID, covloss, cfg.coverage_weight)
    steps = tgt_in.true_length
    logits, positions = pointer_forward(params, src, tgt_out[:steps], emb, cfg)
    return sequence_loss(logits, positions, pad_id=-1)


def greedy_decode(params, src: TokenIds, emb: EmbeddingMatrix, cfg: ModelConfig,
                  max_steps: int = 0) -> TokenIds:
    """Argmax decoding from the start marker; stops at the end marker or budget."""
    if max_steps < 1:
        max_steps = cfg.tgt_maxlen
    if cfg.kind == "transformer":
        out = _decode_transformer(params, src, emb, cfg, max_steps)
    elif cfg.kind == "coverage":
        out = _decode_coverage(params, src, emb, cfg, max_steps)
    else:
        out = _decode_pointer(params, src, emb, cfg, max_steps)
    ids = np.array([START_ID] + out + [END_ID], dtype=np.int64)
    return TokenIds(ids, len(ids))


def _decode_transformer(params, src, emb, cfg, max_steps):
    ids = [START_ID]
    for _ in range(max_steps):
        tgt_in = TokenIds(np.array(ids, dtype=np.int64), len(ids))
        logits = transformer_forward(params, src, tgt_in, emb, cfg)
        nxt = int(np.argmax(logits[-1]))
        if nxt == END_ID:
            break
        ids.append(nxt)
    return ids[1:]


def _decode_coverage(params, src, emb, cfg, max_steps):
    from .recurrent import attention_step as _attn  # local alias for clarity

    w = unpack(params, param_layout(cfg))
    enc = rnn_encode(src, emb, w, cfg)
    cell = _Cell(cfg.cell, cfg.hidden, w["dec.w"], w["dec.u"], w["dec.b"])
    state = cell.initial()
    ctx = np.zeros(2 * cfg.hidden)
    cov = np.zeros(enc.shape[0])
    w_cov = float(w["att.cov"][0, 0])
    last = START_ID
    out = []
    for _ in range(max_steps):
        state = cell.step(np.concatenate([emb.values[last], ctx]), state)
        h = _Cell.hidden_of(state)
        attn, ctx = _attn(h, enc, cov, w["att.enc"], w["att.dec"], w["att.v"],
                          w_cov, use_coverage=True)
        cov = coverage_update(cov, attn)
        nxt = int(np.argmax(w["out.w"] @ np.concatenate([h, ctx]) + w["out.b"][:, 0]))
        if nxt == END_ID:
            break
        out.append(nxt)
        last = nxt
    return out


def _decode_pointer(params, src, emb, cfg, max_steps):
    w = unpack(params, param_layout(cfg))
    enc = rnn_encode(src, emb, w, cfg)
    pp = PointerParams(v=w["ptr.v"][:, 0], w1=w["ptr.w1"], w2=w["ptr.w2"])
    cell = _Cell(cfg.cell, cfg.hidden, w["dec.w"], w["dec.u"], w["dec.b"])
    state = cell.initial()
    decode = PointerDecodeState()
    out = []
    for _ in range(max_steps):
        idx, decode, state = pointer_step(enc, state, pp, decode, cell)
        tok = int(src.ids[idx])
        if tok == END_ID:
            break
        out.append(tok)
    return out


def save_params(path, values: np.ndarray, cfg: ModelConfig) -> None:
    """Binary parameter file: magic, config digest, count, little-endian doubles."""
    values = np.asarray(values, dtype=np.float64).ravel()
    expected = param_count(cfg)
    if values.size != expected:
        raise LengthMismatchError(f"{values.size} values, layout needs {expected}")
    with Path(path).open("wb") as fh:
        fh.write(PARAM_MAGIC)
        fh.write(struct.pack("<QQ", config_digest(cfg), values.size))
        fh.write(values.astype("<f8").tobytes())


def load_params(path, cfg: ModelConfig) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise IoFailureError(f"no parameter file: {path}")
    blob = path.read_bytes()
    if blob[: len(PARAM_MAGIC)] != PARAM_MAGIC:
        raise IoFailureError(f"{path}: bad magic")
    digest, count = struct.unpack_from("<QQ", blob, len(PARAM_MAGIC))
    if digest != config_digest(cfg):
        raise DigestMismatchError(f"{path}: parameter file does not match model config")
    values = np.frombuffer(blob, dtype="<f8", offset=len(PARAM_MAGIC) + 16)
    if values.size != count or count != param_count(cfg):
        raise LengthMismatchError(f"{path}: expected {param_count(cfg)} values")
    return values.astype(np.float64)

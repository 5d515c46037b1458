"""Model configuration, canonical parameter layouts and the config digest.

Every model's trainable weights are described by a deterministic layout
(ordered list of named matrix shapes) derived from the config alone, so a
flat search vector maps to structured weights the same way everywhere.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields

from ..errors import ConfigMismatchError
from ..numcore import Layout, layout_size

KINDS = ("coverage", "pointer", "transformer")
CELLS = ("gru", "lstm")

# Gate blocks per recurrent cell: z/r/candidate for gru, i/f/g/o for lstm.
GATE_BLOCKS = {"gru": 3, "lstm": 4}


@dataclass
class ModelConfig:
    """Architecture hyperparameters.

    Defaults are the full-scale settings (256 hidden units, 10 attention
    heads, 8 encoder and 8 decoder blocks, feed-forward depth 6, 300-d
    embeddings); tests and demos shrink them via desk_config.
    """

    kind: str
    vocab_size: int
    cell: str = "gru"
    hidden: int = 256
    embed_dim: int = 300
    heads: int = 10
    enc_blocks: int = 8
    dec_blocks: int = 8
    ffn_depth: int = 6
    ffn_width: int = 0  # 0 -> 4 * embed_dim
    src_maxlen: int = 64
    tgt_maxlen: int = 16
    coverage_weight: float = 1.0
    dropout: float = 0.0

    def __post_init__(self):
        if self.ffn_width == 0:
            self.ffn_width = 4 * self.embed_dim
        self.validate()

    def validate(self):
        if self.kind not in KINDS:
            raise ConfigMismatchError(f"unknown model kind {self.kind!r}")
        if self.cell not in CELLS:
            raise ConfigMismatchError(f"unknown cell {self.cell!r}")
        for name in ("vocab_size", "hidden", "embed_dim", "heads", "enc_blocks",
                     "dec_blocks", "ffn_depth", "ffn_width", "src_maxlen", "tgt_maxlen"):
            if getattr(self, name) < 1:
                raise ConfigMismatchError(f"{name} must be >= 1")
        if self.kind == "transformer" and self.embed_dim % self.heads:
            raise ConfigMismatchError(
                f"embed_dim {self.embed_dim} not divisible by heads {self.heads}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigMismatchError(f"dropout {self.dropout} outside [0, 1)")
        if self.coverage_weight < 0.0:
            raise ConfigMismatchError("coverage_weight must be non-negative")


def desk_config(kind: str, vocab_size: int, **overrides) -> ModelConfig:
    """Small configuration used across tests and demos."""
    base = dict(
        cell="gru", hidden=16, embed_dim=16, heads=2, enc_blocks=1, dec_blocks=1,
        ffn_depth=2, ffn_width=32, src_maxlen=24, tgt_maxlen=10,
    )
    base.update(overrides)
    return ModelConfig(kind=kind, vocab_size=vocab_size, **base)


def _ffn_shapes(cfg: ModelConfig) -> list[tuple[int, int]]:
    d, w = cfg.embed_dim, cfg.ffn_width
    if cfg.ffn_depth == 1:
        return [(d, d)]
    return [(w, d)] + [(w, w)] * (cfg.ffn_depth - 2) + [(d, w)]


def _attention_block(prefix: str, d: int) -> Layout:
    return [(f"{prefix}.wq", d, d), (f"{prefix}.wk", d, d),
            (f"{prefix}.wv", d, d), (f"{prefix}.wo", d, d)]


def _norm(prefix: str, d: int) -> Layout:
    return [(f"{prefix}.g", d, 1), (f"{prefix}.b", d, 1)]


def _ffn(prefix: str, cfg: ModelConfig) -> Layout:
    out: Layout = []
    for j, (rows, cols) in enumerate(_ffn_shapes(cfg)):
        out += [(f"{prefix}.ffn{j}.w", rows, cols), (f"{prefix}.ffn{j}.b", rows, 1)]
    return out


def _recurrent_encoder(cfg: ModelConfig) -> Layout:
    g, h, e = GATE_BLOCKS[cfg.cell], cfg.hidden, cfg.embed_dim
    out: Layout = []
    for side in ("fw", "bw"):
        out += [(f"enc.{side}.w", g * h, e), (f"enc.{side}.u", g * h, h),
                (f"enc.{side}.b", g * h, 1)]
    return out


def param_layout(cfg: ModelConfig) -> Layout:
    """Canonical (name, rows, cols) list for the model's trainable weights."""
    g, h, d, v = GATE_BLOCKS[cfg.cell], cfg.hidden, cfg.embed_dim, cfg.vocab_size
    if cfg.kind == "coverage":
        return (
            _recurrent_encoder(cfg)
            + [("dec.w", g * h, d + 2 * h), ("dec.u", g * h, h), ("dec.b", g * h, 1)]
            + [("att.enc", h, 2 * h), ("att.dec", h, h), ("att.v", h, 1), ("att.cov", 1, 1)]
            + [("out.w", v, 3 * h), ("out.b", v, 1)]
        )
    if cfg.kind == "pointer":
        return (
            _recurrent_encoder(cfg)
            + [("dec.w", g * h, 2 * h), ("dec.u", g * h, h), ("dec.b", g * h, 1)]
            + [("ptr.w1", h, 2 * h), ("ptr.w2", h, h), ("ptr.v", h, 1)]
        )
    layout: Layout = []
    for i in range(cfg.enc_blocks):
        layout += _attention_block(f"enc{i}.self", d) + _norm(f"enc{i}.ln1", d)
        layout += _ffn(f"enc{i}", cfg) + _norm(f"enc{i}.ln2", d)
    for i in range(cfg.dec_blocks):
        layout += _attention_block(f"dec{i}.self", d) + _norm(f"dec{i}.ln1", d)
        layout += _attention_block(f"dec{i}.cross", d) + _norm(f"dec{i}.ln2", d)
        layout += _ffn(f"dec{i}", cfg) + _norm(f"dec{i}.ln3", d)
    layout += [("out.w", v, d), ("out.b", v, 1)]
    return layout


def param_count(cfg: ModelConfig) -> int:
    return layout_size(param_layout(cfg))


def config_digest(cfg: ModelConfig) -> int:
    """64-bit digest of every config field; identifies parameter files."""
    canon = ";".join(f"{f.name}={getattr(cfg, f.name)!r}" for f in fields(cfg))
    return int.from_bytes(hashlib.sha256(canon.encode()).digest()[:8], "little")

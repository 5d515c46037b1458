"""Positional encoding, multi-head attention and the transformer forward pass."""

import math

import numpy as np
import pytest

from swarmsum.errors import OddDimError, ShapeMismatchError
from swarmsum.models import (
    ModelConfig,
    multi_head_attention,
    param_count,
    positional_encoding,
    transformer_forward,
)
from swarmsum.numcore import RngStream
from swarmsum.vocab import EmbeddingMatrix, TokenIds


def _cfg(**kw):
    base = dict(kind="transformer", vocab_size=50, hidden=16, embed_dim=16, heads=2,
                enc_blocks=1, dec_blocks=1, ffn_depth=2, ffn_width=32,
                src_maxlen=16, tgt_maxlen=8)
    base.update(kw)
    return ModelConfig(**base)


def _emb(cfg, seed=99, scale=0.5):
    vals = RngStream(seed, 0).uniform(-scale, scale, cfg.vocab_size * cfg.embed_dim)
    vals = vals.reshape(cfg.vocab_size, cfg.embed_dim)
    vals[0] = 0.0
    return EmbeddingMatrix(values=vals, dim=cfg.embed_dim)


def _rand_params(cfg, seed=1):
    return RngStream(seed, 0).uniform(-1.0, 1.0, param_count(cfg))


def _rand_ids(rng, lo, hi, n, cap=None):
    cap = cap or n
    ids = np.zeros(cap, dtype=np.int64)
    ids[:n] = [int(rng.uniform(lo, hi, 1)[0]) for _ in range(n)]
    return TokenIds(ids, n)


class TestPositionalEncoding:
    def test_row_zero_alternates(self):
        pe = positional_encoding(3, 6)
        np.testing.assert_array_equal(pe[0], [0, 1, 0, 1, 0, 1])

    def test_sin_of_one(self):
        assert abs(positional_encoding(2, 4)[1, 0] - math.sin(1.0)) < 1e-15

    def test_range(self):
        pe = positional_encoding(64, 16)
        assert np.all(np.abs(pe) <= 1.0)

    def test_odd_dim_rejected(self):
        with pytest.raises(OddDimError):
            positional_encoding(4, 3)

    def test_matches_closed_form(self):
        dim = 8
        pe = positional_encoding(5, dim)
        for pos in range(5):
            for k in range(0, dim, 2):
                angle = pos / 10000 ** (k / dim)
                assert abs(pe[pos, k] - math.sin(angle)) < 1e-12
                assert abs(pe[pos, k + 1] - math.cos(angle)) < 1e-12


class TestMultiHeadAttention:
    def test_sharp_query_recovers_value_row(self):
        eye = np.eye(2)
        k = np.array([[10.0, 0.0], [0.0, 10.0]])
        v = np.array([[1.0, 2.0], [3.0, 4.0]])
        q = k[:1]
        out = multi_head_attention(q, k, v, 1, eye, eye, eye, eye)
        np.testing.assert_allclose(out[0], v[0], atol=1e-8)

    def test_causal_first_row_sees_only_first_value(self):
        s = RngStream(1, 0)
        x = s.uniform(-1, 1, 12).reshape(3, 4)
        wq, wk, wv, wo = (s.uniform(-1, 1, 16).reshape(4, 4) for _ in range(4))
        out = multi_head_attention(x, x, x, 2, wq, wk, wv, wo, causal_mask=True)
        np.testing.assert_allclose(out[0], (x @ wv.T)[0] @ wo.T, atol=1e-12)

    def test_zero_inputs_zero_output(self):
        z = np.zeros((3, 4))
        w = np.ones((4, 4))
        out = multi_head_attention(z, z, z, 2, w, w, w, w)
        np.testing.assert_array_equal(out, z)

    def test_distributions_logged_and_normalized(self):
        s = RngStream(2, 0)
        log = []
        q = s.uniform(-1, 1, 8).reshape(2, 4)
        kv = s.uniform(-1, 1, 20).reshape(5, 4)
        w = [s.uniform(-1, 1, 16).reshape(4, 4) for _ in range(4)]
        multi_head_attention(q, kv, kv, 2, *w, attn_log=log)
        assert len(log) == 2 * 2  # heads x query rows
        for row in log:
            assert np.all(row >= 0) and abs(row.sum() - 1.0) < 1e-9

    def test_indivisible_heads_rejected(self):
        x = np.zeros((2, 6))
        w = np.zeros((6, 6))
        with pytest.raises(ShapeMismatchError):
            multi_head_attention(x, x, x, 4, w, w, w, w)


class TestTransformerForward:
    def test_logit_shape(self):
        cfg = _cfg()
        rng = RngStream(0, 0)
        src = _rand_ids(rng, 4, cfg.vocab_size, 7)
        tgt_in = _rand_ids(rng, 4, cfg.vocab_size, 5)
        logits = transformer_forward(_rand_params(cfg), src, tgt_in, _emb(cfg), cfg)
        assert logits.shape == (5, cfg.vocab_size)

    def test_cross_attention_reaches_last_source_token(self):
        cfg = _cfg()
        rng = RngStream(1, 0)
        src = _rand_ids(rng, 4, cfg.vocab_size, 7)
        tgt_in = _rand_ids(rng, 4, cfg.vocab_size, 5)
        p = _rand_params(cfg)
        base = transformer_forward(p, src, tgt_in, _emb(cfg), cfg)
        changed = TokenIds(src.ids.copy(), src.true_length)
        changed.ids[6] = (changed.ids[6] + 1) % cfg.vocab_size or 4
        out = transformer_forward(p, changed, tgt_in, _emb(cfg), cfg)
        assert not np.allclose(base, out)

    def test_causality_prefix_rows_fixed(self):
        cfg = _cfg()
        rng = RngStream(2, 0)
        src = _rand_ids(rng, 4, cfg.vocab_size, 6)
        tgt_in = _rand_ids(rng, 4, cfg.vocab_size, 5)
        p = _rand_params(cfg)
        base = transformer_forward(p, src, tgt_in, _emb(cfg), cfg)
        perturbed = TokenIds(tgt_in.ids.copy(), tgt_in.true_length)
        perturbed.ids[4] = (perturbed.ids[4] + 3) % cfg.vocab_size or 5
        out = transformer_forward(p, src, perturbed, _emb(cfg), cfg)
        np.testing.assert_allclose(out[:4], base[:4], atol=1e-12, rtol=0)

    def test_deterministic(self):
        cfg = _cfg()
        rng = RngStream(3, 0)
        src = _rand_ids(rng, 4, cfg.vocab_size, 4)
        tgt_in = _rand_ids(rng, 4, cfg.vocab_size, 3)
        p = _rand_params(cfg)
        a = transformer_forward(p, src, tgt_in, _emb(cfg), cfg)
        b = transformer_forward(p, src, tgt_in, _emb(cfg), cfg)
        np.testing.assert_array_equal(a, b)

    def test_deeper_blocks_and_lstm_free_ffn_depths(self):
        for depth in (1, 3):
            cfg = _cfg(enc_blocks=2, dec_blocks=2, ffn_depth=depth)
            rng = RngStream(4, 0)
            src = _rand_ids(rng, 4, cfg.vocab_size, 5)
            tgt_in = _rand_ids(rng, 4, cfg.vocab_size, 4)
            logits = transformer_forward(_rand_params(cfg), src, tgt_in, _emb(cfg), cfg)
            assert logits.shape == (4, cfg.vocab_size)

    def test_attention_log_covers_all_blocks(self):
        cfg = _cfg()
        rng = RngStream(5, 0)
        src = _rand_ids(rng, 4, cfg.vocab_size, 4)
        tgt_in = _rand_ids(rng, 4, cfg.vocab_size, 3)
        log = []
        transformer_forward(_rand_params(cfg), src, tgt_in, _emb(cfg), cfg, attn_log=log)
        # enc self (2 heads x 4 rows) + dec self (2 x 3) + cross (2 x 3)
        assert len(log) == 8 + 6 + 6
        for row in log:
            assert np.all(row >= 0) and abs(row.sum() - 1.0) < 1e-9

    def test_dropout_seeded(self):
        cfg = _cfg(dropout=0.2)
        rng = RngStream(6, 0)
        src = _rand_ids(rng, 4, cfg.vocab_size, 4)
        tgt_in = _rand_ids(rng, 4, cfg.vocab_size, 3)
        p = _rand_params(cfg)
        a = transformer_forward(p, src, tgt_in, _emb(cfg), cfg, rng=RngStream(9, 0))
        b = transformer_forward(p, src, tgt_in, _emb(cfg), cfg, rng=RngStream(9, 0))
        np.testing.assert_array_equal(a, b)

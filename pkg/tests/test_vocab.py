"""Vocabulary, entity tagging, encode/decode and embedding loading."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swarmsum.corpus import Document
from swarmsum.errors import DimMismatchError, EmptyCorpusError, UnknownIdError, ZeroMaxlenError
from swarmsum.vocab import (
    END_ID,
    PAD_ID,
    RESERVED,
    START_ID,
    UNK_ID,
    Gazetteer,
    TokenIds,
    Vocabulary,
    build_vocabulary,
    decode_ids,
    encode,
    load_embeddings,
    load_gazetteer,
    load_vocabulary,
    random_embeddings,
    save_vocabulary,
    tag_entities,
)


def _docs(*texts):
    return [Document(id=f"d{i}", article_raw=t, summary_raw="",
                     article_clean=t, summary_clean="") for i, t in enumerate(texts)]


def _vocab(tokens: dict[str, int]) -> Vocabulary:
    id_to_token = list(RESERVED) + [None] * (max(tokens.values(), default=3) - 3)
    for tok, i in tokens.items():
        id_to_token[i] = tok
    return Vocabulary(token_to_id={t: i for i, t in enumerate(id_to_token) if t},
                      id_to_token=id_to_token, counts={})


class TestBuildVocabulary:
    def test_threshold_excludes_rare(self):
        v = build_vocabulary(_docs("a a b"), min_count=2)
        assert "a" in v.token_to_id and "b" not in v.token_to_id
        assert v.id_of("b") == UNK_ID

    def test_count_then_lexicographic_order(self):
        v = build_vocabulary(_docs("x y x y"), min_count=1)
        assert v.id_to_token[4:] == ["x", "y"]

    def test_min_count_one_keeps_everything(self):
        docs = _docs("the quick brown fox", "jumps over the lazy dog")
        v = build_vocabulary(docs, min_count=1)
        for d in docs:
            for tok in d.article_clean.split():
                assert v.id_of(tok) != UNK_ID

    def test_reserved_block(self):
        v = build_vocabulary(_docs("a a"), min_count=1)
        assert v.id_to_token[:4] == list(RESERVED)
        assert (v.id_of("<pad>"), v.id_of("<unk>")) == (PAD_ID, UNK_ID)

    def test_inverse_maps(self):
        v = build_vocabulary(_docs("c b b a a a"), min_count=1)
        for tok, i in v.token_to_id.items():
            assert v.id_to_token[i] == tok

    def test_rare_tokens_always_below_threshold(self):
        docs = _docs("a a a b b c", "d d a b e")
        for mc in (2, 3):
            v = build_vocabulary(docs, min_count=mc)
            counts = {}
            for d in docs:
                for t in d.article_clean.split():
                    counts[t] = counts.get(t, 0) + 1
            for tok, n in counts.items():
                assert (v.id_of(tok) == UNK_ID) == (n < mc)

    def test_empty(self):
        with pytest.raises(EmptyCorpusError):
            build_vocabulary([], min_count=1)


class TestTagEntities:
    def test_basic_replacement(self):
        gaz = Gazetteer({"new york": "location"})
        assert tag_entities(["visit", "new", "york", "soon"], gaz) == \
            ["visit", "<ent:location>", "soon"]

    def test_empty_gazetteer_identity(self):
        assert tag_entities(["a", "b"], Gazetteer()) == ["a", "b"]

    def test_longest_match_wins(self):
        gaz = Gazetteer({"new york": "location", "new york city": "location"})
        assert tag_entities(["new", "york", "city"], gaz) == ["<ent:location>"]

    def test_no_overlapping_replacements(self):
        gaz = Gazetteer({"a b": "x", "b c": "y"})
        tokens = ["a", "b", "c", "a", "b"]
        out = tag_entities(tokens, gaz)
        # leftmost-longest consumes 'a b' first; 'c' is left alone
        assert out == ["<ent:x>", "c", "<ent:x>"]

    def test_spans_reconstruct_input(self):
        gaz = Gazetteer({"big apple": "location", "joe": "person"})
        tokens = "joe went to the big apple with joe".split()
        out = tag_entities(tokens, gaz)
        rebuilt = []
        for tok in out:
            if tok == "<ent:location>":
                rebuilt += ["big", "apple"]
            elif tok == "<ent:person>":
                rebuilt += ["joe"]
            else:
                rebuilt.append(tok)
        assert rebuilt == tokens


class TestEncodeDecode:
    def test_unk_and_pad(self):
        v = _vocab({"the": 4, "cat": 5})
        out = encode(["the", "zorp", "cat"], v, maxlen=5)
        assert out.ids.tolist() == [4, 1, 5, 0, 0]
        assert out.true_length == 3

    def test_marker_only(self):
        v = _vocab({})
        out = encode([], v, maxlen=3, add_markers=True)
        assert out.ids.tolist() == [START_ID, END_ID, 0]
        assert out.true_length == 2

    def test_truncation(self):
        v = _vocab({"a": 4, "b": 5, "c": 6, "d": 7})
        out = encode(["a", "b", "c", "d"], v, maxlen=3)
        assert out.ids.tolist() == [4, 5, 6]
        assert out.true_length == 3

    def test_truncation_keeps_end_marker(self):
        v = _vocab({"a": 4, "b": 5, "c": 6, "d": 7})
        out = encode(["a", "b", "c", "d"], v, maxlen=4, add_markers=True)
        assert out.ids.tolist() == [START_ID, 4, 5, END_ID]
        assert out.true_length == 4

    def test_zero_maxlen(self):
        with pytest.raises(ZeroMaxlenError):
            encode(["a"], _vocab({}), maxlen=0)

    def test_decode_strips_markers(self):
        v = _vocab({"cat": 4})
        assert decode_ids(TokenIds(np.array([2, 4, 3, 0]), 3), v) == ["cat"]

    def test_unk_surfaces(self):
        assert decode_ids(TokenIds(np.array([1]), 1), _vocab({})) == ["<unk>"]

    def test_unknown_id(self):
        with pytest.raises(UnknownIdError):
            decode_ids(TokenIds(np.array([9]), 1), _vocab({}))

    @given(st.lists(st.sampled_from(["aa", "bb", "cc", "dd"]), max_size=8))
    def test_round_trip_in_vocab(self, tokens):
        v = _vocab({"aa": 4, "bb": 5, "cc": 6, "dd": 7})
        out = encode(tokens, v, maxlen=10, add_markers=True)
        assert decode_ids(out, v) == tokens


class TestEmbeddings:
    def test_file_rows_copied_verbatim(self, tmp_path):
        v = _vocab({"cat": 4})
        path = tmp_path / "emb.txt"
        path.write_text("cat 0.1 -0.2 0.3\ndog 1 2 3\n")
        emb = load_embeddings(path, v, dim=3, seed=0)
        np.testing.assert_array_equal(emb.values[4], [0.1, -0.2, 0.3])
        assert emb.rows == len(v) and emb.frozen

    def test_pad_row_zero(self, tmp_path):
        v = _vocab({"cat": 4})
        path = tmp_path / "emb.txt"
        path.write_text("<pad> 9 9 9\ncat 0.1 0.2 0.3\n")
        emb = load_embeddings(path, v, dim=3, seed=0)
        np.testing.assert_array_equal(emb.values[PAD_ID], [0.0, 0.0, 0.0])

    def test_missing_token_deterministic(self, tmp_path):
        v = _vocab({"cat": 4, "dog": 5})
        path = tmp_path / "emb.txt"
        path.write_text("cat 0.5 0.5 0.5\n")
        a = load_embeddings(path, v, dim=3, seed=7)
        b = load_embeddings(path, v, dim=3, seed=7)
        np.testing.assert_array_equal(a.values, b.values)
        assert np.all(np.abs(a.values[5]) <= 0.05)

    def test_dim_mismatch_even_out_of_vocab(self, tmp_path):
        v = _vocab({"cat": 4})
        path = tmp_path / "emb.txt"
        path.write_text("cat 0.1 0.2 0.3\nweird 1 2\n")
        with pytest.raises(DimMismatchError):
            load_embeddings(path, v, dim=3, seed=0)

    def test_random_embeddings_shape_and_pad(self):
        v = _vocab({"cat": 4})
        emb = random_embeddings(v, dim=8, seed=1, scale=0.5)
        assert emb.values.shape == (len(v), 8)
        np.testing.assert_array_equal(emb.values[PAD_ID], np.zeros(8))


class TestSerialization:
    def test_vocab_round_trip(self, tmp_path):
        v = build_vocabulary(_docs("b b a a a c"), min_count=2)
        path = tmp_path / "vocab.tsv"
        save_vocabulary(v, path)
        back = load_vocabulary(path)
        assert back.id_to_token == v.id_to_token
        assert back.counts == v.counts
        first = path.read_text()
        assert first.startswith("<pad>\t0\t0\n<unk>\t1\t0\n")

    def test_gazetteer_file(self, tmp_path):
        path = tmp_path / "gaz.tsv"
        path.write_text("New York\tlocation\njoe smith\tperson\n")
        gaz = load_gazetteer(path)
        assert gaz.entries == {"new york": "location", "joe smith": "person"}

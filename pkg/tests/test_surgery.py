import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charcsc.bpe import BpeModel, encode, load_model_dir, model_from_words
from charcsc.surgery import (
    SurgeryConfig,
    apply_surgery,
    crosses_into_chinese,
    embed_prune,
    is_chinese_char,
    read_embedding,
    read_id_map,
    verify_char_level,
    write_embedding,
    write_surgery_output,
)

from _models import CHINESE_POOL, random_alphabet, random_model, random_text

LITERAL = SurgeryConfig(mode="literal")
STRICT = SurgeryConfig(mode="strict")


def test_is_chinese_char():
    assert is_chinese_char("的")
    assert not is_chinese_char("A")
    assert is_chinese_char("㐀")
    assert not is_chinese_char("。")
    assert not is_chinese_char("的", SurgeryConfig(chinese_ranges=((0x3400, 0x4DBF),)))


def test_config_rejects_overlapping_ranges():
    with pytest.raises(ValueError):
        SurgeryConfig(chinese_ranges=((0x4E00, 0x9FFF), (0x9000, 0xA000)))
    with pytest.raises(ValueError):
        SurgeryConfig(mode="loose")


@pytest.mark.parametrize("config", [LITERAL, STRICT])
def test_toy_word_removal(config):
    model = model_from_words(["大量", "大量的"])
    result = apply_surgery(model, config)
    assert {w.decode() for w in result.removed_words} == {"大量", "大量的"}
    assert set(result.removed_merges) == {("大".encode(), "量".encode()), ("大量".encode(), "的".encode())}
    spans = encode(result.model, "大量的")
    assert [s.token.decode() for s in spans] == ["大", "量", "的"]


def test_fixed_point_without_chinese_words():
    model = model_from_words(["大", "量", "hello", "wor"])
    for config in (LITERAL, STRICT):
        result = apply_surgery(model, config)
        assert result.removed_words == [] and result.removed_merges == []
        assert result.model.merges == model.merges
        assert set(result.model.vocab) == set(model.vocab)


def test_compact_ids_preserve_order():
    model = model_from_words(["大量", "好的", "ok"])
    result = apply_surgery(model)
    old_ids = sorted(result.id_map)
    assert [result.id_map[o] for o in old_ids] == list(range(len(old_ids)))
    for tok, new in result.model.vocab.items():
        assert result.id_map[model.vocab[tok]] == new


def test_gap_preserving_ids():
    model = model_from_words(["大量", "ok"])
    result = apply_surgery(model, SurgeryConfig(compact_ids=False))
    assert all(old == new for old, new in result.id_map.items())
    assert model.vocab["大量".encode()] not in result.id_map


def test_crosses_into_chinese():
    de = "的".encode()
    assert not crosses_into_chinese(b"ab")
    assert not crosses_into_chinese(de)
    assert not crosses_into_chinese(de[:2])
    assert not crosses_into_chinese(de[1:])
    assert crosses_into_chinese(de[2:] + b"a")  # tail of 的 then 'a'
    assert crosses_into_chinese(b"a" + de[:1])  # 'a' then head of 的
    assert crosses_into_chinese(de[2:] + "量".encode()[:1])
    assert not crosses_into_chinese("é".encode() + b"a")
    # three continuation bytes cannot end a 3-byte CJK character
    assert not crosses_into_chinese("😀".encode()[1:] + b"a")


def test_strict_removes_boundary_fragment_token():
    de = "的".encode()
    vocab = {bytes([b]): b for b in range(256)}
    vocab[de[2:] + b"a"] = 256
    model = BpeModel(vocab, ((de[2:], b"a"),))
    assert len(encode(model, "的a")) == 3  # 0xE7, 0x9A, 0x84+a
    assert not verify_char_level(model, ["的a"]).ok
    assert apply_surgery(model, LITERAL).removed_words == []
    strict = apply_surgery(model, STRICT)
    assert strict.removed_words == [de[2:] + b"a"]
    assert verify_char_level(strict.model, ["的a"]).ok


class TestVerify:
    def test_original_model_violates(self):
        model = model_from_words(["大量", "大量的"])
        report = verify_char_level(model, ["大量的"])
        assert len(report.violations) == 1
        assert report.violations[0].text == "大量的"

    def test_strict_output_on_random_sentences(self):
        rng = random.Random(7)
        model = model_from_words(["大量", "大量的", "酒店", "的确", "公众形象", "ok"])
        result = apply_surgery(model, STRICT)
        corpus = ["".join(rng.choices(CHINESE_POOL, k=rng.randint(1, 20))) for _ in range(1000)]
        assert verify_char_level(result.model, corpus).ok

    def test_ascii_never_violates(self):
        rng = random.Random(3)
        for seed in range(20):
            model = random_model(random.Random(seed))
            corpus = [random_text(rng, list("abc xyz!?")) for _ in range(50)]
            assert verify_char_level(model, corpus).ok


def _models():
    for seed in range(60):
        rng = random.Random(seed)
        yield rng, random_model(rng)


@pytest.mark.parametrize("config", [LITERAL, STRICT])
def test_shrinkage_conservation_idempotence(config):
    for _, model in _models():
        result = apply_surgery(model, config)
        assert len(result.model.vocab) <= len(model.vocab)
        assert len(result.model.merges) <= len(model.merges)
        kept = set(result.model.vocab)
        removed = set(result.removed_words)
        assert kept.isdisjoint(removed)
        assert kept | removed == set(model.vocab)
        assert len(kept) + len(removed) == len(model.vocab)
        assert set(result.model.merges) <= set(model.merges)
        assert len(set(result.id_map.values())) == len(result.id_map)
        for a, b in result.model.merges:
            assert not {a, b, a + b} & removed
        again = apply_surgery(result.model, config)
        assert again.model == result.model
        assert again.removed_words == [] and again.removed_merges == []


@pytest.mark.parametrize("config", [LITERAL, STRICT])
def test_ascii_tokenization_preserved(config):
    for rng, model in _models():
        result = apply_surgery(model, config)
        for _ in range(10):
            text = random_text(rng, list("ab xyz"), 20)
            assert [s.token for s in encode(model, text)] == [s.token for s in encode(result.model, text)]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.text(alphabet=CHINESE_POOL + "ab，é", min_size=1, max_size=15), max_size=30))
def test_strict_soundness(seed, extra_sentences):
    rng = random.Random(seed)
    alphabet = random_alphabet(rng)
    model = random_model(rng, alphabet, n_merges=rng.randint(10, 40))
    result = apply_surgery(model, STRICT)
    corpus = [random_text(rng, alphabet) for _ in range(50)] + extra_sentences
    assert verify_char_level(result.model, corpus).ok


def test_output_directory(tmp_path):
    model = model_from_words(["大量", "大量的", "ok"])
    result = apply_surgery(model)
    write_surgery_output(result, tmp_path)
    report = json.loads((tmp_path / "surgery_report.json").read_text())
    assert report["removed_words"] == 2
    assert report["mode"] == "strict"
    assert report["old_vocab_size"] == len(model.vocab)
    assert read_id_map(tmp_path / "id_map.tsv") == result.id_map
    assert load_model_dir(tmp_path) == result.model


class TestEmbedPrune:
    def test_identity(self):
        m = np.arange(12, dtype=np.float32).reshape(4, 3)
        out = embed_prune(m, {i: i for i in range(4)})
        assert np.array_equal(out, m)

    def test_selection(self):
        m = np.arange(12, dtype=np.float32).reshape(4, 3)
        out = embed_prune(m, {0: 0, 2: 1, 3: 2})
        assert np.array_equal(out, m[[0, 2, 3]])
        assert out.tobytes() == m[[0, 2, 3]].tobytes()

    def test_out_of_range(self):
        m = np.zeros((4, 3), dtype=np.float32)
        with pytest.raises(IndexError):
            embed_prune(m, {9: 0})

    def test_surgery_id_map_drives_pruning(self):
        model = model_from_words(["大量", "大量的"])
        result = apply_surgery(model)
        rows = max(model.vocab.values()) + 1
        emb = np.random.default_rng(0).standard_normal((rows, 5)).astype(np.float32)
        pruned = embed_prune(emb, result.id_map)
        assert pruned.shape == (len(result.model.vocab), 5)
        for tok, new in result.model.vocab.items():
            assert np.array_equal(pruned[new], emb[model.vocab[tok]])

    def test_file_roundtrip(self, tmp_path):
        m = np.random.default_rng(1).standard_normal((7, 3)).astype(np.float32)
        write_embedding(tmp_path / "e.emb", m)
        raw = (tmp_path / "e.emb").read_bytes()
        assert raw[:4] == b"EMB1" and len(raw) == 16 + 7 * 3 * 4
        assert np.array_equal(read_embedding(tmp_path / "e.emb"), m)

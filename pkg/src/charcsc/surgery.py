"""Character-level tokenizer surgery for byte-level BPE models.

Removes multi-character Chinese tokens from the vocabulary along with every
merge that produces or consumes them, so that each Chinese character is
encoded as exactly one token.  Embedding rows are re-indexed to match.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .bpe import BpeModel, TokenSpan, encode, save_model

DEFAULT_CHINESE_RANGES: tuple[tuple[int, int], ...] = ((0x3400, 0x4DBF), (0x4E00, 0x9FFF))
MODES = ("literal", "strict")


@dataclass(frozen=True)
class SurgeryConfig:
    mode: str = "strict"
    chinese_ranges: tuple[tuple[int, int], ...] = DEFAULT_CHINESE_RANGES
    compact_ids: bool = True

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        ranges = tuple(sorted((int(lo), int(hi)) for lo, hi in self.chinese_ranges))
        for lo, hi in ranges:
            if lo > hi:
                raise ValueError(f"empty range {lo:#x}-{hi:#x}")
        for (_, hi), (lo, _) in zip(ranges, ranges[1:]):
            if lo <= hi:
                raise ValueError("chinese ranges overlap")
        object.__setattr__(self, "chinese_ranges", ranges)

    @cached_property
    def _fragments(self) -> tuple[frozenset[bytes], frozenset[bytes]]:
        # proper UTF-8 prefixes / suffixes of every configured character
        prefixes, suffixes = set(), set()
        for lo, hi in self.chinese_ranges:
            for cp in range(lo, hi + 1):
                enc = chr(cp).encode("utf-8")
                for k in range(1, len(enc)):
                    prefixes.add(enc[:k])
                    suffixes.add(enc[k:])
        return frozenset(prefixes), frozenset(suffixes)


DEFAULT_CONFIG = SurgeryConfig()


def is_chinese_char(c: str, config: SurgeryConfig = DEFAULT_CONFIG) -> bool:
    cp = ord(c)
    return any(lo <= cp <= hi for lo, hi in config.chinese_ranges)


def _is_start_byte(b: int) -> bool:
    return b & 0xC0 != 0x80


def crosses_into_chinese(token: bytes, config: SurgeryConfig = DEFAULT_CONFIG) -> bool:
    """True if the byte string can straddle a character boundary next to a
    (possibly partial) Chinese character in some valid UTF-8 text."""
    starts = [k for k, b in enumerate(token) if _is_start_byte(b)]
    if not any(k > 0 for k in starts):
        return False  # lies inside a single character
    prefixes, suffixes = config._fragments
    if starts[0] > 0 and token[: starts[0]] in suffixes:
        return True
    tail = token[starts[-1] :]
    if tail in prefixes:
        return True
    text = token.decode("utf-8", errors="replace")
    return any(is_chinese_char(c, config) for c in text)


def _literal_word(text: str, config: SurgeryConfig) -> bool:
    return len(text) > 1 and all(is_chinese_char(c, config) for c in text)


def _strict_word(text: str, config: SurgeryConfig) -> bool:
    return len(text) > 1 and any(is_chinese_char(c, config) for c in text)


@dataclass
class SurgeryResult:
    model: BpeModel
    id_map: dict[int, int]
    removed_words: list[bytes]
    removed_merges: list[tuple[bytes, bytes]]
    config: SurgeryConfig = field(default=DEFAULT_CONFIG)
    old_size: int = 0
    old_merges: int = 0

    @property
    def new_size(self) -> int:
        return len(self.model.vocab)

    @property
    def ratio(self) -> float:
        return self.new_size / self.old_size if self.old_size else 1.0

    def report(self) -> dict:
        return {
            "mode": self.config.mode,
            "compact_ids": self.config.compact_ids,
            "old_vocab_size": self.old_size,
            "new_vocab_size": self.new_size,
            "ratio": self.ratio,
            "old_merges": self.old_merges,
            "new_merges": len(self.model.merges),
            "removed_words": len(self.removed_words),
            "removed_merges": len(self.removed_merges),
        }


def apply_surgery(model: BpeModel, config: SurgeryConfig = DEFAULT_CONFIG) -> SurgeryResult:
    """Drop multi-character Chinese tokens and every merge touching them."""
    strict = config.mode == "strict"
    removed: set[bytes] = set()
    for tok in model.vocab:
        text = tok.decode("utf-8", errors="replace")
        if strict:
            if _strict_word(text, config) or crosses_into_chinese(tok, config):
                removed.add(tok)
        elif _literal_word(text, config):
            removed.add(tok)

    kept_merges, removed_merges = [], []
    for a, b in model.merges:
        product = a + b
        drop = product in removed or a in removed or b in removed
        if strict and not drop:
            text = product.decode("utf-8", errors="replace")
            drop = len(text) > 1 and any(is_chinese_char(c, config) for c in text)
        (removed_merges if drop else kept_merges).append((a, b))

    retained = sorted(
        ((idx, tok) for tok, idx in model.vocab.items() if tok not in removed),
        key=lambda it: it[0],
    )
    if config.compact_ids:
        id_map = {old: new for new, (old, _) in enumerate(retained)}
    else:
        id_map = {old: old for old, _ in retained}
    new_vocab = {tok: id_map[old] for old, tok in retained}
    removed_words = sorted(removed, key=lambda t: model.vocab[t])

    return SurgeryResult(
        model=BpeModel(new_vocab, tuple(kept_merges), model.pretokenizer),
        id_map=id_map,
        removed_words=removed_words,
        removed_merges=removed_merges,
        config=config,
        old_size=len(model.vocab),
        old_merges=len(model.merges),
    )


def write_surgery_output(result: SurgeryResult, path: str | Path) -> None:
    path = Path(path)
    save_model(result.model, path)
    with open(path / "id_map.tsv", "w", encoding="utf-8") as f:
        for old, new in sorted(result.id_map.items()):
            f.write(f"{old}\t{new}\n")
    (path / "surgery_report.json").write_text(
        json.dumps(result.report(), indent=2) + "\n", encoding="utf-8"
    )


def read_id_map(path: str | Path) -> dict[int, int]:
    id_map = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                old, new = line.rstrip("\n").split("\t")
                id_map[int(old)] = int(new)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 'old-id<TAB>new-id'") from None
    return id_map


# ---------------------------------------------------------------------------
# verification


@dataclass
class Violation:
    sentence: str
    span: TokenSpan

    @property
    def text(self) -> str:
        return self.sentence[self.span.char_start : self.span.char_end]


@dataclass
class VerifyReport:
    sentences: int
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


def span_violates(sentence: str, span: TokenSpan, config: SurgeryConfig = DEFAULT_CONFIG) -> bool:
    if span.n_chars <= 1:
        return False
    return any(is_chinese_char(c, config) for c in sentence[span.char_start : span.char_end])


def verify_char_level(
    model: BpeModel, corpus: Iterable[str], config: SurgeryConfig = DEFAULT_CONFIG
) -> VerifyReport:
    violations = []
    n = 0
    for sentence in corpus:
        n += 1
        for span in encode(model, sentence):
            if span_violates(sentence, span, config):
                violations.append(Violation(sentence, span))
    return VerifyReport(n, violations)


# ---------------------------------------------------------------------------
# embeddings

_EMB_MAGIC = b"EMB1"
_EMB_HEADER = struct.Struct("<4sII4x")


def embed_prune(matrix: np.ndarray, id_map: Mapping[int, int]) -> np.ndarray:
    """Select embedding rows so that output row ``new`` is input row ``old``."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {matrix.shape}")
    if not id_map:
        return matrix[:0].copy()
    order = sorted(id_map.items(), key=lambda kv: kv[1])
    if [new for _, new in order] != list(range(len(order))):
        raise ValueError("id map must assign dense new ids 0..n-1")
    old_ids = np.fromiter((old for old, _ in order), dtype=np.int64, count=len(order))
    if old_ids.min() < 0 or old_ids.max() >= matrix.shape[0]:
        raise IndexError(
            f"id map references row {int(old_ids.max())} but matrix has {matrix.shape[0]} rows"
        )
    return matrix[old_ids].copy()


def write_embedding(path: str | Path, matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    rows, dim = matrix.shape
    with open(path, "wb") as f:
        f.write(_EMB_HEADER.pack(_EMB_MAGIC, rows, dim))
        f.write(matrix.tobytes())


def read_embedding(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _EMB_HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, rows, dim = _EMB_HEADER.unpack_from(data)
    if magic != _EMB_MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    expected = _EMB_HEADER.size + rows * dim * 4
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")
    return np.frombuffer(data, dtype="<f4", offset=_EMB_HEADER.size).reshape(rows, dim).copy()


"""Byte-level BPE: model loading, encoding with character spans, decoding.

Token strings are raw bytes internally. The GPT-2 printable-byte remapping
only exists at the file boundary (``vocab.json`` / ``merges.txt``).
"""

from __future__ import annotations

import base64
import heapq
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

PRETOKENIZERS = ("identity", "whitespace", "categories")

_WHITESPACE_RE = re.compile(r"\s+|\S+")
_CATEGORIES_RE = re.compile(r"[^\W\d_]+|\d+|\s+|_+|[^\w\s]+")


class ModelFormatError(ValueError):
    """Raised for malformed or inconsistent vocabulary / merge documents."""


def bytes_to_unicode() -> dict[int, str]:
    """GPT-2's reversible byte -> printable character table."""
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("¡"), ord("¬") + 1))
        + list(range(ord("®"), ord("ÿ") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, map(chr, cs)))


BYTE_ENCODER = bytes_to_unicode()
BYTE_DECODER = {c: b for b, c in BYTE_ENCODER.items()}


def token_to_str(token: bytes) -> str:
    return "".join(BYTE_ENCODER[b] for b in token)


def str_to_token(s: str) -> bytes:
    try:
        return bytes(BYTE_DECODER[c] for c in s)
    except KeyError as exc:
        raise ModelFormatError(f"token {s!r} contains a character outside the byte map") from exc


@dataclass(frozen=True)
class TokenSpan:
    token_id: int
    token: bytes
    byte_start: int
    byte_end: int
    char_start: int
    char_end: int

    @property
    def n_chars(self) -> int:
        return self.char_end - self.char_start


@dataclass(frozen=True)
class BpeModel:
    """Vocabulary (bytes -> id) plus merge rules ordered by rank."""

    vocab: Mapping[bytes, int]
    merges: tuple[tuple[bytes, bytes], ...]
    pretokenizer: str = "identity"
    id_to_token: dict[int, bytes] = field(init=False, repr=False, compare=False)
    ranks: dict[tuple[bytes, bytes], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vocab", dict(self.vocab))
        object.__setattr__(self, "merges", tuple((bytes(a), bytes(b)) for a, b in self.merges))
        if self.pretokenizer not in PRETOKENIZERS:
            raise ModelFormatError(f"unknown pretokenizer {self.pretokenizer!r}")

        id_to_token: dict[int, bytes] = {}
        for tok, idx in self.vocab.items():
            if not isinstance(idx, int) or isinstance(idx, bool) or idx < 0:
                raise ModelFormatError(f"token {tok!r} has invalid id {idx!r}")
            if idx in id_to_token:
                raise ModelFormatError(
                    f"duplicate id {idx} for tokens {id_to_token[idx]!r} and {tok!r}"
                )
            id_to_token[idx] = tok
        missing = [b for b in range(256) if bytes([b]) not in self.vocab]
        if missing:
            raise ModelFormatError(f"missing single-byte tokens, e.g. {bytes([missing[0]])!r}")

        ranks: dict[tuple[bytes, bytes], int] = {}
        for rank, (a, b) in enumerate(self.merges):
            for operand in (a, b, a + b):
                if operand not in self.vocab:
                    raise ModelFormatError(
                        f"unknown merge operand {operand!r} in merge #{rank} ({a!r}, {b!r})"
                    )
            if (a, b) in ranks:
                raise ModelFormatError(f"duplicate merge ({a!r}, {b!r}) at rank {rank}")
            ranks[(a, b)] = rank
        object.__setattr__(self, "id_to_token", id_to_token)
        object.__setattr__(self, "ranks", ranks)

    def __len__(self) -> int:
        return len(self.vocab)

    def with_pretokenizer(self, pretokenizer: str) -> "BpeModel":
        return BpeModel(self.vocab, self.merges, pretokenizer)


# ---------------------------------------------------------------------------
# loading / saving


def parse_vocab(text: str) -> dict[bytes, int]:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"vocab: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ModelFormatError("vocab: expected a JSON object of token -> id")
    vocab: dict[bytes, int] = {}
    seen: dict[int, str] = {}
    for s, idx in raw.items():
        if not isinstance(idx, int) or isinstance(idx, bool):
            raise ModelFormatError(f"vocab: id for {s!r} is not an integer")
        if idx in seen:
            raise ModelFormatError(f"duplicate id {idx} for tokens {seen[idx]!r} and {s!r}")
        seen[idx] = s
        vocab[str_to_token(s)] = idx
    return vocab


def parse_merges(text: str) -> list[tuple[bytes, bytes]]:
    merges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if lineno == 1 and line.startswith("#version"):
            continue
        if not line.strip():
            continue
        parts = line.split(" ")
        if len(parts) != 2 or not all(parts):
            raise ModelFormatError(f"merges line {lineno}: expected two space-separated tokens")
        try:
            merges.append((str_to_token(parts[0]), str_to_token(parts[1])))
        except ModelFormatError as exc:
            raise ModelFormatError(f"merges line {lineno}: {exc}") from None
    return merges


def load_model(
    vocab_path: str | Path, merges_path: str | Path, pretokenizer: str = "identity"
) -> BpeModel:
    vocab = parse_vocab(Path(vocab_path).read_text(encoding="utf-8"))
    merges = parse_merges(Path(merges_path).read_text(encoding="utf-8"))
    return BpeModel(vocab, tuple(merges), pretokenizer)


def load_model_dir(path: str | Path, pretokenizer: str = "identity") -> BpeModel:
    path = Path(path)
    return load_model(path / "vocab.json", path / "merges.txt", pretokenizer)


def save_model(model: BpeModel, path: str | Path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    vocab = {token_to_str(t): i for t, i in sorted(model.vocab.items(), key=lambda kv: kv[1])}
    (path / "vocab.json").write_text(json.dumps(vocab, ensure_ascii=False), encoding="utf-8")
    lines = ["#version: 0.2"]
    lines += [f"{token_to_str(a)} {token_to_str(b)}" for a, b in model.merges]
    (path / "merges.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _bpe_split(ranks: Mapping[bytes, int], token: bytes, max_rank: int) -> list[bytes]:
    parts = [token[i : i + 1] for i in range(len(token))]
    while True:
        min_idx, min_rank = -1, max_rank
        for i in range(len(parts) - 1):
            r = ranks.get(parts[i] + parts[i + 1])
            if r is not None and r < min_rank:
                min_idx, min_rank = i, r
        if min_idx < 0:
            return parts
        parts[min_idx : min_idx + 2] = [parts[min_idx] + parts[min_idx + 1]]


def model_from_ranks(ranks: Mapping[bytes, int], pretokenizer: str = "identity") -> BpeModel:
    """Build a merge-list model from rank-only BPE data (tiktoken layout).

    The merge for each multi-byte token is the final two-part split reached by
    running BPE on its own bytes with only lower-ranked tokens.
    """
    merges = []
    for token, rank in sorted(ranks.items(), key=lambda kv: kv[1]):
        if len(token) < 2:
            continue
        parts = _bpe_split(ranks, token, rank)
        if len(parts) == 2:
            merges.append((rank, parts[0], parts[1]))
    merges.sort()
    return BpeModel(dict(ranks), tuple((a, b) for _, a, b in merges), pretokenizer)


def load_tiktoken(path: str | Path, pretokenizer: str = "identity") -> BpeModel:
    ranks: dict[bytes, int] = {}
    with open(path, "rb") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                tok, rank = line.split()
                ranks[base64.b64decode(tok)] = int(rank)
            except ValueError as exc:
                raise ModelFormatError(f"{path}:{lineno}: malformed tiktoken line") from exc
    return model_from_ranks(ranks, pretokenizer)


def model_from_words(words: Iterable[str], pretokenizer: str = "identity") -> BpeModel:
    """Small model whose merges spell out each word left to right.

    Every character is first assembled from its UTF-8 bytes, then each word
    from its characters; ranks follow first appearance.
    """
    vocab = {bytes([b]): b for b in range(256)}
    merges: list[tuple[bytes, bytes]] = []
    seen: set[tuple[bytes, bytes]] = set()

    def add(a: bytes, b: bytes) -> bytes:
        if (a, b) not in seen:
            seen.add((a, b))
            merges.append((a, b))
            vocab.setdefault(a + b, len(vocab))
        return a + b

    words = list(words)
    for word in words:
        for ch in word:
            enc = ch.encode("utf-8")
            acc = enc[:1]
            for i in range(1, len(enc)):
                acc = add(acc, enc[i : i + 1])
    for word in words:
        chars = [ch.encode("utf-8") for ch in word]
        acc = chars[0]
        for nxt in chars[1:]:
            acc = add(acc, nxt)
    return BpeModel(vocab, tuple(merges), pretokenizer)


# ---------------------------------------------------------------------------
# encoding / decoding


def pretokenize(text: str, mode: str = "identity") -> list[str]:
    if not text:
        return []
    if mode == "identity":
        return [text]
    if mode == "whitespace":
        return _WHITESPACE_RE.findall(text)
    if mode == "categories":
        return _CATEGORIES_RE.findall(text)
    raise ValueError(f"unknown pretokenizer {mode!r}")


def bpe_segment(ranks: Mapping[tuple[bytes, bytes], int], data: bytes) -> list[bytes]:
    """Greedy lowest-rank-first merging of one pretokenized segment.

    Each pass merges every non-overlapping occurrence of the best pair, left
    to right.  Pairs live in a heap keyed by (rank, position) over a linked
    list of parts; stale entries are skipped when popped.
    """
    parts = [data[i : i + 1] for i in range(len(data))]
    n = len(parts)
    if n < 2:
        return parts
    nxt = list(range(1, n)) + [-1]
    prv = list(range(-1, n - 1))
    alive = [True] * n
    get = ranks.get
    heap = [(r, i) for i in range(n - 1) if (r := get((parts[i], parts[i + 1]))) is not None]
    heapq.heapify(heap)
    while heap:
        rank = heap[0][0]
        touched = []
        # one pass: all entries of this rank, in position order
        while heap and heap[0][0] == rank:
            _, i = heapq.heappop(heap)
            j = nxt[i]
            if not alive[i] or j < 0 or get((parts[i], parts[j])) != rank:
                continue
            parts[i] += parts[j]
            alive[j] = False
            nxt[i] = nxt[j]
            if nxt[j] >= 0:
                prv[nxt[j]] = i
            touched.append(i)
        for i in touched:
            if not alive[i]:
                continue
            p, j = prv[i], nxt[i]
            if p >= 0 and (r := get((parts[p], parts[i]))) is not None:
                heapq.heappush(heap, (r, p))
            if j >= 0 and (r := get((parts[i], parts[j]))) is not None:
                heapq.heappush(heap, (r, i))
    return [parts[i] for i in range(n) if alive[i]]


def encode(model: BpeModel, text: str) -> list[TokenSpan]:
    data = text.encode("utf-8")
    # char index owning each byte
    byte_to_char = []
    for ci, ch in enumerate(text):
        byte_to_char.extend([ci] * len(ch.encode("utf-8")))

    spans: list[TokenSpan] = []
    pos = 0
    for segment in pretokenize(text, model.pretokenizer):
        for tok in bpe_segment(model.ranks, segment.encode("utf-8")):
            end = pos + len(tok)
            spans.append(
                TokenSpan(
                    token_id=model.vocab[tok],
                    token=tok,
                    byte_start=pos,
                    byte_end=end,
                    char_start=byte_to_char[pos],
                    char_end=byte_to_char[end - 1] + 1,
                )
            )
            pos = end
    assert pos == len(data)
    return spans


def encode_ids(model: BpeModel, text: str) -> list[int]:
    return [s.token_id for s in encode(model, text)]


def decode(model: BpeModel, ids: Iterable[int]) -> str:
    chunks = []
    for i in ids:
        try:
            chunks.append(model.id_to_token[i])
        except KeyError:
            raise KeyError(f"unknown token id {i}") from None
    return b"".join(chunks).decode("utf-8", errors="replace")


def token_strings(model: BpeModel, spans: Sequence[TokenSpan]) -> list[str]:
    """Lossy-decoded surface string of each span (for dumps and diagnostics)."""
    return [s.token.decode("utf-8", errors="replace") for s in spans]

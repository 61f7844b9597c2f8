"""Interpolated add-alpha character n-gram language model.

Binary layout (little-endian)::

    b"NGLM" | u16 version | u16 order | f64 alpha | f64 * order lambdas
    u32 vocab size | (u16 byte length, UTF-8 symbol) * vocab size
    for each order j = 1..order:
        u64 entries | (u32 * (j-1) context symbol ids, u32 char id, u64 count) * entries

Context ids index the vocabulary; 0xFFFFFFFF is the sentence-start pad.
"""

from __future__ import annotations

import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

BOS = "<s>"
UNK = "<unk>"
MAGIC = b"NGLM"
VERSION = 1
_BOS_ID = 0xFFFFFFFF

Context = tuple[str, ...]


@dataclass(frozen=True)
class NgramLm:
    order: int
    alpha: float
    lambdas: tuple[float, ...]
    vocab: tuple[str, ...]
    # counts[j][(context, char)] for n-gram order j + 1
    counts: tuple[dict[tuple[Context, str], int], ...] = field(repr=False)
    context_totals: tuple[dict[Context, int], ...] = field(init=False, repr=False, compare=False)
    _vocab_set: frozenset[str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 2 <= self.order <= 5:
            raise ValueError(f"order must be in 2..5, got {self.order}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        check_lambdas(self.lambdas, self.order)
        if UNK not in self.vocab:
            raise ValueError("vocabulary must contain the unknown symbol")
        totals = []
        for table in self.counts:
            t: Counter = Counter()
            for (ctx, _), n in table.items():
                t[ctx] += n
            totals.append(dict(t))
        object.__setattr__(self, "context_totals", tuple(totals))
        object.__setattr__(self, "_vocab_set", frozenset(self.vocab))

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def symbol(self, ch: str) -> str:
        return ch if ch in self._vocab_set else UNK

    def initial_context(self) -> Context:
        return (BOS,) * (self.order - 1)

    def prob(self, ch: str, history: Context) -> float:
        """P(ch | last order-1 symbols of history); history must be padded."""
        ch = self.symbol(ch)
        v = self.vocab_size
        total = 0.0
        for j, lam in enumerate(self.lambdas):
            if lam == 0.0:
                continue
            ctx = history[len(history) - j :] if j else ()
            den = self.context_totals[j].get(ctx, 0) + self.alpha * v
            if den == 0:
                total += lam / v
            else:
                total += lam * (self.counts[j].get((ctx, ch), 0) + self.alpha) / den
        return total

    def logprob(self, ch: str, history: Context) -> float:
        p = self.prob(ch, history)
        return math.log(p) if p > 0 else -math.inf

    def sentence_logprob(self, text: str) -> float:
        hist = self.initial_context()
        lp = 0.0
        for ch in text:
            lp += self.logprob(ch, hist)
            hist = (hist + (self.symbol(ch),))[1:]
        return lp


def check_lambdas(lambdas: Sequence[float], order: int) -> None:
    if len(lambdas) != order:
        raise ValueError(f"need {order} interpolation weights, got {len(lambdas)}")
    if any(lam < 0 for lam in lambdas):
        raise ValueError("interpolation weights must be non-negative")
    if abs(sum(lambdas) - 1.0) > 1e-9:
        raise ValueError(f"interpolation weights must sum to 1, got {sum(lambdas)}")


def train_lm(
    corpus: Iterable[str],
    order: int = 3,
    alpha: float = 0.1,
    lambdas: Sequence[float] | None = None,
) -> NgramLm:
    corpus = [s for s in corpus]
    if not corpus or not any(corpus):
        raise ValueError("empty training corpus")
    if order < 2:
        raise ValueError("order must be at least 2")
    lambdas = tuple(float(x) for x in lambdas) if lambdas is not None else (1.0 / order,) * order
    check_lambdas(lambdas, order)

    counts: list[Counter] = [Counter() for _ in range(order)]
    chars: set[str] = set()
    for sentence in corpus:
        chars.update(sentence)
        padded = (BOS,) * (order - 1) + tuple(sentence)
        for t in range(order - 1, len(padded)):
            ch = padded[t]
            for j in range(order):
                counts[j][(padded[t - j : t], ch)] += 1
    vocab = tuple(sorted(chars)) + (UNK,)
    return NgramLm(order, float(alpha), lambdas, vocab, tuple(dict(c) for c in counts))


def perplexity(lm: NgramLm, text: str) -> float:
    if not text:
        raise ValueError("perplexity of empty text is undefined")
    return math.exp(-lm.sentence_logprob(text) / len(text))


# ---------------------------------------------------------------------------
# binary I/O


def save_lm(lm: NgramLm, path: str | Path) -> None:
    ids = {s: i for i, s in enumerate(lm.vocab)}

    def sym_id(s: str) -> int:
        return _BOS_ID if s == BOS else ids[s]

    out = bytearray()
    out += MAGIC + struct.pack("<HHd", VERSION, lm.order, lm.alpha)
    out += struct.pack(f"<{lm.order}d", *lm.lambdas)
    out += struct.pack("<I", len(lm.vocab))
    for s in lm.vocab:
        enc = s.encode("utf-8")
        out += struct.pack("<H", len(enc)) + enc
    for j, table in enumerate(lm.counts):
        out += struct.pack("<Q", len(table))
        for (ctx, ch), n in sorted(table.items(), key=lambda kv: ([sym_id(s) for s in kv[0][0]], ids[kv[0][1]])):
            out += struct.pack(f"<{j}I", *(sym_id(s) for s in ctx))
            out += struct.pack("<IQ", ids[ch], n)
    Path(path).write_bytes(bytes(out))


def load_lm(path: str | Path) -> NgramLm:
    data = Path(path).read_bytes()
    pos = 0

    def take(fmt: str):
        nonlocal pos
        size = struct.calcsize(fmt)
        if pos + size > len(data):
            raise ValueError(f"{path}: truncated LM file at byte {pos}")
        vals = struct.unpack_from(fmt, data, pos)
        pos += size
        return vals

    if data[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic {data[:4]!r}")
    pos = 4
    version, order, alpha = take("<HHd")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported LM version {version}")
    lambdas = take(f"<{order}d")
    (n_vocab,) = take("<I")
    vocab = []
    for _ in range(n_vocab):
        (length,) = take("<H")
        if pos + length > len(data):
            raise ValueError(f"{path}: truncated vocabulary")
        vocab.append(data[pos : pos + length].decode("utf-8"))
        pos += length

    def sym(i: int) -> str:
        return BOS if i == _BOS_ID else vocab[i]

    counts = []
    for j in range(order):
        (entries,) = take("<Q")
        table = {}
        for _ in range(entries):
            ctx = tuple(sym(i) for i in take(f"<{j}I"))
            ch_id, n = take("<IQ")
            table[(ctx, vocab[ch_id])] = n
        counts.append(table)
    if pos != len(data):
        raise ValueError(f"{path}: {len(data) - pos} trailing bytes")
    return NgramLm(order, alpha, tuple(lambdas), tuple(vocab), tuple(counts))

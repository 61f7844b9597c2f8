"""Character edit alignment, equal-length repair and tokenization diagnosis."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .bpe import BpeModel, encode

EQUAL, SUBSTITUTE, INSERT, DELETE = "equal", "substitute", "insert", "delete"

ALIGNED = "aligned"
MULTI_TO_ONE = "multi-to-one"
SHIFTED_BOUNDARY = "shifted-boundary"


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


@dataclass(frozen=True)
class CscTriple:
    """Source, reference and (optional) hypothesis of one CSC example."""

    source: str
    reference: str
    hypothesis: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "source", nfc(self.source))
        object.__setattr__(self, "reference", nfc(self.reference))
        if self.hypothesis is not None:
            object.__setattr__(self, "hypothesis", nfc(self.hypothesis))
        if len(self.reference) != len(self.source):
            raise ValueError(
                f"reference length {len(self.reference)} != source length {len(self.source)}"
            )

    @property
    def n(self) -> int:
        return len(self.source)


@dataclass(frozen=True)
class EditOp:
    kind: str
    src_start: int
    src_end: int
    tgt_start: int
    tgt_end: int


def levenshtein_table(a: str, b: str) -> list[list[int]]:
    n, m = len(a), len(b)
    prev = list(range(m + 1))
    table = [prev]
    for i in range(1, n + 1):
        row = [i] + [0] * m
        ai = a[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev[j - 1] + (ai != b[j - 1]),
                prev[j] + 1,
                row[j - 1] + 1,
            )
        table.append(row)
        prev = row
    return table


def char_edit_script(a: str, b: str) -> list[EditOp]:
    """Minimal unit-cost edit script turning ``a`` into ``b``.

    Backtrace ties are broken equal > substitute > delete > insert. Runs of
    equal, insert and delete operations are coalesced; substitutions stay
    one character each.
    """
    d = levenshtein_table(a, b)
    i, j = len(a), len(b)
    steps: list[str] = []
    while i > 0 or j > 0:
        cur = d[i][j]
        if i > 0 and j > 0 and a[i - 1] == b[j - 1] and d[i - 1][j - 1] == cur:
            steps.append(EQUAL)
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i - 1][j - 1] + 1 == cur:
            steps.append(SUBSTITUTE)
            i, j = i - 1, j - 1
        elif i > 0 and d[i - 1][j] + 1 == cur:
            steps.append(DELETE)
            i -= 1
        else:
            steps.append(INSERT)
            j -= 1
    steps.reverse()

    ops: list[EditOp] = []
    i = j = 0
    for kind in steps:
        di = 0 if kind == INSERT else 1
        dj = 0 if kind == DELETE else 1
        last = ops[-1] if ops else None
        if last is not None and last.kind == kind and kind != SUBSTITUTE:
            ops[-1] = EditOp(kind, last.src_start, i + di, last.tgt_start, j + dj)
        else:
            ops.append(EditOp(kind, i, i + di, j, j + dj))
        i, j = i + di, j + dj
    return ops


def edit_distance(ops: Iterable[EditOp]) -> int:
    cost = 0
    for op in ops:
        if op.kind != EQUAL:
            cost += max(op.src_end - op.src_start, op.tgt_end - op.tgt_start)
    return cost


def repair_equal_length(source: str, hypothesis: str) -> str:
    """Undo insertions and deletions so the hypothesis has the source length.

    An equal-length hypothesis is returned unchanged: it is read as pure
    substitutions even when an alignment with indels would be cheaper.
    """
    if len(source) == len(hypothesis):
        return hypothesis
    out = []
    for op in char_edit_script(source, hypothesis):
        if op.kind in (EQUAL, SUBSTITUTE):
            out.append(hypothesis[op.tgt_start : op.tgt_end])
        elif op.kind == DELETE:
            out.append(source[op.src_start : op.src_end])
    return "".join(out)


@dataclass(frozen=True)
class AlignmentDiagnosis:
    source_tokens: tuple[str, ...]
    reference_tokens: tuple[str, ...]
    token_count_equal: bool
    char_aligned: bool

    @property
    def scenario(self) -> str:
        if not self.token_count_equal:
            return MULTI_TO_ONE
        if not self.char_aligned:
            return SHIFTED_BOUNDARY
        return ALIGNED


def diagnose_tokenization(model: BpeModel, source: str, reference: str) -> AlignmentDiagnosis:
    source, reference = nfc(source), nfc(reference)
    if len(source) != len(reference):
        raise ValueError(
            f"length mismatch: source has {len(source)} characters, reference {len(reference)}"
        )
    src = encode(model, source)
    ref = encode(model, reference)
    src_ranges = {(s.char_start, s.char_end) for s in src}
    return AlignmentDiagnosis(
        source_tokens=tuple(source[s.char_start : s.char_end] for s in src),
        reference_tokens=tuple(reference[s.char_start : s.char_end] for s in ref),
        token_count_equal=len(src) == len(ref),
        char_aligned=all((s.char_start, s.char_end) in src_ranges for s in ref),
    )


def scenario_counts(model: BpeModel, pairs: Iterable[tuple[str, str]]) -> Counter:
    counts: Counter = Counter({ALIGNED: 0, MULTI_TO_ONE: 0, SHIFTED_BOUNDARY: 0})
    for source, reference in pairs:
        counts[diagnose_tokenization(model, source, reference).scenario] += 1
    return counts

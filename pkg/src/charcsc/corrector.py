"""Character-by-character noisy-channel corrector.

Each source character either copies itself (probability 1 - epsilon) or is
replaced by a phonetically confusable character.  A character n-gram LM
scores the output; a left-to-right beam search picks the best sentence.
The output always has the source length and only uses confusion-set
substitutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .lm import NgramLm
from .phonology import PinyinTable
from .surgery import is_chinese_char

ConfusionSet = Mapping[str, frozenset[str]]


def build_confusion(
    table: PinyinTable, chars: Iterable[str], fuzzy: bool = False
) -> dict[str, frozenset[str]]:
    """Confusion sets over ``chars``: same pinyin ignoring tone (optionally fuzzy)."""
    pool = {c for c in chars if c in table}
    return {
        c: frozenset((table.homophones(c, fuzzy) & pool) | {c})
        for c in sorted(pool)
    }


def check_confusion(confusion: ConfusionSet) -> None:
    for key, members in confusion.items():
        if key not in members:
            raise ValueError(f"confusion set of {key!r} does not contain it")
        for m in members:
            if m != key and not is_chinese_char(m):
                raise ValueError(f"confusion member {m!r} of {key!r} is not a Chinese character")


@dataclass(frozen=True)
class ChannelModel:
    epsilon: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")

    def prob(self, candidate: str, source: str, confusion: ConfusionSet) -> float:
        members = confusion.get(source)
        if members is None or len(members) == 1:
            return 1.0 if candidate == source else 0.0
        if candidate == source:
            return 1.0 - self.epsilon
        if candidate not in members:
            return 0.0
        return self.epsilon / (len(members) - 1)

    def logprob(self, candidate: str, source: str, confusion: ConfusionSet) -> float:
        p = self.prob(candidate, source, confusion)
        return math.log(p) if p > 0 else -math.inf


@dataclass(frozen=True)
class CorrectorConfig:
    order: int = 3
    alpha: float = 0.1
    epsilon: float = 0.05
    beam: int = 8
    fuzzy: bool = False


def candidates(ch: str, confusion: ConfusionSet) -> list[str]:
    return sorted(confusion.get(ch, (ch,)))


def _beam_search(
    lm: NgramLm,
    channel: ChannelModel,
    confusion: ConfusionSet,
    source: str,
    width: int,
) -> tuple[str, float, bool]:
    # hypotheses ending in the same LM context are recombined
    hyps: list[tuple[float, str, tuple[str, ...]]] = [(0.0, "", lm.initial_context())]
    pruned = False
    for x in source:
        options = [(c, channel.logprob(c, x, confusion)) for c in candidates(x, confusion)]
        options = [(c, lp) for c, lp in options if lp > -math.inf]
        best: dict[tuple[str, ...], tuple[float, str]] = {}
        for score, out, ctx in hyps:
            for c, ch_lp in options:
                s = score + ch_lp + lm.logprob(c, ctx)
                new_ctx = (ctx + (lm.symbol(c),))[1:]
                o = out + c
                prev = best.get(new_ctx)
                if prev is None or (-s, o) < (-prev[0], prev[1]):
                    best[new_ctx] = (s, o)
        ranked = sorted(((s, o, ctx) for ctx, (s, o) in best.items()), key=lambda h: (-h[0], h[1]))
        pruned = pruned or len(ranked) > width
        hyps = ranked[:width]
    score, out, _ = hyps[0]
    return out, score, pruned


def correct_scored(
    lm: NgramLm,
    channel: ChannelModel,
    confusion: ConfusionSet,
    source: str,
    beam: int = 8,
) -> tuple[str, float]:
    """Best output and its joint log score.

    Plain beam search can return a worse sentence at a wider beam, so the
    result is the best over beam widths 1..``beam``. Widths stop growing once
    a search finishes without pruning, since wider ones are then identical.
    """
    if beam < 1:
        raise ValueError("beam width must be at least 1")
    best_out, best_score = "", -math.inf
    for width in range(1, beam + 1):
        out, score, pruned = _beam_search(lm, channel, confusion, source, width)
        if width == 1 or (-score, out) < (-best_score, best_out):
            best_out, best_score = out, score
        if not pruned:
            break
    return best_out, best_score


def correct(
    lm: NgramLm,
    channel: ChannelModel,
    confusion: ConfusionSet,
    source: str,
    beam: int = 8,
) -> str:
    return correct_scored(lm, channel, confusion, source, beam)[0]


def joint_score(
    lm: NgramLm, channel: ChannelModel, confusion: ConfusionSet, source: str, output: str
) -> float:
    """Log score the beam search maximizes, for an arbitrary same-length output."""
    if len(output) != len(source):
        raise ValueError("output and source lengths differ")
    total = 0.0
    ctx = lm.initial_context()
    for x, c in zip(source, output):
        # same association order as the beam search, so scores compare exactly
        total = total + channel.logprob(c, x, confusion) + lm.logprob(c, ctx)
        ctx = (ctx + (lm.symbol(c),))[1:]
    return total

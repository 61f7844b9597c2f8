"""Sentence- and character-level detection/correction scores and the
length / phonetic statistics used to inspect model outputs."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .alignment import CscTriple, repair_equal_length
from .phonology import DISSIMILAR, UNKNOWN, Syllable, char_relation

SCHEMA_VERSION = "1.0"

METRIC_DEFINITIONS = """\
gold = {i : src[i] != ref[i]}; hyp = {i : src[i] != out[i]} after equal-length repair
sentence detection hit: hyp == gold and gold nonempty
sentence correction hit: out == ref and gold nonempty
sentence P denominator: sentences with hyp nonempty; R denominator: sentences with gold nonempty
char detection tp: |hyp & gold|; char correction tp: |{i in hyp : out[i] == ref[i]}|
char P denominator: sum |hyp|; R denominator: sum |gold|
zero denominator -> 0 with warning; F1 = 2PR/(P+R), 0 when P+R == 0
"""
METRIC_DEFINITION_HASH = hashlib.sha256(METRIC_DEFINITIONS.encode()).hexdigest()[:16]

METRIC_NAMES = (
    "sentence_detection", "sentence_correction",
    "character_detection", "character_correction",
)


@dataclass(frozen=True)
class SentenceJudgment:
    gold: frozenset[int]
    hyp: frozenset[int]
    det_hit: bool
    cor_hit: bool
    det_tp: int
    cor_tp: int

    @property
    def has_gold_errors(self) -> bool:
        return bool(self.gold)

    @property
    def hyp_modified(self) -> bool:
        return bool(self.hyp)


def judge(triple: CscTriple) -> SentenceJudgment:
    src, ref, out = triple.source, triple.reference, triple.hypothesis
    if out is None:
        raise ValueError("triple has no hypothesis")
    if len(out) != len(src):
        raise ValueError(
            f"hypothesis length {len(out)} != source length {len(src)}; repair it first"
        )
    gold = frozenset(i for i, (s, r) in enumerate(zip(src, ref)) if s != r)
    hyp = frozenset(i for i, (s, h) in enumerate(zip(src, out)) if s != h)
    return SentenceJudgment(
        gold=gold,
        hyp=hyp,
        det_hit=bool(gold) and hyp == gold,
        cor_hit=bool(gold) and out == ref,
        det_tp=len(hyp & gold),
        cor_tp=sum(1 for i in hyp if out[i] == ref[i]),
    )


def judge_pair(source: str, reference: str, hypothesis: str, repair: bool = True) -> SentenceJudgment:
    if repair:
        hypothesis = repair_equal_length(source, hypothesis)
    return judge(CscTriple(source, reference, hypothesis))


@dataclass(frozen=True)
class Prf:
    p: float
    r: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, p_den: int, r_den: int) -> "Prf":
        p = tp / p_den if p_den else 0.0
        r = tp / r_den if r_den else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f1)


@dataclass
class MetricsReport:
    sentence_detection: Prf
    sentence_correction: Prf
    character_detection: Prf
    character_correction: Prf
    counters: dict[str, int]
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        out: dict = {
            "schema_version": SCHEMA_VERSION,
            "metric_definition_hash": METRIC_DEFINITION_HASH,
        }
        for name in METRIC_NAMES:
            prf: Prf = getattr(self, name)
            out[name] = {
                **asdict(prf),
                "p_pct": round(100 * prf.p, 2),
                "r_pct": round(100 * prf.r, 2),
                "f1_pct": round(100 * prf.f1, 2),
            }
        out["counters"] = dict(self.counters)
        out["warnings"] = list(self.warnings)
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, ensure_ascii=False)

    @staticmethod
    def tsv_header() -> str:
        cols = [f"{name}_{k}" for name in METRIC_NAMES for k in ("p", "r", "f1")]
        return "\t".join(cols)

    def tsv_row(self) -> str:
        vals = []
        for name in METRIC_NAMES:
            prf = getattr(self, name)
            vals += [prf.p, prf.r, prf.f1]
        return "\t".join(f"{v:.6f}" for v in vals)


def aggregate(judgments: Iterable[SentenceJudgment]) -> MetricsReport:
    judgments = list(judgments)
    if not judgments:
        raise ValueError("cannot aggregate an empty corpus")
    c = {
        "sentences": len(judgments),
        "gold_sentences": sum(j.has_gold_errors for j in judgments),
        "modified_sentences": sum(j.hyp_modified for j in judgments),
        "det_hits": sum(j.det_hit for j in judgments),
        "cor_hits": sum(j.cor_hit for j in judgments),
        "gold_positions": sum(len(j.gold) for j in judgments),
        "hyp_positions": sum(len(j.hyp) for j in judgments),
        "det_tp": sum(j.det_tp for j in judgments),
        "cor_tp": sum(j.cor_tp for j in judgments),
    }
    warnings = []
    for den in ("modified_sentences", "gold_sentences", "hyp_positions", "gold_positions"):
        if c[den] == 0:
            warnings.append(f"zero denominator: {den}")
    c["zero_denominators"] = len(warnings)
    return MetricsReport(
        sentence_detection=Prf.from_counts(c["det_hits"], c["modified_sentences"], c["gold_sentences"]),
        sentence_correction=Prf.from_counts(c["cor_hits"], c["modified_sentences"], c["gold_sentences"]),
        character_detection=Prf.from_counts(c["det_tp"], c["hyp_positions"], c["gold_positions"]),
        character_correction=Prf.from_counts(c["cor_tp"], c["hyp_positions"], c["gold_positions"]),
        counters=c,
        warnings=warnings,
    )


def evaluate(
    triples: Iterable[tuple[str, str, str]], repair: bool = True
) -> MetricsReport:
    """Score (source, reference, hypothesis) triples."""
    return aggregate(judge_pair(s, r, h, repair=repair) for s, r, h in triples)


# ---------------------------------------------------------------------------
# length / phonetic statistics


@dataclass
class PhoneticStats:
    selected: int
    equal_length: int
    changed_positions: int
    non_homophone_changes: int
    wrong_positions: int
    non_homophone_wrong: int
    excluded_unknown: int
    warnings: list[str] = field(default_factory=list)

    @property
    def equal_length_rate(self) -> float:
        return self.equal_length / self.selected if self.selected else 0.0

    @property
    def non_homophone_rate(self) -> float:
        return self.non_homophone_changes / self.changed_positions if self.changed_positions else 0.0

    @property
    def non_homophone_error_ratio(self) -> float:
        return self.non_homophone_wrong / self.wrong_positions if self.wrong_positions else 0.0

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "equal_length_rate": self.equal_length_rate,
            "non_homophone_rate": self.non_homophone_rate,
            "non_homophone_error_ratio": self.non_homophone_error_ratio,
            "counts": {
                "selected": self.selected,
                "equal_length": self.equal_length,
                "changed_positions": self.changed_positions,
                "non_homophone_changes": self.non_homophone_changes,
                "wrong_positions": self.wrong_positions,
                "non_homophone_wrong": self.non_homophone_wrong,
                "excluded_unknown": self.excluded_unknown,
            },
            "warnings": list(self.warnings),
        }


def length_phonetic_stats(
    triples: Iterable[tuple[str, str, str | None]],
    table: Mapping[str, Sequence[Syllable]],
    *,
    use_reference: bool = False,
    fuzzy: bool = False,
    select: Callable[[str, str], bool] | None = None,
) -> PhoneticStats:
    """Equal-length rate and non-homophone rates over raw model outputs.

    ``use_reference`` scores the reference itself as the prediction.  ``select``
    restricts the corpus to (source, reference) pairs for which it is true.
    Positions whose relation is unknown are dropped from both numerator and
    denominator of the phonetic ratios.
    """
    selected = equal = changed = nh_changed = wrong = nh_wrong = unknown = 0
    for src, ref, hyp in triples:
        if select is not None and not select(src, ref):
            continue
        pred = ref if use_reference else hyp
        if pred is None:
            raise ValueError("triple has no hypothesis")
        selected += 1
        if len(pred) != len(src):
            continue
        equal += 1
        for s, r, p in zip(src, ref, pred):
            if s == p and p == r:
                continue
            rel = char_relation(s, p, table, fuzzy)
            if rel == UNKNOWN:
                unknown += 1
                continue
            dissimilar = rel == DISSIMILAR
            if p != s:
                changed += 1
                nh_changed += dissimilar
            if p != r:
                wrong += 1
                nh_wrong += dissimilar
    if selected == 0:
        raise ValueError("no sentence pairs selected")
    stats = PhoneticStats(selected, equal, changed, nh_changed, wrong, nh_wrong, unknown)
    if changed == 0:
        stats.warnings.append("zero denominator: changed_positions")
    if wrong == 0:
        stats.warnings.append("zero denominator: wrong_positions")
    return stats

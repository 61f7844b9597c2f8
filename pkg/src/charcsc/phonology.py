"""Pinyin syllables, pinyin tables and phonetic relations between characters."""

from __future__ import annotations

import os
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .surgery import DEFAULT_CONFIG, SurgeryConfig, is_chinese_char

INITIALS = ("b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h",
            "j", "q", "x", "zh", "ch", "sh", "r", "z", "c", "s")
# longest match first
_INITIALS_BY_LENGTH = sorted(INITIALS, key=len, reverse=True)
# syllabic nasals / interjections with no vowel
_SYLLABIC = frozenset({"m", "n", "ng", "hm", "hng"})

FUZZY_INITIALS = {"zh": "z", "ch": "c", "sh": "s", "l": "n", "h": "f"}
FUZZY_FINALS = {"ang": "an", "eng": "en", "ing": "in"}

IDENTICAL, SIMILAR, DISSIMILAR, UNKNOWN = "identical", "similar", "dissimilar", "unknown"
HOMOPHONE_RELATIONS = frozenset({IDENTICAL, SIMILAR})

PINYIN_TABLE_ENV = "CHARCSC_PINYIN_TABLE"

_SYLLABLE_RE = re.compile(r"([a-z]+)([0-5]?)")


class PinyinFormatError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Syllable:
    initial: str
    final: str
    tone: int = 0

    def __str__(self) -> str:
        return f"{self.initial}{self.final}{self.tone}"

    @property
    def toneless(self) -> str:
        return self.initial + self.final

    def fuzzy_key(self) -> tuple[str, str]:
        return (FUZZY_INITIALS.get(self.initial, self.initial),
                FUZZY_FINALS.get(self.final, self.final))


def parse_syllable(text: str) -> Syllable:
    """Split numbered pinyin such as ``zhong1`` into initial, final and tone.

    ``v`` stands for ``ü``; a missing tone digit (or ``5``) means neutral tone 0.
    """
    m = _SYLLABLE_RE.fullmatch(text)
    if m is None:
        raise PinyinFormatError(f"illegal pinyin syllable {text!r}")
    body, digit = m.groups()
    tone = int(digit) if digit else 0
    if tone == 5:
        tone = 0
    if body in _SYLLABIC:
        return Syllable("", body, tone)
    for ini in _INITIALS_BY_LENGTH:
        if body.startswith(ini):
            initial = ini
            break
    else:
        initial = ""
    final = body[len(initial):]
    if not final:
        raise PinyinFormatError(f"pinyin syllable {text!r} has an empty final")
    return Syllable(initial, final, tone)


_TONE_MARKS = {"\u0304": 1, "\u0301": 2, "\u030c": 3, "\u0300": 4}
_DIAERESIS, _CIRCUMFLEX = "\u0308", "\u0302"


def marked_to_numbered(text: str) -> str:
    """``zhōng`` -> ``zhong1``; ``lǘ`` -> ``lv2``."""
    tone = 0
    out = []
    for ch in unicodedata.normalize("NFD", text.strip().lower()):
        if ch in _TONE_MARKS:
            tone = _TONE_MARKS[ch]
        elif ch == _DIAERESIS:
            if not out or out[-1] != "u":
                raise PinyinFormatError(f"stray diaeresis in {text!r}")
            out[-1] = "v"
        elif ch == _CIRCUMFLEX:  # ê is written as plain e
            continue
        else:
            out.append(ch)
    return "".join(out) + (str(tone) if tone else "")


class PinyinTable(Mapping[str, tuple[Syllable, ...]]):
    """Character -> readings. Immutable after construction."""

    def __init__(self, entries: Mapping[str, Iterable[Syllable]],
                 config: SurgeryConfig = DEFAULT_CONFIG):
        table: dict[str, tuple[Syllable, ...]] = {}
        for ch, readings in entries.items():
            if len(ch) != 1 or not is_chinese_char(ch, config):
                raise PinyinFormatError(f"table key {ch!r} is not a Chinese character")
            uniq = tuple(dict.fromkeys(readings))
            if not uniq:
                raise PinyinFormatError(f"character {ch!r} has no readings")
            table[ch] = uniq
        self._table = table
        self._by_toneless: dict[tuple[str, str], set[str]] = {}
        self._by_fuzzy: dict[tuple[str, str], set[str]] = {}
        for ch, readings in table.items():
            for syl in readings:
                self._by_toneless.setdefault((syl.initial, syl.final), set()).add(ch)
                self._by_fuzzy.setdefault(syl.fuzzy_key(), set()).add(ch)

    def __getitem__(self, ch: str) -> tuple[Syllable, ...]:
        return self._table[ch]

    def __iter__(self):
        return iter(self._table)

    def __len__(self) -> int:
        return len(self._table)

    def homophones(self, ch: str, fuzzy: bool = False) -> set[str]:
        """Characters whose relation to ``ch`` is identical or similar."""
        if ch not in self._table:
            return {ch}
        out = {ch}
        for syl in self._table[ch]:
            out |= self._by_toneless.get((syl.initial, syl.final), set())
            if fuzzy:
                out |= self._by_fuzzy.get(syl.fuzzy_key(), set())
        return out

    def to_tsv(self) -> str:
        lines = [f"{ch}\t{','.join(map(str, syls))}" for ch, syls in sorted(self._table.items())]
        return "\n".join(lines) + "\n"


def parse_pinyin_table(text: str, source: str = "<string>",
                       config: SurgeryConfig = DEFAULT_CONFIG) -> PinyinTable:
    """Parse ``char<TAB>reading,reading`` lines or Unihan kMandarin lines."""
    entries: dict[str, list[Syllable]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\n").split("\t")
        try:
            if len(fields) == 3 and fields[0].startswith("U+"):
                if fields[1] != "kMandarin":
                    continue
                ch = chr(int(fields[0][2:], 16))
                readings = [parse_syllable(marked_to_numbered(r)) for r in fields[2].split()]
            elif len(fields) == 2:
                ch = fields[0]
                readings = [parse_syllable(r.strip()) for r in fields[1].split(",") if r.strip()]
            else:
                raise PinyinFormatError("expected 'char<TAB>readings'")
        except (PinyinFormatError, ValueError) as exc:
            raise PinyinFormatError(f"{source}:{lineno}: {exc}") from None
        if len(ch) != 1 or not is_chinese_char(ch, config):
            raise PinyinFormatError(f"{source}:{lineno}: {ch!r} is not a Chinese character")
        entries.setdefault(ch, []).extend(readings)
    return PinyinTable(entries, config)


def load_pinyin_table(path: str | Path | None = None) -> PinyinTable:
    """Load a table from ``path``, ``$CHARCSC_PINYIN_TABLE`` or the bundled file."""
    if path is None:
        path = os.environ.get(PINYIN_TABLE_ENV)
    if path is None:
        text = resources.files("charcsc").joinpath("data/pinyin.tsv").read_text(encoding="utf-8")
        return parse_pinyin_table(text, "pinyin.tsv")
    return parse_pinyin_table(Path(path).read_text(encoding="utf-8"), str(path))


def char_relation(a: str, b: str, table: Mapping[str, tuple[Syllable, ...]],
                  fuzzy: bool = False) -> str:
    if a == b:
        return IDENTICAL
    ra, rb = table.get(a), table.get(b)
    if ra is None or rb is None:
        return UNKNOWN
    if any(x == y for x in ra for y in rb):
        return IDENTICAL
    if any(x.initial == y.initial and x.final == y.final for x in ra for y in rb):
        return SIMILAR
    if fuzzy and any(x.fuzzy_key() == y.fuzzy_key() for x in ra for y in rb):
        return SIMILAR
    return DISSIMILAR


def is_homophone(a: str, b: str, table: Mapping[str, tuple[Syllable, ...]],
                 fuzzy: bool = False) -> bool | None:
    rel = char_relation(a, b, table, fuzzy)
    if rel == UNKNOWN:
        return None
    return rel in HOMOPHONE_RELATIONS

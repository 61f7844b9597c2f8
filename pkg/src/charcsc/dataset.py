"""CSC dataset files: TSV (source, reference[, hypothesis]) or JSON lines
with ``src`` / ``ref`` / ``hyp`` keys."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .alignment import nfc

log = logging.getLogger(__name__)

MAX_SOURCE_CHARS = 1000


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRecord:
    source: str
    reference: str | None = None
    hypothesis: str | None = None
    line: int = 0


def _detect_format(path: Path) -> str:
    return "jsonl" if path.suffix in (".jsonl", ".json") else "tsv"


def read_records(path: str | Path, fmt: str | None = None) -> list[DatasetRecord]:
    path = Path(path)
    fmt = fmt or _detect_format(path)
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if fmt == "jsonl":
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DatasetError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
                if not isinstance(obj, dict) or not isinstance(obj.get("src"), str):
                    raise DatasetError(f"{path}:{lineno}: expected an object with a 'src' string")
                src, ref, hyp = obj["src"], obj.get("ref"), obj.get("hyp")
            elif fmt == "tsv":
                cols = line.split("\t")
                if len(cols) > 3:
                    raise DatasetError(f"{path}:{lineno}: expected at most 3 tab-separated columns")
                cols += [None] * (3 - len(cols))
                src, ref, hyp = cols
            else:
                raise DatasetError(f"unknown dataset format {fmt!r}")
            records.append(DatasetRecord(
                nfc(src),
                nfc(ref) if ref is not None else None,
                nfc(hyp) if hyp is not None else None,
                lineno,
            ))
    return records


def read_lines(path: str | Path) -> list[str]:
    """One NFC-normalized sentence per line; blank lines are kept as ''."""
    with open(path, encoding="utf-8") as f:
        return [nfc(line.rstrip("\r\n")) for line in f]


def attach_hypotheses(records: list[DatasetRecord], hyps: list[str], origin: str = "") -> list[DatasetRecord]:
    if len(hyps) != len(records):
        raise DatasetError(
            f"{origin}: {len(hyps)} hypotheses for {len(records)} dataset records"
        )
    return [DatasetRecord(r.source, r.reference, h, r.line) for r, h in zip(records, hyps)]


def filter_records(records: Iterable[DatasetRecord]) -> tuple[list[DatasetRecord], int]:
    """Drop records whose reference length differs from the source or whose
    source exceeds the length limit."""
    kept, skipped = [], 0
    for r in records:
        if (r.reference is not None and len(r.reference) != len(r.source)) or len(r.source) > MAX_SOURCE_CHARS:
            skipped += 1
            continue
        kept.append(r)
    if skipped:
        log.warning("skipped %d records (unequal reference length or source > %d chars)",
                    skipped, MAX_SOURCE_CHARS)
    return kept, skipped

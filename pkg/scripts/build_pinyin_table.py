"""Regenerate src/charcsc/data/pinyin.tsv from pypinyin's character dictionary.

    pip install pypinyin
    python scripts/build_pinyin_table.py
"""

import argparse
from pathlib import Path

from pypinyin import __version__ as pypinyin_version
from pypinyin.pinyin_dict import pinyin_dict

from charcsc.phonology import marked_to_numbered, parse_syllable
from charcsc.surgery import DEFAULT_CONFIG

OUT = Path(__file__).resolve().parents[1] / "src" / "charcsc" / "data" / "pinyin.tsv"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=OUT)
    args = ap.parse_args()

    lines = [
        f"# generated from pypinyin {pypinyin_version} pinyin_dict (MIT license)",
        "# character<TAB>comma-separated numbered readings",
    ]
    skipped = 0
    for lo, hi in DEFAULT_CONFIG.chinese_ranges:
        for cp in range(lo, hi + 1):
            raw = pinyin_dict.get(cp)
            if not raw:
                continue
            readings = []
            for r in raw.split(","):
                try:
                    readings.append(str(parse_syllable(marked_to_numbered(r))))
                except ValueError:
                    skipped += 1
            readings = list(dict.fromkeys(readings))
            if readings:
                lines.append(f"{chr(cp)}\t{','.join(readings)}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines) - 2} characters to {args.out} ({skipped} readings skipped)")


if __name__ == "__main__":
    main()

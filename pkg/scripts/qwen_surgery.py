"""Character-level surgery on the QWEN tokenizer.

Loads the tiktoken rank file shipped in the ``qwen_tokenizer`` wheel (or any
rank file given with --ranks), runs both surgery modes and prints the size
ratios.  With --out the strict model is written as a model directory.

    pip install --no-deps qwen_tokenizer
    python scripts/qwen_surgery.py --out runs/qwen-char
"""

import argparse
import importlib.resources
import json
import time
from pathlib import Path

from charcsc.bpe import load_tiktoken
from charcsc.surgery import SurgeryConfig, apply_surgery, verify_char_level, write_surgery_output


def default_ranks() -> Path:
    return Path(str(importlib.resources.files("qwen_tokenizer") / "resources" / "qwen.tiktoken"))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ranks", type=Path, help="tiktoken rank file (default: qwen_tokenizer asset)")
    ap.add_argument("--out", type=Path, help="write the strict-mode model here")
    ap.add_argument("--check", type=Path, help="corpus to verify the strict model on, one sentence per line")
    args = ap.parse_args()

    t0 = time.perf_counter()
    model = load_tiktoken(args.ranks or default_ranks())
    print(f"loaded {len(model.vocab)} tokens, {len(model.merges)} merges in {time.perf_counter() - t0:.1f}s")

    results = {}
    for mode in ("literal", "strict"):
        res = apply_surgery(model, SurgeryConfig(mode=mode))
        results[mode] = res
        print(json.dumps(res.report(), indent=2))
    if args.check:
        corpus = [s for s in args.check.read_text(encoding="utf-8").splitlines() if s]
        for mode, res in results.items():
            rep = verify_char_level(res.model, corpus)
            print(f"{mode}: {len(rep.violations)} violations on {rep.sentences} sentences")
    if args.out:
        write_surgery_output(results["strict"], args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

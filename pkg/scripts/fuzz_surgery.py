"""Fuzz strict and literal surgery on randomly trained byte-level BPE models
and count models whose output still splits or joins Chinese characters.

    python scripts/fuzz_surgery.py --models 1000 --sentences 1000
"""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from _models import CHINESE_POOL, random_alphabet, random_model, random_text  # noqa: E402

from charcsc.surgery import SurgeryConfig, apply_surgery, verify_char_level  # noqa: E402


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--models", type=int, default=200)
    ap.add_argument("--sentences", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    configs = {m: SurgeryConfig(mode=m) for m in ("literal", "strict")}
    unsound = dict.fromkeys(configs, 0)
    ratios = {m: [] for m in configs}
    start = time.perf_counter()
    for k in range(args.models):
        rng = random.Random(args.seed + k)
        alphabet = random_alphabet(rng)
        model = random_model(rng, alphabet, n_merges=rng.randint(10, 60))
        chinese = [c for c in alphabet if c in CHINESE_POOL]
        corpus = [random_text(rng, alphabet + chinese * 2, 16) for _ in range(args.sentences)]
        for mode, cfg in configs.items():
            res = apply_surgery(model, cfg)
            ratios[mode].append(res.ratio)
            unsound[mode] += not verify_char_level(res.model, corpus).ok
    for mode in configs:
        mean = sum(ratios[mode]) / len(ratios[mode])
        print(f"{mode}: {unsound[mode]}/{args.models} unsound models, mean size ratio {mean:.3f}")
    print(f"{time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()

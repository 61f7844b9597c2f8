"""Command-line entry point: ``charcsc <subcommand> ...``.

Exit status: 0 success, 1 verification failure, 2 usage or format error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import alignment, bpe, corrector, dataset, lm, metrics, phonology, surgery

log = logging.getLogger("charcsc")

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_USAGE = 0, 1, 2


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(obj, out: str | None = None) -> None:
    _emit(json.dumps(obj, indent=2, ensure_ascii=False), out)


def _load_model(args) -> bpe.BpeModel:
    if getattr(args, "tiktoken", None):
        return bpe.load_tiktoken(args.tiktoken, args.pretokenizer)
    if getattr(args, "vocab", None) or getattr(args, "merges", None):
        if not (args.vocab and args.merges):
            raise dataset.DatasetError("--vocab and --merges must be given together")
        return bpe.load_model(args.vocab, args.merges, args.pretokenizer)
    if not args.model:
        raise dataset.DatasetError("no model given (use --model DIR)")
    return bpe.load_model_dir(args.model, args.pretokenizer)


def _add_model_args(p: argparse.ArgumentParser, sources: bool = False) -> None:
    p.add_argument("--model", help="directory holding vocab.json and merges.txt")
    if sources:
        p.add_argument("--vocab", help="vocab.json")
        p.add_argument("--merges", help="merges.txt")
        p.add_argument("--tiktoken", help="tiktoken rank file instead of vocab/merges")
    p.add_argument("--pretokenizer", choices=bpe.PRETOKENIZERS, default="identity")


def _records(args, need_ref: bool = True, need_hyp: bool = False) -> list[dataset.DatasetRecord]:
    if args.data:
        records = dataset.read_records(args.data, args.format)
    elif args.src and args.ref:
        srcs, refs = dataset.read_lines(args.src), dataset.read_lines(args.ref)
        if len(srcs) != len(refs):
            raise dataset.DatasetError(f"{args.src} and {args.ref} have different line counts")
        records = [dataset.DatasetRecord(s, r, None, i + 1) for i, (s, r) in enumerate(zip(srcs, refs))]
    else:
        raise dataset.DatasetError("give --data FILE or both --src and --ref")
    if getattr(args, "hyp", None):
        records = dataset.attach_hypotheses(records, dataset.read_lines(args.hyp), args.hyp)
    for r in records:
        if need_ref and r.reference is None:
            raise dataset.DatasetError(f"record at line {r.line} has no reference")
        if need_hyp and r.hypothesis is None:
            raise dataset.DatasetError(f"record at line {r.line} has no hypothesis")
    records, _ = dataset.filter_records(records)
    return records


def _add_data_args(p: argparse.ArgumentParser, hyp: bool = False) -> None:
    p.add_argument("--data", help="TSV (src, ref[, hyp]) or JSONL (src/ref/hyp) dataset")
    p.add_argument("--format", choices=("tsv", "jsonl"), help="dataset format (default: by extension)")
    p.add_argument("--src", help="source sentences, one per line")
    p.add_argument("--ref", help="reference sentences, one per line")
    if hyp:
        p.add_argument("--hyp", help="hypotheses, one per line, aligned with the dataset")


# ---------------------------------------------------------------------------
# subcommands


def cmd_surgery(args) -> int:
    model = _load_model(args)
    config = surgery.SurgeryConfig(mode=args.mode, compact_ids=not args.no_compact)
    result = surgery.apply_surgery(model, config)
    surgery.write_surgery_output(result, args.out)
    _dump(result.report())
    return EXIT_OK


def cmd_tokenize(args) -> int:
    model = _load_model(args)
    lines = []
    for text in dataset.read_lines(args.input):
        spans = bpe.encode(model, text)
        if args.jsonl:
            lines.append(json.dumps({
                "text": text,
                "ids": [s.token_id for s in spans],
                "tokens": bpe.token_strings(model, spans),
                "char_spans": [[s.char_start, s.char_end] for s in spans],
            }, ensure_ascii=False))
        else:
            lines.append(" / ".join(bpe.token_strings(model, spans)))
    _emit("\n".join(lines), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    model = _load_model(args)
    corpus = [s for s in dataset.read_lines(args.corpus) if s]
    report = surgery.verify_char_level(model, corpus)
    _dump({
        "sentences": report.sentences,
        "violations": len(report.violations),
        "examples": [
            {"sentence": v.sentence, "token": v.text, "char_range": [v.span.char_start, v.span.char_end]}
            for v in report.violations[: args.max_examples]
        ],
    }, args.out)
    return EXIT_OK if report.ok else EXIT_VERIFY_FAILED


def cmd_repair(args) -> int:
    srcs, hyps = dataset.read_lines(args.src), dataset.read_lines(args.hyp)
    if len(srcs) != len(hyps):
        raise dataset.DatasetError(f"{args.src} and {args.hyp} have different line counts")
    _emit("\n".join(alignment.repair_equal_length(s, h) for s, h in zip(srcs, hyps)), args.out)
    return EXIT_OK


def _table_or_none(path: str | None) -> phonology.PinyinTable | None:
    try:
        return phonology.load_pinyin_table(path)
    except FileNotFoundError:
        if path:
            raise
        return None


def cmd_eval(args) -> int:
    records = _records(args, need_hyp=True)
    raw = [(r.source, r.reference, r.hypothesis) for r in records]
    if args.no_repair:
        for r in records:
            if len(r.hypothesis) != len(r.source):
                raise dataset.DatasetError(
                    f"line {r.line}: hypothesis length differs from source (drop --no-repair)"
                )
    report = metrics.evaluate(raw, repair=not args.no_repair)
    out = report.as_dict()
    table = _table_or_none(args.pinyin)
    if table is not None:
        out["length_phonetic"] = metrics.length_phonetic_stats(raw, table, fuzzy=args.fuzzy).as_dict()
    _dump(out, args.json)
    if args.tsv:
        _emit(report.tsv_header() + "\n" + report.tsv_row(), args.tsv)
    return EXIT_OK


def cmd_stats(args) -> int:
    records = _records(args, need_hyp=not args.target)
    table = phonology.load_pinyin_table(args.pinyin)
    select = None
    if args.reference_model:
        ref_model = bpe.load_model_dir(args.reference_model, args.pretokenizer)

        def select(src: str, ref: str) -> bool:
            return alignment.diagnose_tokenization(ref_model, src, ref).scenario != alignment.ALIGNED

    stats = metrics.length_phonetic_stats(
        [(r.source, r.reference, r.hypothesis) for r in records],
        table,
        use_reference=args.target,
        fuzzy=args.fuzzy,
        select=select,
    )
    _dump(stats.as_dict(), args.out)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    model = _load_model(args)
    records = _records(args)
    counts = alignment.scenario_counts(model, ((r.source, r.reference) for r in records))
    _dump({"pairs": len(records), "scenarios": dict(counts)}, args.out)
    return EXIT_OK


def cmd_lm_train(args) -> int:
    corpus = [s for s in dataset.read_lines(args.corpus) if s]
    lambdas = [float(x) for x in args.lambdas.split(",")] if args.lambdas else None
    model = lm.train_lm(corpus, args.order, args.alpha, lambdas)
    lm.save_lm(model, args.out)
    _dump({"order": model.order, "alpha": model.alpha, "lambdas": list(model.lambdas),
           "vocab_size": model.vocab_size, "sentences": len(corpus)})
    return EXIT_OK


def cmd_correct(args) -> int:
    model = lm.load_lm(args.lm)
    table = phonology.load_pinyin_table(args.pinyin)
    sources = dataset.read_lines(args.input)
    # input characters need confusion sets even when the LM never saw them
    confusion = corrector.build_confusion(
        table, set(model.vocab).union(*sources), fuzzy=args.fuzzy)
    channel = corrector.ChannelModel(args.epsilon)
    outs = [corrector.correct(model, channel, confusion, s, args.beam) for s in sources]
    _emit("\n".join(outs), args.out)
    return EXIT_OK


def cmd_embed_prune(args) -> int:
    matrix = surgery.read_embedding(args.embedding)
    id_map = surgery.read_id_map(args.id_map)
    pruned = surgery.embed_prune(matrix, id_map)
    surgery.write_embedding(args.out, pruned)
    _dump({"rows_in": int(matrix.shape[0]), "rows_out": int(pruned.shape[0]), "dim": int(matrix.shape[1])})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="charcsc", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("surgery", help="derive a character-level tokenizer")
    _add_model_args(p, sources=True)
    p.add_argument("--mode", choices=surgery.MODES, default="strict")
    p.add_argument("--no-compact", action="store_true", help="keep original token ids")
    p.add_argument("--out", required=True, help="output model directory")
    p.set_defaults(func=cmd_surgery)

    p = sub.add_parser("tokenize", help="dump tokens for each input line")
    _add_model_args(p, sources=True)
    p.add_argument("input")
    p.add_argument("--jsonl", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("verify", help="check one token per Chinese character")
    _add_model_args(p, sources=True)
    p.add_argument("corpus")
    p.add_argument("--max-examples", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("repair", help="restore hypotheses to source length")
    p.add_argument("--src", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("eval", help="sentence/character P, R, F1")
    _add_data_args(p, hyp=True)
    p.add_argument("--pinyin", help="pinyin table (default: $%s or bundled)" % phonology.PINYIN_TABLE_ENV)
    p.add_argument("--fuzzy", action="store_true")
    p.add_argument("--no-repair", action="store_true")
    p.add_argument("--json", help="write the JSON report here instead of stdout")
    p.add_argument("--tsv", help="also write a one-row TSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="equal-length and non-homophone statistics")
    _add_data_args(p, hyp=True)
    p.add_argument("--pinyin")
    p.add_argument("--fuzzy", action="store_true")
    p.add_argument("--target", action="store_true", help="score the reference instead of the hypothesis")
    p.add_argument("--reference-model", help="only pairs this tokenizer does not align")
    p.add_argument("--pretokenizer", choices=bpe.PRETOKENIZERS, default="identity")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("diagnose", help="count token alignment scenarios")
    _add_model_args(p, sources=True)
    _add_data_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("lm-train", help="train a character n-gram LM")
    p.add_argument("corpus")
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--lambdas", help="comma-separated weights, unigram first")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lm_train)

    p = sub.add_parser("correct", help="character-by-character correction")
    p.add_argument("input")
    p.add_argument("--lm", required=True)
    p.add_argument("--pinyin")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--beam", type=int, default=8)
    p.add_argument("--fuzzy", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("embed-prune", help="select embedding rows by id map")
    p.add_argument("--embedding", required=True)
    p.add_argument("--id-map", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed_prune)
    return ap


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, IndexError) as exc:
        print(f"charcsc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

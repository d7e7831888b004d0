"""Command line front end.

Exit status: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .corpus import (CorpusFormatError, corpus_stats, format_stats_table, iob_from_spans,
                     parse_timestamp, read_corpus, read_schedule, split_corpus,
                     tweet_from_text, write_corpus, write_schedule)
from .features import GAZETTEER_NAMES, default_gazetteer_dir, fill_pos_chunk, load_gazetteers
from .matcher import MatchConfig, load_stopwords, match_tweet
from .pipeline import (DEFAULT_C, DEFAULT_T, DEFAULT_W, GRANULARITIES, evaluate,
                       format_report, format_sweep, reconcile_corpus, sweep)
from .stats import wilcoxon_rank_sum
from .tagger import (DECODERS, ModelFormatError, TrainConfig, load_model, save_model,
                     tag_tweet, train)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


# ----------------------------------------------------------- helpers

def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _existing(path):
    p = Path(path)
    if not p.is_file():
        raise DataError(f"input file not found: {path}")
    return p


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _emit(args, text, payload):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        sys.stdout.write(text)


def _gazetteers(args):
    try:
        return load_gazetteers(args.gazetteers)
    except OSError as e:
        raise DataError(f"cannot read gazetteer: {e}") from e


def _stopwords(args):
    if args.stopwords is None:
        return None
    return load_stopwords(_existing(args.stopwords))


def _match_config(args, t):
    kwargs = dict(t=t, w=args.w, c=args.c, alpha=args.alpha)
    sw = _stopwords(args)
    if sw is not None:
        kwargs["stopwords"] = sw
    return MatchConfig(**kwargs)


# ---------------------------------------------------------- commands

def cmd_tokenize(args):
    tweets = []
    with open(_existing(args.input), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            if args.format == "text":
                tweets.append(tweet_from_text(line.strip(), id=str(lineno)))
                continue
            try:
                rec = json.loads(line)
                ts = parse_timestamp(rec["ts"]) if "ts" in rec else None
                text = rec["text"]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise CorpusFormatError(f"bad record: {e}", lineno) from e
            tweets.append(tweet_from_text(text, id=str(rec.get("id", lineno)), timestamp=ts))
    tweets = [fill_pos_chunk(t) for t in tweets if t.tokens]
    write_corpus(tweets, args.output)
    print(f"{len(tweets)} tweets, {sum(len(t.tokens) for t in tweets)} tokens -> {args.output}",
          file=sys.stderr)


def cmd_split(args):
    corpus = read_corpus(_existing(args.corpus))
    parts = split_corpus(corpus, args.seed, tuple(args.ratios))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in zip(("train", "testA", "testB"), parts):
        write_corpus(part, out / f"{name}.iob")
    print(" ".join(f"{name}={len(p)}" for name, p in zip(("train", "testA", "testB"), parts)),
          file=sys.stderr)


def cmd_schedule_build(args):
    schedule = read_schedule(_existing(args.input))
    write_schedule(schedule, args.output)
    print(f"{len(schedule)} entries, {schedule.skipped} skipped -> {args.output}", file=sys.stderr)


def cmd_stats(args):
    columns = []
    for path in args.corpus:
        corpus = read_corpus(_existing(path))
        try:
            columns.append((Path(path).stem, corpus_stats(corpus)))
        except ValueError as e:
            raise DataError(f"{path}: {e}") from e
    _emit(args, format_stats_table(columns), {name: s.as_dict() for name, s in columns})


def cmd_train(args):
    corpus = read_corpus(_existing(args.train))
    config = TrainConfig(epochs=args.epochs, seed=args.seed, decoder=args.decoder,
                         shuffle=not args.no_shuffle, average=not args.no_average)
    log = (lambda m: print(m, file=sys.stderr)) if args.verbose else None
    try:
        model = train(corpus, _gazetteers(args), config, log=log)
    except ValueError as e:
        raise DataError(str(e)) from e
    save_model(model, args.model)
    print(f"{len(model.emission)} emission + {len(model.transition)} transition weights "
          f"-> {args.model}", file=sys.stderr)


def _tag_chunk(payload):
    model, tweets, gazetteers, decoder = payload
    return [tag_tweet(model, t, gazetteers, decoder) for t in tweets]


def cmd_tag(args):
    model = load_model(_existing(args.model))
    corpus = read_corpus(_existing(args.input))
    gazetteers = _gazetteers(args)
    if args.jobs > 1 and len(corpus) > 1:
        size = -(-len(corpus) // args.jobs)
        chunks = [corpus[i:i + size] for i in range(0, len(corpus), size)]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            tagged = [t for part in pool.map(_tag_chunk, [(model, c, gazetteers, args.decoder)
                                                         for c in chunks]) for t in part]
    else:
        tagged = _tag_chunk((model, corpus, gazetteers, args.decoder))
    write_corpus(tagged, args.output)


def cmd_match(args):
    schedule = read_schedule(_existing(args.schedule))
    corpus = read_corpus(_existing(args.input))
    config = _match_config(args, args.t)
    out = []
    diagnostics = []
    for tweet in corpus:
        try:
            result = match_tweet(tweet, schedule, config)
        except ValueError as e:
            raise DataError(str(e)) from e
        out.append(tweet.with_labels(iob_from_spans(result.spans, len(tweet.tokens))))
        diagnostics.append(result.diagnostics(tweet.id))
    write_corpus(out, args.output)
    if args.diagnostics:
        with open(args.diagnostics, "w", encoding="utf-8", newline="\n") as fh:
            for d in diagnostics:
                fh.write(json.dumps(d, ensure_ascii=False, sort_keys=True) + "\n")


def cmd_reconcile(args):
    model_pred = read_corpus(_existing(args.model_pred))
    schedule_pred = read_corpus(_existing(args.schedule_pred))
    try:
        merged = reconcile_corpus(model_pred, schedule_pred, args.granularity)
    except ValueError as e:
        raise DataError(str(e)) from e
    write_corpus(merged, args.output)


def cmd_eval(args):
    gold = read_corpus(_existing(args.gold))
    pred = read_corpus(_existing(args.pred))
    try:
        report = evaluate(gold, pred)
    except ValueError as e:
        raise DataError(str(e)) from e
    _emit(args, format_report(report), report.as_dict())


def cmd_sweep(args):
    schedule = read_schedule(_existing(args.schedule))
    gold = read_corpus(_existing(args.gold))
    try:
        rows = sweep(gold, schedule, args.t, args.w, args.c, args.alpha,
                     stopwords=_stopwords(args), jobs=args.jobs)
    except ValueError as e:
        raise DataError(str(e)) from e
    _emit(args, format_sweep(rows), [r.as_dict() for r in rows])


def _sample(text):
    p = Path(text)
    if p.is_file():
        text = p.read_text(encoding="utf-8").replace("\n", ",")
    return _floats(text)


def cmd_wilcoxon(args):
    try:
        result = wilcoxon_rank_sum(_sample(args.a), _sample(args.b), args.method)
    except (ValueError, argparse.ArgumentTypeError) as e:
        raise DataError(str(e)) from e
    _emit(args, f"W = {result.statistic:.2f}  p (two-sided) = {result.p_two_sided:.4f}"
                f"  [{result.method}]\n", result.as_dict())


# ------------------------------------------------------------- parser

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--manifest", help="write a JSON run manifest to this path")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--jobs", type=int, default=1)

    gaz = _Parser(add_help=False)
    gaz.add_argument("--gazetteers", help="gazetteer directory "
                     "(default: $MUSENER_GAZETTEERS or the bundled lists)")

    def match_opts(p, grid):
        kind = _floats if grid else float
        p.add_argument("--w", type=kind, default=list(DEFAULT_W) if grid else 0.5,
                       help="Musical Work string threshold")
        p.add_argument("--c", type=kind, default=list(DEFAULT_C) if grid else 0.5,
                       help="Contributor string threshold")
        p.add_argument("--alpha", type=float, default=0.7, help="string-score weight")
        p.add_argument("--stopwords", help="stop word file (default: bundled list)")

    parser = _Parser(prog="musener", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"musener {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("tokenize", parents=[common], help="raw messages to an unlabeled IOB corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("jsonl", "text"), default="jsonl")
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("split", parents=[common], help="train/testA/testB split")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ratios", type=_floats, default=[0.8, 0.1, 0.1])
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("schedule-build", parents=[common], help="parse bot messages into a schedule")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_schedule_build)

    p = sub.add_parser("stats", parents=[common], help="entity token counts per corpus")
    p.add_argument("--corpus", required=True, nargs="+")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", parents=[common, gaz], help="train the perceptron tagger")
    p.add_argument("--train", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--decoder", choices=DECODERS, default="viterbi")
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--no-average", action="store_true")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", parents=[common, gaz], help="label a corpus with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--decoder", choices=DECODERS, default="viterbi")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("match", parents=[common], help="schedule matching")
    match_opts(p, grid=False)
    p.add_argument("--schedule", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--t", type=float, default=1200, help="time window in seconds")
    p.add_argument("--diagnostics", help="per-tweet candidate dump (JSON lines)")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("reconcile", parents=[common], help="merge tagger and schedule output")
    p.add_argument("--model-pred", required=True)
    p.add_argument("--schedule-pred", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--granularity", choices=GRANULARITIES, default="type")
    p.set_defaults(func=cmd_reconcile)

    p = sub.add_parser("eval", parents=[common], help="span-level P/R/F1")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", parents=[common], help="threshold grid for matching")
    match_opts(p, grid=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--t", type=_floats, default=list(DEFAULT_T))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("wilcoxon", parents=[common], help="Wilcoxon rank-sum test")
    p.add_argument("--a", required=True, help="comma-separated values or a file")
    p.add_argument("--b", required=True, help="comma-separated values or a file")
    p.add_argument("--method", choices=("auto", "exact", "normal"), default="auto")
    p.set_defaults(func=cmd_wilcoxon)
    return parser


_INPUT_FLAGS = ("input", "corpus", "train", "model", "gold", "pred", "schedule",
                "model_pred", "schedule_pred", "stopwords")
_OUTPUT_FLAGS = ("output", "model", "diagnostics")


def _write_manifest(args, argv_flags, started):
    inputs = {}
    for name in _INPUT_FLAGS:
        value = argv_flags.get(name)
        if value is None or (name == "model" and args.command == "train"):
            continue
        for path in value if isinstance(value, list) else [value]:
            if Path(path).is_file():
                inputs[str(path)] = _digest(path)
    if hasattr(args, "gazetteers"):
        directory = Path(args.gazetteers) if args.gazetteers else default_gazetteer_dir()
        for name in GAZETTEER_NAMES:
            path = directory / f"{name}.txt"
            if path.is_file():
                inputs[str(path)] = _digest(path)
    outputs = {}
    for name in _OUTPUT_FLAGS:
        value = argv_flags.get(name)
        if value and Path(value).is_file() and str(value) not in inputs:
            outputs[str(value)] = _digest(value)
    # SOURCE_DATE_EPOCH pins timing fields so manifests are reproducible
    if "SOURCE_DATE_EPOCH" in os.environ:
        duration = 0.0
    else:
        duration = round(time.perf_counter() - started, 6)
    manifest = {
        "command": args.command,
        "flags": argv_flags,
        "inputs": inputs,
        "outputs": outputs,
        "version": __version__,
        "duration_seconds": duration,
    }
    with open(args.manifest, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
    except UsageError as e:
        sys.stderr.write(str(e))
        return 1
    started = time.perf_counter()
    try:
        args.func(args)
    except UsageError as e:
        sys.stderr.write(f"musener: error: {e}\n")
        return 1
    except (DataError, CorpusFormatError, ModelFormatError, ValueError, OSError) as e:
        sys.stderr.write(f"musener {args.command}: error: {e}\n")
        return 2
    if args.manifest:
        flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "manifest")}
        _write_manifest(args, flags, started)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

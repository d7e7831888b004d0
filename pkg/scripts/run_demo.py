"""Walk through the whole pipeline on the bundled fixtures.

Trains the tagger on the separable fixture, tags the user test tweets,
links them to the schedule, merges both predictions and prints the
evaluation tables plus the threshold sweep.

    python scripts/run_demo.py [--granularity tweet] [--jobs 4]
"""
import argparse
from importlib import resources
from pathlib import Path

from musener.corpus import read_corpus, read_schedule
from musener.features import load_gazetteers
from musener.matcher import MatchConfig, match_corpus
from musener.pipeline import (GRANULARITIES, evaluate, format_report, format_sweep,
                              reconcile_corpus, sweep)
from musener.tagger import TrainConfig, tag_tweet, train

FIXTURES = Path(str(resources.files("musener") / "data" / "fixtures"))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--granularity", choices=GRANULARITIES, default="type")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    gazetteers = load_gazetteers()
    train_corpus = read_corpus(FIXTURES / "separable_train.iob")
    gold = read_corpus(FIXTURES / "user_test.iob")
    schedule = read_schedule(FIXTURES / "schedule.jsonl")
    print(f"{len(train_corpus)} training tweets, {len(gold)} test tweets, "
          f"{len(schedule)} schedule entries ({schedule.skipped} skipped)\n")

    model = train(train_corpus, gazetteers, TrainConfig(seed=args.seed))
    fitted = [tag_tweet(model, t, gazetteers) for t in train_corpus]
    print(format_report(evaluate(train_corpus, fitted), "tagger on its training data"))

    tagged = [tag_tweet(model, t, gazetteers) for t in gold]
    matched = match_corpus(gold, schedule, MatchConfig(t=1200, w=0.33, c=0.33))
    merged = reconcile_corpus(tagged, matched, args.granularity)
    for title, pred in (("tagger only", tagged), ("schedule only (t=1200 w=0.33 c=0.33)", matched),
                        (f"reconciled ({args.granularity})", merged)):
        print(format_report(evaluate(gold, pred), title))

    print("schedule matching sweep")
    print(format_sweep(sweep(gold, schedule, jobs=args.jobs)), end="")


if __name__ == "__main__":
    main()

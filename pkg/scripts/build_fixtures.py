"""Regenerate the bundled fixtures in src/musener/data/fixtures/.

Tweets are written in a small markup, ``[C Name]`` for contributors and
``[W Title]`` for musical works, and converted to IOB files with the
package tokenizer and POS fallback.

    python scripts/build_fixtures.py
"""
import json
import re
from pathlib import Path

from musener.corpus import (EntitySpan, EntityType, TaggedTweet, Token, format_timestamp,
                            iob_from_spans, tokenize, write_corpus)
from musener.features import fallback_pos_chunk

OUT = Path(__file__).resolve().parent.parent / "src" / "musener" / "data" / "fixtures"
BASE = 1525168800  # 2018-05-01T10:00:00Z

# Every contributor here is in the last-name gazetteer and every work
# starts with a work-type word, so the labels follow from gazetteer flags.
TRAIN = [
    "[C Beethoven] is there but not his [W Sonata No. 8]",
    "listening to [C Mozart] on Radio 3 this morning",
    "[C Brahms] [W Symphony No. 4] is pure joy",
    "London was grey today but the music helps",
    "that [W Requiem] by [C Verdi] never gets old",
    "Radio 3 always cheers me up on a Monday",
    "[C Mahler] again , what a treat",
    "can anyone tell me who played the [W Violin Concerto] earlier",
    "[C Schubert] songs on a rainy Friday",
    "the [W Cello Suite] this afternoon was beautiful",
    "Proms season is almost here",
    "[C Vivaldi] makes me want to dance",
    "stunning [W Piano Concerto No. 2] from [C Rachmaninov]",
    "Thanks BBC for the lovely programme",
    "[C Robert Schumann] wrote such tender music",
    "is that the [W Overture] from last night ?",
    "Happy Saturday everyone , tea and [C Haydn]",
    "[C Tchaikovsky] [W Symphony No. 6] never fails",
    "Wigmore Hall concert was excellent",
    "I adore [C Debussy] in the evening",
    "the [W Mass] sounded wonderful in the cathedral",
    "Sunday morning with [C Bach] and coffee",
    "[C Dvorak] [W Symphony No. 9] on the car radio",
    "Manchester audience gave a standing ovation",
    "more [C Chopin] please",
    "that [W Piano Sonata] was played so gently",
    "[C Gustav Mahler] at the Proms tonight",
    "Edinburgh festival line up looks great",
    "the [W Violin Concerto No. 1] by [C Bruch] hmm no",
    "Tuesday night listening with [C Handel]",
    "[C Sibelius] [W Symphony No. 5] was magnificent",
    "that [W String Quartet No. 14] is heartbreaking",
]

# Schedule-linked tweets carry entities the gazetteers do not know; the
# model-only tweets are posted hours away from any track.
TEST = [
    (20000, "m1", "[C Brahms] was lovely this morning"),
    (20100, "m2", "that [W Symphony No. 2] was stunning"),
    (20200, "m3", "[C Elgar] always makes me cry"),
    (20300, "m4", "loving this [W Cello Concerto] right now"),
    (600, "s1", "[C Zelenka] on the radio makes my day"),
    (2600, "s2", "lovely [W stabat mater] on now"),
    (4900, "s3", "[C Strozzi] is such a discovery"),
    (7100, "s4", "so moved by [W miserere] just now"),
]

SCHEDULE = [
    (0, "Now Playing Jan Dismas Zelenka, Collegium Marianum - Lamentations "
        "#jandismaszelenka, #collegiummarianum"),
    (2000, "Now Playing Giovanni Pergolesi, Les Talens Lyriques - Stabat Mater "
           "#giovannipergolesi, #lestalenslyriques"),
    (4000, "Now Playing Barbara Strozzi, Emma Kirkby - Lagrime mie "
           "#barbarastrozzi, #emmakirkby"),
    (6000, "Now Playing Gregorio Allegri, The Sixteen - Miserere "
           "#gregorioallegri, #thesixteen"),
    (6100, "Schedule update: back after the news"),
]

_MARK = re.compile(r"\[(C|W) ([^\]]+)\]")
_KIND = {"C": EntityType.CONTRIBUTOR, "W": EntityType.MUSICAL_WORK}


def parse_markup(text, id=None, timestamp=None):
    surfaces, spans = [], []
    pos = 0
    for m in _MARK.finditer(text):
        surfaces += tokenize(text[pos:m.start()])
        inner = tokenize(m.group(2))
        spans.append(EntitySpan(_KIND[m.group(1)], len(surfaces), len(surfaces) + len(inner)))
        surfaces += inner
        pos = m.end()
    surfaces += tokenize(text[pos:])
    tokens = [Token(s, p, c) for s, (p, c) in zip(surfaces, fallback_pos_chunk(surfaces))]
    return TaggedTweet(id, timestamp, tokens, iob_from_spans(spans, len(tokens)))


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    train = [parse_markup(t, f"t{i:02d}") for i, t in enumerate(TRAIN, 1)]
    write_corpus(train, OUT / "separable_train.iob")
    test = [parse_markup(t, id, BASE + off) for off, id, t in TEST]
    write_corpus(test, OUT / "user_test.iob")
    with open(OUT / "schedule.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for off, text in SCHEDULE:
            fh.write(json.dumps({"ts": format_timestamp(BASE + off), "text": text},
                                ensure_ascii=False) + "\n")
    print(f"wrote {len(train)} training tweets, {len(test)} test tweets, "
          f"{len(SCHEDULE)} schedule lines to {OUT}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Regenerate tests/data/sample_news.jsonl, the bundled 200-article corpus.

The file is deterministic (fixed RNG seed) and its counts are planned, not
sampled, so tests can assert them exactly:

  - 200 articles total, dated 2020-01-17 .. 2021-03-13 (422 distinct days
    end to end);
  - 180 articles in the kept categories (inrikes/utrikes), of which 170
    fall inside the 12 month-slices anchored on the 17th starting
    2020-01-17 and 10 are dated on/after 2021-01-17;
  - per-slice kept counts [12, 18, 40, 22, 14, 9, 6, 3, 8, 11, 15, 12]:
    peak in slice 2 (March-April), minimum in slice 7 (August-September),
    rising again through autumn;
  - 20 articles in dropped categories (14 lokalt, 6 sport) inside the span.

Article text is synthetic Swedish-flavoured filler drawn from per-theme
word pools whose mixture drifts across the year, so the dynamic model has
signal to track end to end.
"""

from __future__ import annotations

import datetime
import json
import random
from calendar import monthrange
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "sample_news.jsonl"

FIRST_START = datetime.date(2020, 1, 17)
SLICE_COUNTS = [12, 18, 40, 22, 14, 9, 6, 3, 8, 11, 15, 12]  # sums to 170
LATE_KEPT = 10  # kept categories, dated 2021-01-17 .. 2021-03-13
DROPPED = [("lokalt", 14), ("sport", 6)]

THEMES = {
    "origin": ["kina", "wuhan", "virus", "utbrott", "smitta", "karantän", "who", "resenär"],
    "policy": [
        "folkhälsomyndigheten",
        "tegnell",
        "rekommendation",
        "munskydd",
        "råd",
        "restriktion",
        "smittspridning",
        "presskonferens",
    ],
    "research": ["antikropp", "vaccin", "forskare", "studie", "läkemedel", "immunitet", "test", "prov"],
    "economy": ["börs", "försäljning", "ekonomi", "krona", "arbetslöshet", "konkurs", "stöd", "företag"],
}
GENERIC = [
    "sverige",
    "regeringen",
    "människor",
    "landet",
    "region",
    "sjukhus",
    "vård",
    "beslut",
    "besked",
    "uppgift",
    "siffror",
    "fall",
]
FILLER = ["och", "att", "det", "som", "en", "på", "för", "med", "av", "är", "i", "om", "men", "till"]

# Long-tail vocabulary: 400 compounds drawn Zipf-like, so a realistic share of
# tokens is rare enough for the document-frequency filters to bite.
_STEMS = [
    "arbets", "barn", "bil", "bok", "brand", "bygg", "dag", "djur", "energi", "film",
    "fisk", "flyg", "folk", "frilufts", "gatu", "hand", "hem", "idrotts", "järn", "kultur",
]
_HEADS = [
    "platsen", "frågan", "laget", "planen", "rummet", "tiden", "vägen", "huset", "mötet",
    "stödet", "kravet", "provet", "rådet", "valet", "målet", "stopp", "varvet", "verket",
    "skolan", "parken",
]
TAIL = [stem + head for stem in _STEMS for head in _HEADS]

# Per-slice theme mixture: attention drifts origin -> policy -> research/economy.
def theme_weights(slice_index: int) -> dict[str, float]:
    t = slice_index / 11.0
    return {
        "origin": max(0.45 - 0.45 * t, 0.05),
        "policy": 0.30 + 0.10 * (1 - abs(t - 0.45)),
        "research": 0.10 + 0.25 * t,
        "economy": 0.08 + 0.30 * t,
    }


def month_anchor(year: int, month: int, day: int) -> datetime.date:
    return datetime.date(year, month, min(day, monthrange(year, month)[1]))


def slice_bounds(n: int) -> list[datetime.date]:
    bounds = [FIRST_START]
    year, month = FIRST_START.year, FIRST_START.month
    for _ in range(n):
        year, month = (year + 1, 1) if month == 12 else (year, month + 1)
        bounds.append(month_anchor(year, month, FIRST_START.day))
    return bounds


def sample_tokens(rng: random.Random, weights: dict[str, float], n: int) -> list[str]:
    names = list(weights)
    probs = [weights[name] for name in names]
    tokens: list[str] = []
    while len(tokens) < n:
        roll = rng.random()
        if roll < 0.30:
            tokens.append(rng.choice(FILLER))
        elif roll < 0.45:
            tokens.append(rng.choice(GENERIC))
        elif roll < 0.70:
            # Zipf-ish draw over the long-tail compounds.
            rank = min(int(rng.paretovariate(0.7)), len(TAIL)) - 1
            tokens.append(TAIL[rank])
        else:
            theme = rng.choices(names, probs)[0]
            word = rng.choice(THEMES[theme])
            if word == "tegnell":
                tokens.append("anders")  # frequent adjacent pair for phrase detection
            tokens.append(word)
    return tokens[:n]


def make_article(rng: random.Random, index: int, day: datetime.date, category: str, s: int):
    weights = theme_weights(min(s, 11))
    body_tokens = sample_tokens(rng, weights, rng.randint(50, 90))
    title_tokens = sample_tokens(rng, weights, rng.randint(4, 7))
    return {
        "id": f"art-{index:04d}",
        "date": day.isoformat(),
        "category": category,
        "title": " ".join(title_tokens).capitalize() + ".",
        "body": " ".join(body_tokens) + ".",
    }


def main() -> None:
    rng = random.Random(20200117)
    bounds = slice_bounds(len(SLICE_COUNTS))
    records = []
    index = 0

    for s, count in enumerate(SLICE_COUNTS):
        span = (bounds[s + 1] - bounds[s]).days
        for i in range(count):
            # Force one document onto each slice's first day so boundary
            # inclusion is exercised; spread the rest across the slice.
            offset = 0 if i == 0 else rng.randrange(span)
            day = bounds[s] + datetime.timedelta(days=offset)
            category = rng.choice(["inrikes", "utrikes"])
            records.append(make_article(rng, index, day, category, s))
            index += 1

    # Kept categories but dated after the sliced year; first one exactly on
    # the exclusive end bound, last one on the corpus end date.
    late_start = bounds[-1]
    late_end = datetime.date(2021, 3, 13)
    late_span = (late_end - late_start).days
    for i in range(LATE_KEPT):
        if i == 0:
            day = late_start
        elif i == LATE_KEPT - 1:
            day = late_end
        else:
            day = late_start + datetime.timedelta(days=rng.randrange(late_span + 1))
        category = rng.choice(["inrikes", "utrikes"])
        records.append(make_article(rng, index, day, category, 11))
        index += 1

    in_span = (bounds[-1] - bounds[0]).days
    for category, count in DROPPED:
        for _ in range(count):
            day = bounds[0] + datetime.timedelta(days=rng.randrange(in_span))
            records.append(make_article(rng, index, day, category, min(11, (day - bounds[0]).days // 30)))
            index += 1

    rng.shuffle(records)  # the loader sorts by date; exercise that
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with OUT.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} records to {OUT}")


if __name__ == "__main__":
    main()

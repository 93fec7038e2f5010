"""Synthetic tweet corpora with the shared-task file schema.

Informative and uninformative tweets draw their keywords from two disjoint
vocabularies and share a filler vocabulary, so a bag-of-words linear model can
separate the classes perfectly.
"""

from __future__ import annotations

import random
from pathlib import Path

from tweetinfo.corpus import DatasetSplit, Label, TweetRecord

INFORMATIVE_WORDS = (
    "confirmed", "cases", "deaths", "hospitalized", "tested", "positive",
    "recovered", "reported", "icu", "fatalities", "outbreak", "county",
)
UNINFORMATIVE_WORDS = (
    "pray", "love", "hope", "bored", "lockdown", "vibes", "blessed",
    "netflix", "memes", "miss", "quarantine", "mood",
)
FILLER_WORDS = (
    "the", "today", "in", "we", "covid", "people", "new", "this", "and",
    "#covid19", "of", "now", "@someone", "https://t.co/x1",
)


def make_tweet(rng: random.Random, label: Label) -> str:
    keywords = INFORMATIVE_WORDS if label == Label.INFORMATIVE else UNINFORMATIVE_WORDS
    words = rng.sample(keywords, rng.randint(2, 4)) + [rng.choice(FILLER_WORDS) for _ in range(rng.randint(2, 5))]
    rng.shuffle(words)
    return " ".join(words)


def make_records(n_informative: int, n_uninformative: int, seed: int, id_prefix: str = "") -> list[TweetRecord]:
    rng = random.Random(seed)
    labels = [Label.INFORMATIVE] * n_informative + [Label.UNINFORMATIVE] * n_uninformative
    rng.shuffle(labels)
    return [TweetRecord(f"{id_prefix}{i + 1}", make_tweet(rng, y), y) for i, y in enumerate(labels)]


def separable_corpus(n_train: int = 400, n_valid: int = 100, seed: int = 0) -> tuple[DatasetSplit, DatasetSplit]:
    """Balanced train/valid splits of keyword-separable tweets."""
    train = make_records(n_train // 2, n_train - n_train // 2, seed, "t")
    valid = make_records(n_valid // 2, n_valid - n_valid // 2, seed + 1, "v")
    return DatasetSplit("train", train), DatasetSplit("valid", valid)


def write_split(path, records, header: bool = True, labels: bool = True) -> Path:
    path = Path(path)
    lines = ["Id\tText\tLabel\n" if labels else "Id\tText\n"] if header else []
    for rec in records:
        row = [rec.id, rec.text] + ([rec.label.name] if labels and rec.label is not None else [])
        lines.append("\t".join(row) + "\n")
    path.write_text("".join(lines), encoding="utf-8")
    return path

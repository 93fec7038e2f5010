"""Shared-task split files, corpus statistics and prediction files.

Split files are UTF-8, tab-separated, one tweet per line::

    Id<TAB>Text<TAB>Label

The label column is optional (test splits) and a first line whose first cell
is ``Id`` is treated as a header. Tab characters inside tweet text are not
supported by the format.
"""

from __future__ import annotations

import enum
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from tweetinfo.errors import LabelError, MissingLabelError, ParseError

PathLike = Union[str, os.PathLike]

SPLIT_NAMES = ("train", "valid", "test")


class Label(enum.IntEnum):
    UNINFORMATIVE = 0
    INFORMATIVE = 1

    @classmethod
    def parse(cls, value: str) -> "Label":
        """Case-insensitive, whitespace-trimmed parse of a label string."""
        key = value.strip().upper()
        try:
            return cls[key]
        except KeyError:
            raise LabelError(f"unknown label {value!r}") from None

    @classmethod
    def from_prob(cls, y: float, threshold: float = 0.5) -> "Label":
        return cls.INFORMATIVE if y >= threshold else cls.UNINFORMATIVE


@dataclass(frozen=True)
class TweetRecord:
    id: str
    text: str
    label: Optional[Label] = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("tweet id must be non-empty")
        if not self.text.strip():
            raise ValueError(f"tweet {self.id!r} has empty text")


@dataclass(frozen=True)
class DatasetSplit:
    name: str
    records: tuple = ()

    def __post_init__(self):
        if self.name not in SPLIT_NAMES:
            raise ValueError(f"split name must be one of {SPLIT_NAMES}, got {self.name!r}")
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        seen = set()
        for rec in records:
            if rec.id in seen:
                raise ValueError(f"duplicate id {rec.id!r} in {self.name} split")
            seen.add(rec.id)
        if self.name != "test" and any(rec.label is None for rec in records):
            raise ValueError(f"{self.name} split requires every record to carry a label")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def ids(self) -> list[str]:
        return [rec.id for rec in self.records]

    @property
    def texts(self) -> list[str]:
        return [rec.text for rec in self.records]

    @property
    def labels(self) -> list[Optional[Label]]:
        return [rec.label for rec in self.records]

    @property
    def is_labeled(self) -> bool:
        return all(rec.label is not None for rec in self.records)


@dataclass(frozen=True)
class CorpusStats:
    counts: dict = field(default_factory=dict)
    unlabeled: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.unlabeled

    def __getitem__(self, label: Label) -> int:
        return self.counts.get(label, 0)


def _split_line(line: str) -> list[str]:
    return line.rstrip("\r\n").split("\t")


def load_split(path: PathLike, expect_labels: bool, name: Optional[str] = None) -> DatasetSplit:
    """Read a split file, preserving line order.

    ``name`` defaults to ``train`` for labeled reads and ``test`` otherwise.
    Blank lines are skipped; line numbers in errors are physical (1-based).
    """
    if name is None:
        name = "train" if expect_labels else "test"
    records = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            fields = _split_line(raw)
            if lineno == 1 and fields[0].strip() == "Id":
                continue
            if len(fields) not in (2, 3):
                raise ParseError(f"expected 2 or 3 tab-separated fields, got {len(fields)}", line=lineno, path=path)
            tweet_id, text = fields[0].strip(), fields[1].strip()
            if not tweet_id:
                raise ParseError("empty id", line=lineno, path=path)
            if not text:
                raise ParseError(f"empty text for id {tweet_id!r}", line=lineno, path=path)
            if tweet_id in seen:
                raise ParseError(f"duplicate id {tweet_id!r} (first seen on line {seen[tweet_id]})",
                                 line=lineno, path=path)
            seen[tweet_id] = lineno
            label = None
            if len(fields) == 3 and fields[2].strip():
                try:
                    label = Label.parse(fields[2])
                except LabelError:
                    raise LabelError(f"unknown label {fields[2]!r}", line=lineno, path=path) from None
            elif expect_labels:
                raise MissingLabelError(f"missing label for id {tweet_id!r}", line=lineno, path=path)
            records.append(TweetRecord(tweet_id, text, label))
    return DatasetSplit(name, tuple(records))


def compute_stats(split: DatasetSplit | Iterable[TweetRecord]) -> CorpusStats:
    counter = Counter(rec.label for rec in split)
    unlabeled = counter.pop(None, 0)
    counts = {label: counter.get(label, 0) for label in (Label.INFORMATIVE, Label.UNINFORMATIVE)}
    return CorpusStats(counts, unlabeled)


def write_predictions(ids: Sequence[str], labels: Sequence[Label], path: PathLike) -> None:
    """Write one ``id<TAB>LABEL`` line per record, in input order."""
    ids = list(ids)
    labels = list(labels)
    if len(ids) != len(labels):
        raise ValueError(f"got {len(ids)} ids but {len(labels)} labels")
    lines = []
    for tweet_id, label in zip(ids, labels):
        tweet_id = str(tweet_id)
        if not tweet_id or any(c in tweet_id for c in "\t\r\n"):
            raise ValueError(f"id {tweet_id!r} cannot be written to a tab-separated file")
        lines.append(f"{tweet_id}\t{Label(label).name}\n")
    _atomic_write_text(path, "".join(lines))


def read_predictions(path: PathLike) -> tuple[list[str], list[Label]]:
    """Read a prediction file written by :func:`write_predictions`.

    Prediction files carry no header; ids are taken verbatim.
    """
    ids, labels = [], []
    with open(path, encoding="utf-8", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ParseError(f"expected 2 tab-separated fields, got {len(fields)}", line=lineno, path=path)
            try:
                labels.append(Label.parse(fields[1]))
            except LabelError:
                raise LabelError(f"unknown label {fields[1]!r}", line=lineno, path=path) from None
            ids.append(fields[0])
    return ids, labels


def _atomic_write_text(path: PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    os.replace(tmp, path)

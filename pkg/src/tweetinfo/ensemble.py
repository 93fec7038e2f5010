"""Unweighted probability averaging and majority voting over trained models.

Class indices follow :class:`~tweetinfo.corpus.Label`: 0 is UNINFORMATIVE,
1 is INFORMATIVE. Per-model probability files hold one line per tweet::

    id<TAB>p_uninformative<TAB>p_informative
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from tweetinfo.corpus import Label
from tweetinfo.errors import AlignmentError, ParseError, ProbabilityError

N_CLASSES = 2
SUM_TOL = 1e-6
# Column means closer than this count as tied.
TIE_TOL = 1e-9

SCHEMES = ("averaging", "voting")


class AverageResult(NamedTuple):
    label: int
    mean: np.ndarray


class VoteResult(NamedTuple):
    label: int
    tally: dict
    tie_path: str  # "none", "averaging" or "default"


def validate_rows(pm, model_ids: Optional[Sequence[str]] = None) -> np.ndarray:
    pm = np.asarray(pm, dtype=np.float64)
    if pm.ndim != 2 or pm.shape[0] == 0:
        raise ValueError("need a non-empty (models x classes) probability matrix")
    if pm.shape[1] != N_CLASSES:
        raise ValueError(f"expected {N_CLASSES} classes, got {pm.shape[1]}")
    if model_ids is None:
        model_ids = [f"model {i}" for i in range(pm.shape[0])]
    for name, row in zip(model_ids, pm):
        if not np.all(np.isfinite(row)) or np.any(row < 0) or abs(row.sum() - 1.0) > SUM_TOL:
            raise ProbabilityError(f"{name}: row {row.tolist()} is not a probability vector")
    return pm


def argmax_low_tie(vec) -> int:
    """Index of the larger entry; near-equal entries resolve to 0 (UNINFORMATIVE)."""
    return int(vec[1] - vec[0] > TIE_TOL)


def decide(row) -> int:
    """Hard decision of one model: INFORMATIVE iff its probability is at least 0.5."""
    return int(Label.from_prob(float(row[1])))


def average_combine(pm, model_ids: Optional[Sequence[str]] = None) -> AverageResult:
    pm = validate_rows(pm, model_ids)
    mean = pm.mean(axis=0)
    return AverageResult(argmax_low_tie(mean), mean)


def vote_combine(decisions: Sequence[int], probs=None) -> VoteResult:
    """Majority vote; a tied tally falls back to averaging ``probs`` when given.

    Without ``probs`` a tie resolves to UNINFORMATIVE.
    """
    decisions = list(decisions)
    if not decisions:
        raise ValueError("need at least one model decision")
    for d in decisions:
        if d not in (0, 1):
            raise ValueError(f"decision must be 0 or 1, got {d!r}")
    tally = {c: sum(1 for d in decisions if int(d) == c) for c in range(N_CLASSES)}
    if tally[0] != tally[1]:
        return VoteResult(int(tally[1] > tally[0]), tally, "none")
    if probs is not None:
        probs = np.asarray(probs, dtype=np.float64)
        if probs.shape[0] != len(decisions):
            raise ValueError(f"{len(decisions)} decisions but {probs.shape[0]} probability rows")
        return VoteResult(average_combine(probs).label, tally, "averaging")
    return VoteResult(int(Label.UNINFORMATIVE), tally, "default")


# ---------------------------------------------------------------------------
# Batch combination over probability files
# ---------------------------------------------------------------------------


@dataclass
class ProbabilityTable:
    """Per-tweet probability rows of one model."""

    ids: list
    probs: np.ndarray
    name: str = "model"

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64).reshape(-1, N_CLASSES)
        if len(self.ids) != len(self.probs):
            raise ValueError(f"{self.name}: {len(self.ids)} ids but {len(self.probs)} probability rows")

    def decisions(self) -> list[int]:
        return [decide(row) for row in self.probs]


def write_probabilities(path, ids: Sequence[str], probs) -> None:
    probs = np.asarray(probs, dtype=np.float64).reshape(-1, N_CLASSES)
    if len(ids) != len(probs):
        raise ValueError(f"got {len(ids)} ids but {len(probs)} probability rows")
    lines = [f"{i}\t{row[0]!r}\t{row[1]!r}\n" for i, row in zip(ids, probs.tolist())]
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as f:
        f.writelines(lines)
    os.replace(tmp, path)


def read_probabilities(path) -> ProbabilityTable:
    ids, rows = [], []
    with open(path, encoding="utf-8", newline="") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", line=lineno, path=path)
            try:
                row = [float(fields[1]), float(fields[2])]
            except ValueError:
                raise ParseError(f"non-numeric probability in {line!r}", line=lineno, path=path) from None
            ids.append(fields[0])
            rows.append(row)
    table = ProbabilityTable(ids, np.array(rows).reshape(-1, N_CLASSES), name=str(path))
    if rows:
        validate_rows(table.probs, [f"{path}: id {i}" for i in table.ids])
    return table


def check_alignment(tables: Sequence[ProbabilityTable]) -> list:
    ref = tables[0]
    for other in tables[1:]:
        for pos, (a, b) in enumerate(zip(ref.ids, other.ids)):
            if a != b:
                raise AlignmentError(
                    f"id mismatch at position {pos}: {ref.name} has {a!r}, {other.name} has {b!r}")
        if len(ref.ids) != len(other.ids):
            pos = min(len(ref.ids), len(other.ids))
            longer = ref if len(ref.ids) > len(other.ids) else other
            raise AlignmentError(
                f"id mismatch at position {pos}: {longer.name} has extra id {longer.ids[pos]!r}")
    return list(ref.ids)


def combine_batch(tables: Sequence[ProbabilityTable], scheme: str) -> list[tuple[str, Label]]:
    """Apply ``scheme`` per tweet across aligned per-model tables."""
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if not tables:
        raise ValueError("need at least one model")
    ids = check_alignment(tables)
    stacked = np.stack([t.probs for t in tables], axis=1)  # (N, M, C)
    out = []
    for i, tweet_id in enumerate(ids):
        pm = stacked[i]
        if scheme == "averaging":
            label = average_combine(pm).label
        else:
            label = vote_combine([decide(row) for row in pm], pm).label
        out.append((tweet_id, Label(label)))
    return out

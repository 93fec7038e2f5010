"""Positive-class (INFORMATIVE) precision, recall and F1."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Sequence

from tweetinfo.corpus import Label

POSITIVE = Label.INFORMATIVE


@dataclass(frozen=True)
class EvaluationReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def render(self) -> str:
        return f"P={self.precision:.4f} R={self.recall:.4f} F1={self.f1:.4f}"

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_tsv(self) -> str:
        keys = ("tp", "fp", "fn", "tn", "precision", "recall", "f1")
        values = [str(getattr(self, k)) if k in ("tp", "fp", "fn", "tn") else f"{getattr(self, k):.4f}" for k in keys]
        return "\t".join(keys) + "\n" + "\t".join(values) + "\n"


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def f1_from_counts(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    denom = precision + recall
    f1 = 2 * precision * recall / denom if denom > 0 else 0.0
    return precision, recall, f1


def evaluate(gold: Sequence[Label], pred: Sequence[Label]) -> EvaluationReport:
    """Confusion counts and P/R/F1 with INFORMATIVE as the positive class.

    Undefined ratios (zero denominators) are reported as 0.
    """
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} labels but pred has {len(pred)}")
    if not gold:
        raise ValueError("cannot evaluate an empty set of predictions")
    tp = fp = fn = tn = 0
    for g, p in zip(gold, pred):
        g_pos = Label(g) == POSITIVE
        p_pos = Label(p) == POSITIVE
        if g_pos and p_pos:
            tp += 1
        elif p_pos:
            fp += 1
        elif g_pos:
            fn += 1
        else:
            tn += 1
    precision, recall, f1 = f1_from_counts(tp, fp, fn)
    return EvaluationReport(tp, fp, fn, tn, precision, recall, f1)

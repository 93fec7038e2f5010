"""Independent reference computations the tests compare against.

Nothing here imports the code paths it checks: ensemble decisions use exact
rational arithmetic, metric counts use pair enumeration, gradients use central
finite differences.
"""

from fractions import Fraction
from itertools import product

import numpy as np
import torch


# ---------------------------------------------------------------- ensembles

GRID = [Fraction(k, 10) for k in range(11)]


def grid_rows():
    """All 2-class probability rows (1 - q, q) with q on the 11-point grid."""
    return [(1 - q, q) for q in GRID]


def oracle_average(rows):
    m = len(rows)
    mean0 = sum(r[0] for r in rows) / m
    mean1 = sum(r[1] for r in rows) / m
    return 1 if mean1 > mean0 else 0


def oracle_decision(row):
    return 1 if row[1] >= Fraction(1, 2) else 0


def oracle_vote(rows):
    votes = [oracle_decision(r) for r in rows]
    ones = votes.count(1)
    zeros = votes.count(0)
    if ones != zeros:
        return 1 if ones > zeros else 0
    return oracle_average(rows)


def all_grid_cases(max_models=3):
    rows = grid_rows()
    for m in range(1, max_models + 1):
        yield from product(rows, repeat=m)


# ---------------------------------------------------------------- metrics

def oracle_counts(gold, pred):
    """Confusion counts by enumerating every (gold, pred) combination."""
    counts = {}
    for g_val, p_val in product((0, 1), repeat=2):
        counts[(g_val, p_val)] = sum(1 for g, p in zip(gold, pred) if int(g) == g_val and int(p) == p_val)
    tp, fp, fn, tn = counts[(1, 1)], counts[(0, 1)], counts[(1, 0)], counts[(0, 0)]
    precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
    recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else Fraction(0)
    return tp, fp, fn, tn, precision, recall, f1


# ---------------------------------------------------------------- gradients

def finite_difference_grads(loss_fn, params, step=1e-5):
    """Central differences of ``loss_fn()`` w.r.t. every element of ``params``."""
    grads = []
    with torch.no_grad():
        for p in params:
            g = torch.zeros_like(p)
            flat, gflat = p.view(-1), g.view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + step
                up = float(loss_fn())
                flat[i] = orig - step
                down = float(loss_fn())
                flat[i] = orig
                gflat[i] = (up - down) / (2 * step)
            grads.append(g)
    return grads


def relative_error(a, b):
    a = np.concatenate([np.ravel(x) for x in a])
    b = np.concatenate([np.ravel(x) for x in b])
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(a - b) / scale)


# ---------------------------------------------------------------- separability

def bag_of_words_separable(train, valid):
    """Fit an unregularized-ish logistic regression on word counts; report accuracies."""
    from sklearn.feature_extraction.text import CountVectorizer
    from sklearn.linear_model import LogisticRegression

    vec = CountVectorizer(token_pattern=r"\S+", lowercase=True)
    x_train = vec.fit_transform(train.texts)
    x_valid = vec.transform(valid.texts)
    y_train = [int(y) for y in train.labels]
    y_valid = [int(y) for y in valid.labels]
    clf = LogisticRegression(C=1e4, max_iter=5000).fit(x_train, y_train)
    return clf.score(x_train, y_train), clf.score(x_valid, y_valid)

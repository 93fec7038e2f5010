import itertools

import numpy as np
import pytest

from oracles import all_grid_cases, oracle_average, oracle_vote
from tweetinfo.corpus import Label
from tweetinfo.ensemble import (
    ProbabilityTable,
    average_combine,
    combine_batch,
    decide,
    read_probabilities,
    vote_combine,
    write_probabilities,
)
from tweetinfo.errors import AlignmentError, ProbabilityError


def test_average_three_models():
    label, mean = average_combine([[0.9, 0.1], [0.6, 0.4], [0.3, 0.7]])
    assert label == 0
    assert np.allclose(mean, [0.6, 0.4])


def test_average_single_model():
    label, mean = average_combine([[0.2, 0.8]])
    assert label == 1
    assert np.array_equal(mean, [0.2, 0.8])


def test_average_tie_goes_uninformative():
    assert average_combine([[0.5, 0.5], [0.5, 0.5]]).label == 0


def test_average_rejects_bad_rows():
    with pytest.raises(ValueError):
        average_combine(np.zeros((0, 2)))
    with pytest.raises(ProbabilityError, match="judge"):
        average_combine([[0.5, 0.5], [0.7, 0.7]], model_ids=["a", "judge"])
    with pytest.raises(ProbabilityError):
        average_combine([[1.2, -0.2]])


def test_vote_counts():
    res = vote_combine([1, 1, 0])
    assert res.label == 1 and res.tally == {0: 1, 1: 2} and res.tie_path == "none"
    assert vote_combine([0, 0, 0, 0, 0]).label == 0


def test_vote_tie_falls_back_to_averaging():
    res = vote_combine([1, 0], probs=[[0.9, 0.1], [0.4, 0.6]])
    assert res.tie_path == "averaging"
    assert res.label == 0
    assert np.allclose(average_combine([[0.9, 0.1], [0.4, 0.6]]).mean, [0.65, 0.35])


def test_vote_tie_without_probs_defaults_uninformative():
    res = vote_combine([1, 0])
    assert res.label == 0 and res.tie_path == "default"


@pytest.mark.parametrize("bad", [[], [2], [1, -1], [0.5]])
def test_vote_rejects(bad):
    with pytest.raises(ValueError):
        vote_combine(bad)


def test_decide_threshold():
    assert decide([0.5, 0.5]) == 1
    assert decide([0.51, 0.49]) == 0


def test_grid_matches_oracle():
    for rows in all_grid_cases(3):
        pm = np.array([[float(a), float(b)] for a, b in rows])
        assert average_combine(pm).label == oracle_average(rows)
        assert vote_combine([decide(r) for r in pm], pm).label == oracle_vote(rows)


def test_odd_models_never_tie():
    for m in (1, 3, 5, 7):
        for decisions in itertools.product((0, 1), repeat=m):
            assert vote_combine(list(decisions)).tie_path == "none"


def test_odd_replication_keeps_vote():
    rng = np.random.default_rng(0)
    for _ in range(200):
        m = int(rng.integers(1, 6))
        q = rng.random(m)
        pm = np.stack([1 - q, q], axis=1)
        decisions = [decide(r) for r in pm]
        base = vote_combine(decisions, pm).label
        for k in (3, 5):
            assert vote_combine(decisions * k, np.tile(pm, (k, 1))).label == base


def _tables(probs_per_model, ids):
    return [ProbabilityTable(list(ids), np.asarray(p), name=f"m{i}") for i, p in enumerate(probs_per_model)]


def test_combine_batch_shapes():
    ids = ["1", "2"]
    p = [[[0.2, 0.8], [0.7, 0.3]], [[0.4, 0.6], [0.9, 0.1]], [[0.6, 0.4], [0.1, 0.9]]]
    for scheme in ("averaging", "voting"):
        out = combine_batch(_tables(p, ids), scheme)
        assert [i for i, _ in out] == ids
    assert combine_batch(_tables(p, ids), "voting") == [("1", Label.INFORMATIVE), ("2", Label.UNINFORMATIVE)]


def test_combine_batch_single_model_equals_argmax():
    probs = [[0.2, 0.8], [0.7, 0.3], [0.45, 0.55]]
    tables = _tables([probs], ["a", "b", "c"])
    expected = [Label(int(np.argmax(r))) for r in probs]
    for scheme in ("averaging", "voting"):
        assert [y for _, y in combine_batch(tables, scheme)] == expected


def test_combine_batch_misaligned():
    t1 = ProbabilityTable(["1", "2"], [[0.5, 0.5], [0.5, 0.5]], name="a")
    t2 = ProbabilityTable(["2", "1"], [[0.5, 0.5], [0.5, 0.5]], name="b")
    with pytest.raises(AlignmentError, match="position 0"):
        combine_batch([t1, t2], "voting")
    t3 = ProbabilityTable(["1"], [[0.5, 0.5]], name="c")
    with pytest.raises(AlignmentError, match="position 1"):
        combine_batch([t1, t3], "averaging")


def test_combine_batch_rejects_scheme():
    with pytest.raises(ValueError):
        combine_batch(_tables([[[0.5, 0.5]]], ["1"]), "stacking")


def test_probability_file_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    q = rng.random(20)
    probs = np.stack([1 - q, q], axis=1)
    ids = [f"id{i}" for i in range(20)]
    path = tmp_path / "p.tsv"
    write_probabilities(path, ids, probs)
    table = read_probabilities(path)
    assert table.ids == ids
    assert np.array_equal(table.probs, probs)
    assert path.read_text().splitlines()[0].count("\t") == 2


def test_probability_file_validation(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("1\t0.3\t0.3\n")
    with pytest.raises(ProbabilityError, match="id 1"):
        read_probabilities(path)

import string

import pytest
from hypothesis import given, settings, strategies as st

from tweetinfo.corpus import (
    CorpusStats,
    DatasetSplit,
    Label,
    TweetRecord,
    compute_stats,
    load_split,
    read_predictions,
    write_predictions,
)
from tweetinfo.errors import LabelError, MissingLabelError, ParseError

INF, UNINF = Label.INFORMATIVE, Label.UNINFORMATIVE


def write(tmp_path, text, name="split.tsv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_label_numeric_values():
    assert int(INF) == 1 and int(UNINF) == 0
    assert len(Label) == 2


@pytest.mark.parametrize("raw", ["informative", " INFORMATIVE ", "Informative\n"])
def test_label_parse_is_case_and_space_insensitive(raw):
    assert Label.parse(raw) is INF


def test_load_two_labeled_lines(tmp_path):
    path = write(tmp_path, "1\thospital reports 12 new cases\tINFORMATIVE\n2\tstay safe everyone\tUNINFORMATIVE\n")
    split = load_split(path, expect_labels=True)
    assert len(split) == 2
    assert split.labels == [INF, UNINF]
    assert split.ids == ["1", "2"]
    assert split.texts[0] == "hospital reports 12 new cases"


def test_header_line_skipped(tmp_path):
    path = write(tmp_path, "Id\tText\tLabel\n7\tsome text\tinformative\n")
    split = load_split(path, expect_labels=True)
    assert split.ids == ["7"]


def test_empty_file_gives_empty_split(tmp_path):
    split = load_split(write(tmp_path, ""), expect_labels=True)
    assert len(split) == 0
    stats = compute_stats(split)
    assert stats[INF] == 0 and stats[UNINF] == 0 and stats.total == 0


def test_missing_label_reports_line(tmp_path):
    path = write(tmp_path, "3\tonly two fields missing tab\n")
    with pytest.raises(MissingLabelError) as exc:
        load_split(path, expect_labels=True)
    assert exc.value.line == 1
    assert "line 1" in str(exc.value)


def test_unlabeled_allowed_for_test_split(tmp_path):
    split = load_split(write(tmp_path, "3\tno label here\n"), expect_labels=False)
    assert split.name == "test"
    assert split.labels == [None]
    assert compute_stats(split).unlabeled == 1


def test_wrong_field_count(tmp_path):
    path = write(tmp_path, "1\ta\tINFORMATIVE\n2\tb\tINFORMATIVE\textra\n")
    with pytest.raises(ParseError) as exc:
        load_split(path, expect_labels=True)
    assert exc.value.line == 2


def test_single_field_line_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_split(write(tmp_path, "lonely\n"), expect_labels=False)


def test_unknown_label(tmp_path):
    with pytest.raises(LabelError) as exc:
        load_split(write(tmp_path, "1\ttext\tMAYBE\n"), expect_labels=True)
    assert exc.value.line == 1


def test_duplicate_id_rejected(tmp_path):
    with pytest.raises(ParseError, match="duplicate"):
        load_split(write(tmp_path, "1\ta\tINFORMATIVE\n1\tb\tINFORMATIVE\n"), expect_labels=True)


def test_blank_text_rejected(tmp_path):
    with pytest.raises(ParseError, match="empty text"):
        load_split(write(tmp_path, "1\t   \tINFORMATIVE\n"), expect_labels=True)


def test_record_invariants():
    with pytest.raises(ValueError):
        TweetRecord("", "text")
    with pytest.raises(ValueError):
        TweetRecord("1", "  ")
    with pytest.raises(ValueError):
        DatasetSplit("train", [TweetRecord("1", "a")])
    with pytest.raises(ValueError):
        DatasetSplit("dev", [])


def test_stats_total_counts_unlabeled():
    split = DatasetSplit("test", [TweetRecord("1", "a", INF), TweetRecord("2", "b"), TweetRecord("3", "c", UNINF)])
    stats = compute_stats(split)
    assert stats.counts == {INF: 1, UNINF: 1}
    assert stats.unlabeled == 1
    assert stats.total == 3
    assert isinstance(stats, CorpusStats)


def test_write_predictions_format(tmp_path):
    path = tmp_path / "pred.tsv"
    write_predictions(["1", "2"], [INF, UNINF], path)
    assert path.read_bytes() == b"1\tINFORMATIVE\n2\tUNINFORMATIVE\n"


def test_write_empty_predictions(tmp_path):
    path = tmp_path / "pred.tsv"
    write_predictions([], [], path)
    assert path.read_bytes() == b""


def test_write_predictions_length_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_predictions(["1"], [], tmp_path / "pred.tsv")


def test_write_predictions_unwritable(tmp_path):
    with pytest.raises(OSError):
        write_predictions(["1"], [INF], tmp_path / "missing_dir" / "pred.tsv")


printable_ids = st.text(alphabet=string.printable[:95], min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(printable_ids, st.sampled_from(list(Label))), max_size=200))
def test_prediction_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("rt") / "pred.tsv"
    ids = [i for i, _ in rows]
    labels = [y for _, y in rows]
    write_predictions(ids, labels, path)
    assert read_predictions(path) == (ids, labels)


tweet_words = st.text(alphabet=string.ascii_letters + string.digits + " @#:/.", min_size=1, max_size=30).filter(
    lambda s: s.strip())


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(tweet_words, st.sampled_from(["INFORMATIVE", "uninformative", ""])), max_size=50),
       st.booleans())
def test_stats_total_equals_data_lines_and_order_kept(tmp_path_factory, rows, header):
    lines = ["Id\tText\tLabel"] if header else []
    for k, (text, label) in enumerate(rows):
        lines.append(f"id{k}\t{text}" + (f"\t{label}" if label else ""))
    path = tmp_path_factory.mktemp("st") / "split.tsv"
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    split = load_split(path, expect_labels=False)
    assert compute_stats(split).total == len(rows)
    assert split.ids == [f"id{k}" for k in range(len(rows))]

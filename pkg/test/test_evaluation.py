import pytest

from conftest import TROUBLE_ROWS, make_sentence
from path_srl.errors import AlignmentError
from path_srl.evaluation import (
    FREQUENCY_BUCKETS,
    LENGTH_BUCKETS,
    f1_by_sentence_length,
    path_frequencies,
    recall_by_path_frequency,
    report_by_category_and_role,
    role_group,
    score,
)


def _have(roles):
    return make_sentence(TROUBLE_ROWS, [(2, "have.03", roles)])


def test_two_of_three_arguments():
    gold = [_have({1: "A0", 3: "A1", 4: "AM-TMP"})]
    predicted = [_have({1: "A0", 3: "A1", 4: "A2"})]
    report = score(gold, predicted)
    arguments = report.buckets["arguments"]
    assert (arguments.correct, arguments.predicted, arguments.gold) == (2, 3, 3)
    assert round(arguments.precision, 2) == round(arguments.recall, 2) == round(arguments.f1, 2) == 66.67
    assert report.buckets["senses"].f1 == 100.0
    assert (report.correct, report.predicted, report.gold) == (3, 4, 4)


def test_wrong_sense_is_an_error():
    gold = [make_sentence(TROUBLE_ROWS, [(4, "raise.01", {})])]
    predicted = [make_sentence(TROUBLE_ROWS, [(4, "raise.02", {})])]
    assert score(gold, predicted).buckets["senses"].correct == 0


def test_identity_scores_100(toy_corpus, trouble):
    assert score(toy_corpus, toy_corpus).f1 == 100.0
    assert score([trouble], [trouble]).f1 == 100.0


def test_empty_predictions_score_zero(toy_corpus):
    empty = [s.with_annotation([]) for s in toy_corpus]
    report = score(toy_corpus, empty)
    assert report.predicted == 0
    assert report.precision == report.recall == report.f1 == 0.0


def test_misaligned_corpora(toy_corpus, trouble):
    with pytest.raises(AlignmentError):
        score(toy_corpus[:3], toy_corpus[:2])
    other = make_sentence([("She", "she", "N", 2, "SBJ")] + TROUBLE_ROWS[1:])
    with pytest.raises(AlignmentError):
        score([trouble], [other])


def _partitioned(report):
    parts = report.buckets.values()
    return (
        sum(p.correct for p in parts) == report.correct
        and sum(p.predicted for p in parts) == report.predicted
        and sum(p.gold for p in parts) == report.gold
    )


def test_breakdowns_partition_the_units(toy_corpus, toy_train):
    gold = toy_corpus
    predicted = [s.with_annotation([]) if k % 3 == 0 else s for k, s in enumerate(toy_corpus)]
    for report in (
        recall_by_path_frequency(gold, predicted, toy_train),
        f1_by_sentence_length(gold, predicted),
        report_by_category_and_role(gold, predicted),
    ):
        assert _partitioned(report)
        assert report.predicted < report.gold


def test_frequency_buckets(trouble):
    unseen = recall_by_path_frequency([trouble], [trouble], [])
    assert list(unseen.buckets) == [name for name, _, _ in FREQUENCY_BUCKETS]
    assert unseen.buckets["0"].gold == 2
    seen = recall_by_path_frequency([trouble], [trouble], [trouble] * 3)
    assert seen.buckets["1-10"].gold == 2
    assert seen.buckets["1-10"].recall == 100.0


def test_path_frequencies_use_relation_paths(trouble):
    counts = path_frequencies([trouble, trouble])
    assert counts["NMOD↑OBJ↑SBJ↓"] == 2
    assert sum(counts.values()) == 4


def test_empty_length_buckets_are_omitted(trouble, toy_corpus):
    assert list(f1_by_sentence_length([trouble], [trouble]).buckets) == ["1-10"]
    names = list(f1_by_sentence_length(toy_corpus, toy_corpus).buckets)
    assert names == [name for name, _, _ in LENGTH_BUCKETS if name in names]


@pytest.mark.parametrize("label, group", [("A0", "A0"), ("A2", "A2"), ("AM-TMP", "AM"), ("AM-LOC", "AM"), ("A3", "other"), ("R-A0", "other")])
def test_role_groups(label, group):
    assert role_group(label) == group


def test_role_table_on_trouble(trouble):
    report = report_by_category_and_role([trouble], [trouble])
    assert report.buckets["verb/A0"].gold == 1
    assert report.buckets["verb/A1"].gold == 1
    assert report.buckets["noun/A0"].gold == 0
    assert len(report.buckets) == 10


def test_records_format(trouble):
    lines = score([trouble], [trouble]).records("overall")
    assert lines[0] == "report=overall bucket=all correct=3 predicted=3 gold=3 precision=100.00 recall=100.00 f1=100.00"
    assert [line.split()[1] for line in lines] == ["bucket=all", "bucket=senses", "bucket=arguments"]


def test_adding_a_correct_argument_does_not_lower_f1():
    gold = [_have({1: "A0", 3: "A1", 4: "AM-TMP"})]
    worse = score(gold, [_have({1: "A0"})]).f1
    better = score(gold, [_have({1: "A0", 3: "A1"})]).f1
    assert better >= worse

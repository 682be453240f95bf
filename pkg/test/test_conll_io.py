import io

import pytest

from conftest import parse
from path_srl.errors import CorpusFormatError
from path_srl.processing.conll_io import read_corpus_file, write_corpus, write_corpus_file

NO_PREDICATES = (
    "1\tTime\ttime\ttime\tNN\tNN\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\n"
    "2\tflies\tfly\tfly\tVBZ\tVBZ\t_\t_\t0\t0\tROOT\tROOT\t_\t_\n"
    "\n"
)

ONE_PREDICATE = (
    "1\tHe\the\the\tPRP\tPRP\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\tA0\n"
    "2\tsold\tsell\tsell\tVBD\tVBD\t_\t_\t0\t0\tROOT\tROOT\tY\tsell.01\t_\n"
    "3\tcars\tcar\tcar\tNNS\tNNS\t_\t_\t2\t2\tOBJ\tOBJ\t_\t_\tA1\n"
    "\n"
)

THREE_PREDICATES = (
    "1\tHe\the\the\tPRP\tPRP\t_\t_\t2\t2\tSBJ\tSBJ\t_\t_\tA0\t_\tA0\n"
    "2\thad\thave\thave\tVBD\tVBD\t_\t_\t0\t0\tROOT\tROOT\tY\thave.03\t_\t_\t_\n"
    "3\ttrouble\ttrouble\ttrouble\tNN\tNN\t_\t_\t2\t2\tOBJ\tOBJ\tY\ttrouble.01\tA1\t_\t_\n"
    "4\traising\traise\traise\tVBG\tVBG\t_\t_\t3\t3\tNMOD\tNMOD\tY\traise.01\t_\tA1\t_\n"
    "5\tfunds\tfund\tfund\tNNS\tNNS\tpl\tpl\t4\t4\tOBJ\tOBJ\t_\t_\t_\t_\tA1\n"
    "\n"
)


def _write(corpus) -> str:
    out = io.StringIO()
    write_corpus(corpus, out)
    return out.getvalue()


@pytest.mark.parametrize("text", [NO_PREDICATES, ONE_PREDICATE, THREE_PREDICATES])
def test_round_trip_is_byte_stable(text):
    assert _write(parse(text)) == text


def test_fields_are_parsed():
    sentence = parse(THREE_PREDICATES)[0]
    assert len(sentence) == 5
    assert sentence.predicate_ids == (2, 3, 4)
    funds = sentence.token(5)
    assert funds.pfeat == "pl"
    assert funds.phead == 4
    assert funds.apreds == ("", "", "A1")
    assert sentence.token(2).pred == "have.03"
    assert sentence.arguments_of(0) == [(1, "A0"), (3, "A1")]


def test_zero_predicate_sentence_has_no_apred_columns():
    sentence = parse(NO_PREDICATES)[0]
    assert sentence.predicate_ids == ()
    assert all(t.apreds == () for t in sentence.tokens)


def test_multiple_sentences_and_missing_final_blank_line():
    corpus = parse(ONE_PREDICATE + NO_PREDICATES.rstrip("\n"))
    assert [len(s) for s in corpus] == [3, 2]


def test_crlf_line_endings_are_accepted():
    corpus = parse(ONE_PREDICATE.replace("\n", "\r\n"))
    assert corpus[0].token(2).pred == "sell.01"


def test_with_annotation_replaces_predicates(trouble):
    relabeled = trouble.with_annotation([(2, "have.03", {1: "A0"}), (4, "raise.01", {5: "A1"})])
    assert relabeled.predicate_ids == (2, 4)
    assert relabeled.token(1).apreds == ("A0", "")
    assert relabeled.token(5).apreds == ("", "A1")
    assert parse(_write([relabeled])) == [relabeled]


def test_file_helpers(tmp_path):
    corpus = parse(THREE_PREDICATES)
    path = tmp_path / "out.conll"
    write_corpus_file(corpus, path)
    assert path.read_bytes() == THREE_PREDICATES.encode("utf-8")
    assert read_corpus_file(path) == corpus


@pytest.mark.parametrize(
    "text, message",
    [
        (ONE_PREDICATE.replace("\tA1\n", "\n"), "columns"),
        (ONE_PREDICATE.replace("\tY\tsell.01", "\t_\tsell.01"), "without FILLPRED"),
        (ONE_PREDICATE.replace("\tY\tsell.01", "\tY\t_"), "PRED is empty"),
        (ONE_PREDICATE.replace("\tY\tsell.01", "\tX\tsell.01"), "FILLPRED"),
        (ONE_PREDICATE.replace("3\tcars", "4\tcars"), "ID 4"),
        (ONE_PREDICATE.replace("\t2\t2\tOBJ", "\t9\t9\tOBJ"), "outside sentence"),
        (ONE_PREDICATE.replace("\t2\t2\tOBJ", "\t3\t3\tOBJ"), "points to itself"),
        (ONE_PREDICATE.replace("\t_\t0\t0\tROOT", "\t_\t3\t3\tROOT"), "cycle"),
        (ONE_PREDICATE.replace("\t0\t0\tROOT", "\tx\t0\tROOT"), "not an integer"),
        (ONE_PREDICATE.replace("A1\n", "A1 \n"), "trailing whitespace"),
        (ONE_PREDICATE.replace("\tcars\tcar", "\t\tcar"), "empty FORM"),
        (ONE_PREDICATE.replace("\tsell\tsell\t", "\t\tsell\t"), "empty LEMMA"),
        (THREE_PREDICATES.replace("A0\t_\tA0", "A0\t\tA0"), "empty APRED2"),
        (ONE_PREDICATE.replace("\tSBJ\tSBJ\t_\t_\tA0", "\tSBJ\tSBJ\t_\t\tA0"), "empty PRED"),
    ],
)
def test_malformed_input_is_rejected(text, message):
    with pytest.raises(CorpusFormatError, match=message):
        parse(text)


def test_errors_carry_line_numbers():
    with pytest.raises(CorpusFormatError) as error:
        parse(NO_PREDICATES + ONE_PREDICATE.replace("\tY\tsell.01", "\tX\tsell.01"))
    assert error.value.line_number == 5

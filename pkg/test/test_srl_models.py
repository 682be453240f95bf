import numpy as np
import pytest

from conftest import make_sentence
from path_srl.processing.dep_graph import build_tree
from path_srl.srl_models import (
    ARG,
    CLASSIFICATION,
    IDENTIFICATION,
    NOUN,
    VERB,
    SrlModel,
    classify_argument,
    disambiguate_predicate,
    identify_arguments,
    identify_predicates,
    is_predicate_candidate,
    predicate_category,
    score_candidates,
    select_models,
    train_predicate_classifier,
)


@pytest.fixture(scope="module")
def predicates(toy_train):
    return train_predicate_classifier(toy_train, [build_tree(s) for s in toy_train], seed=1)


@pytest.mark.parametrize("ppos, category", [("V", VERB), ("VBD", VERB), ("N", NOUN), ("NNS", NOUN), ("IN", VERB), (".", VERB)])
def test_routing_is_a_function_of_ppos(small_bundle, ppos, category):
    assert predicate_category(ppos) == category
    identifier, classifier = select_models(small_bundle.models, ppos)
    assert (identifier.task, classifier.task) == (IDENTIFICATION, CLASSIFICATION)
    assert identifier.category == classifier.category == category


def test_predicate_candidates_are_verbal_or_nominal():
    assert is_predicate_candidate("VBG") and is_predicate_candidate("NN")
    assert not is_predicate_candidate("IN") and not is_predicate_candidate(".")


def test_identification_labels(small_bundle):
    for name, model in small_bundle.models.items():
        if model.task == IDENTIFICATION:
            assert sorted(model.labels.keys) == sorted(["ARG", "NONE"])
        else:
            assert len(model.labels) >= 2


def test_every_reachable_token_is_scored(small_bundle, toy_corpus):
    sentence = toy_corpus[0]
    tree = build_tree(sentence)
    predicate = sentence.predicate_ids[0]
    identifier, _ = select_models(small_bundle.models, sentence.token(predicate).ppos)
    scored = score_candidates(sentence, tree, predicate, identifier)
    assert [token for token, _ in scored] == [t.id for t in sentence.tokens]
    assert all(0.0 < p < 1.0 for _, p in scored)


def test_identification_threshold(small_bundle, toy_corpus):
    sentence = toy_corpus[1]
    tree = build_tree(sentence)
    predicate = sentence.predicate_ids[0]
    identifier, classifier = select_models(small_bundle.models, sentence.token(predicate).ppos)
    assert identify_arguments(sentence, tree, predicate, identifier, threshold=1.0) == []
    everything = identify_arguments(sentence, tree, predicate, identifier, threshold=0.0)
    assert len(everything) == len(sentence)
    with pytest.raises(ValueError):
        identify_arguments(sentence, tree, predicate, classifier)


def test_scores_are_the_network_outputs(small_bundle, toy_corpus):
    sentence = toy_corpus[2]
    tree = build_tree(sentence)
    predicate = sentence.predicate_ids[0]
    identifier, _ = select_models(small_bundle.models, sentence.token(predicate).ppos)
    arg = identifier.labels.get(ARG)
    for token, p in identify_arguments(sentence, tree, predicate, identifier, threshold=0.0):
        path, features = identifier.featurize(sentence, tree, predicate, token)
        assert p == identifier.network.predict(path, features.indices).probabilities[arg]


def test_classification_ranking(small_bundle, toy_corpus):
    sentence = toy_corpus[3]
    tree = build_tree(sentence)
    predicate = sentence.predicate_ids[0]
    _, classifier = select_models(small_bundle.models, sentence.token(predicate).ppos)
    scores = classify_argument(sentence, tree, predicate, 1, classifier)
    labels = [label for label, _ in scores.ranking]
    probabilities = [p for _, p in scores.ranking]
    assert sorted(labels) == sorted(classifier.labels.keys)
    assert probabilities == sorted(probabilities, reverse=True)
    assert abs(sum(probabilities) - 1.0) < 1e-9
    assert scores.embedding.shape == (classifier.network.lstm_spec.embed_dim,)
    assert scores.hidden.shape == (classifier.network.head.spec.hidden_dim,)
    assert scores.best == scores.ranking[0]


def test_model_file_round_trip(small_bundle, toy_corpus, tmp_path):
    model = small_bundle.models["noun-classification"]
    model.save(tmp_path / "model.pathsrl")
    loaded = SrlModel.load(tmp_path / "model.pathsrl")
    assert loaded.labels == model.labels
    assert loaded.path_dict == model.path_dict
    assert loaded.binary_dict == model.binary_dict
    assert loaded.templates == model.templates
    sentence = toy_corpus[0]
    tree = build_tree(sentence)
    a = model.score(sentence, tree, sentence.predicate_ids[0], 1)
    b = loaded.score(sentence, tree, sentence.predicate_ids[0], 1)
    np.testing.assert_array_equal(a.probabilities, b.probabilities)


def test_gold_predicate_mode_returns_fillpred_tokens(predicates, trouble, trouble_tree):
    assert identify_predicates(trouble, trouble_tree, predicates, gold_predicates=True) == [4]


def test_punctuation_only_sentence_has_no_predicates(predicates):
    sentence = make_sentence([(".", ".", ".", 0, "ROOT"), ("!", "!", ".", 1, "P")])
    assert identify_predicates(sentence, build_tree(sentence), predicates) == []


def test_predicate_identification_on_trouble(predicates, trouble, trouble_tree):
    found = identify_predicates(trouble, trouble_tree, predicates)
    assert 4 in found
    assert 1 not in found and 5 not in found


def test_sense_disambiguation(predicates, trouble, trouble_tree):
    assert disambiguate_predicate(trouble, trouble_tree, 4, predicates) == "raise.01"
    assert "raise" not in predicates.sense_models
    assert "run" in predicates.sense_models

    zork = make_sentence([("zorked", "zork", "V", 0, "ROOT")])
    assert disambiguate_predicate(zork, build_tree(zork), 1, predicates) == "zork.01"


def test_sense_models_choose_between_run_senses(predicates):
    transitive = make_sentence([("John", "john", "N", 2, "SBJ"), ("runs", "run", "V", 0, "ROOT"), ("shops", "shop", "N", 2, "OBJ"), (".", ".", ".", 2, "P")])
    intransitive = make_sentence([("John", "john", "N", 2, "SBJ"), ("runs", "run", "V", 0, "ROOT"), (".", ".", ".", 2, "P")])
    assert disambiguate_predicate(transitive, build_tree(transitive), 2, predicates) == "run.01"
    assert disambiguate_predicate(intransitive, build_tree(intransitive), 2, predicates) == "run.02"

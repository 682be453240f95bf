import pytest

from conftest import make_sentence
from path_srl.processing.dep_graph import build_tree, extract_path_sequence
from path_srl.processing.features import (
    DEFAULT_TEMPLATES,
    NO_PATH,
    UNK_POS,
    UNK_REL,
    UNK_WORD,
    BinaryFeatureSet,
    FeatureDict,
    build_path_dict,
    encode_path_items,
    extract_binary_features,
    feature_keys,
    validate_templates,
)


def test_trouble_feature_keys(trouble, trouble_tree):
    keys = feature_keys(trouble, trouble_tree, 4, 1)
    assert keys == [
        "pred.form=raising",
        "pred.pos=V",
        "pred.deprel=NMOD",
        "cand.form=He",
        "cand.pos=N",
        "cand.deprel=SBJ",
        "path=NMOD↑OBJ↑SBJ↓",
        "pred.child.form=funds",
        "pred.child.pos=N",
        "cand.sib.form=trouble",
        "cand.sib.pos=N",
        "relpos=left",
        "between.pos=V+N",
    ]


def test_self_candidate(trouble, trouble_tree):
    keys = feature_keys(trouble, trouble_tree, 4, 4, ["relpos", "path", "between.pos"])
    assert keys == ["relpos=self", "path=", "between.pos="]


def test_unreachable_candidate_gets_no_path_feature():
    sentence = make_sentence([("a", "a", "N", 0, "ROOT"), ("b", "b", "N", 0, "ROOT")])
    keys = feature_keys(sentence, build_tree(sentence), 1, 2, ["path", "relpos"])
    assert keys == [f"path={NO_PATH}", "relpos=right"]


def test_extraction_grows_then_ignores_unknown_keys(trouble, trouble_tree):
    features = FeatureDict()
    first = extract_binary_features(trouble, trouble_tree, 4, 1, features)
    assert len(first) == len(features) == 13
    features.freeze()
    other = extract_binary_features(trouble, trouble_tree, 4, 5, features)
    assert set(other) < set(first)
    assert len(features) == 13


def test_extraction_is_deterministic(trouble, trouble_tree):
    a, b = FeatureDict(), FeatureDict()
    assert extract_binary_features(trouble, trouble_tree, 4, 1, a) == extract_binary_features(trouble, trouble_tree, 4, 1, b)
    assert a == b


def test_binary_feature_set_is_sorted_and_unique():
    assert BinaryFeatureSet.of([5, 1, 5, 3]).indices == (1, 3, 5)
    with pytest.raises(ValueError):
        BinaryFeatureSet((3, 1))


def test_feature_dict_behaviour():
    d = FeatureDict(["a", "b"])
    assert d.lookup("c") == 2
    assert d.key(1) == "b"
    d.freeze()
    assert d.lookup("zzz") is None
    with pytest.raises(KeyError):
        d.add("zzz")
    with_unknown = FeatureDict(["a"], frozen=True, unknown="<unk>")
    assert with_unknown.lookup("zzz") == with_unknown.get("<unk>")
    assert FeatureDict.from_dict(with_unknown.to_dict()) == with_unknown


def test_unknown_template_is_rejected():
    assert validate_templates(["path", "relpos"]) == ("path", "relpos")
    with pytest.raises(ValueError, match="no.such"):
        validate_templates(["path", "no.such"])
    assert len(DEFAULT_TEMPLATES) == 17


def test_path_dict_word_cutoff(trouble, trouble_tree):
    paths = [extract_path_sequence(trouble_tree, trouble, 4, c) for c in (1, 1, 5)]
    vocabulary = build_path_dict(paths, min_word_count=2)
    assert vocabulary.frozen
    assert vocabulary.keys[:3] == [UNK_WORD, UNK_REL, UNK_POS]
    assert "word=he" in vocabulary
    assert "word=fund" not in vocabulary
    assert "rel=OBJ↓" in vocabulary

    encoded = encode_path_items(paths[2], vocabulary)
    assert encoded[-1] == vocabulary.get(UNK_WORD)
    assert encoded[0] == vocabulary.get("pos=V")


def test_unknown_relations_and_tags_map_to_their_own_unk(trouble, trouble_tree):
    vocabulary = build_path_dict([extract_path_sequence(trouble_tree, trouble, 4, 5)], min_word_count=1)
    path = extract_path_sequence(trouble_tree, trouble, 4, 1)
    encoded = encode_path_items(path, vocabulary)
    assert encoded[2] == vocabulary.get(UNK_REL)
    assert encoded[1] == vocabulary.get("word=raise")
    assert UNK_POS in vocabulary

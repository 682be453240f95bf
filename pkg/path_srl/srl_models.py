"""
Predicate and argument labeling stages

Four path networks (verb/noun x identification/classification) score
arguments; logistic regression identifies and disambiguates predicates.
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from sklearn.linear_model import LogisticRegression

from path_srl.errors import NoPathError
from path_srl.processing.conll_io import Sentence
from path_srl.processing.dep_graph import DepTree, extract_path_sequence
from path_srl.processing.features import (
    DEFAULT_TEMPLATES,
    BinaryFeatureSet,
    FeatureDict,
    encode_path_items,
    extract_binary_features,
)
from path_srl.training.neural_core import PathNetwork, Prediction, load_network, save_network

logger = logging.getLogger(__name__)

VERB, NOUN = "verb", "noun"
IDENTIFICATION, CLASSIFICATION = "identification", "classification"
ARG, NONE = "ARG", "NONE"
IDENTIFICATION_LABELS = (NONE, ARG)


def predicate_category(ppos: str) -> str:
    """Noun network for N* tags, verb network for everything else"""
    return NOUN if ppos.startswith("N") else VERB


def is_predicate_candidate(ppos: str) -> bool:
    return ppos[:1] in ("V", "N")


def network_name(category: str, task: str) -> str:
    return f"{category}-{task}"


@dataclass
class SrlModel:
    task: str
    category: str
    network: PathNetwork
    binary_dict: FeatureDict
    path_dict: FeatureDict
    labels: FeatureDict
    templates: tuple[str, ...] = DEFAULT_TEMPLATES
    path_words: str = "plemma"

    def featurize(self, sentence: Sentence, tree: DepTree, predicate: int, candidate: int):
        """(path indices, binary features); raises NoPathError across tree components"""
        path = extract_path_sequence(tree, sentence, predicate, candidate, self.path_words)
        features = extract_binary_features(sentence, tree, predicate, candidate, self.binary_dict, self.templates)
        return encode_path_items(path, self.path_dict), features

    def score(self, sentence: Sentence, tree: DepTree, predicate: int, candidate: int) -> Prediction:
        path, features = self.featurize(sentence, tree, predicate, candidate)
        return self.network.predict(path, features.indices)

    def metadata(self) -> dict:
        return {
            "task": self.task,
            "category": self.category,
            "templates": list(self.templates),
            "path_words": self.path_words,
            "binary_dict": self.binary_dict.to_dict(),
            "path_dict": self.path_dict.to_dict(),
            "labels": self.labels.to_dict(),
        }

    def save(self, path) -> None:
        with open(path, "wb") as f:
            save_network(f, self.network, self.metadata())

    @classmethod
    def load(cls, path) -> "SrlModel":
        with open(path, "rb") as f:
            network, meta = load_network(f)
        return cls(
            task=meta["task"],
            category=meta["category"],
            network=network,
            binary_dict=FeatureDict.from_dict(meta["binary_dict"]),
            path_dict=FeatureDict.from_dict(meta["path_dict"]),
            labels=FeatureDict.from_dict(meta["labels"]),
            templates=tuple(meta["templates"]),
            path_words=meta["path_words"],
        )


def select_models(models: Mapping[str, SrlModel], ppos: str) -> tuple[SrlModel, SrlModel]:
    """(identification model, classification model) routed by the predicate's PPOS"""
    category = predicate_category(ppos)
    return models[network_name(category, IDENTIFICATION)], models[network_name(category, CLASSIFICATION)]


@dataclass(frozen=True)
class LabeledArgument:
    token: int
    label: str
    id_score: float
    label_score: float
    embedding: np.ndarray | None = field(default=None, compare=False, repr=False)
    hidden: np.ndarray | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class LabeledStructure:
    predicate: int
    sense: str
    arguments: tuple[LabeledArgument, ...] = ()

    def roles(self) -> dict[int, str]:
        return {a.token: a.label for a in self.arguments}


@dataclass
class ArgumentScores:
    """Role distribution for one argument, best first, with the states it came from"""

    ranking: list[tuple[str, float]]
    embedding: np.ndarray
    hidden: np.ndarray

    @property
    def best(self) -> tuple[str, float]:
        return self.ranking[0]

    def probability(self, label: str) -> float:
        return dict(self.ranking)[label]


def score_candidates(sentence: Sentence, tree: DepTree, predicate: int, model: SrlModel) -> list[tuple[int, float]]:
    """P(ARG) for every token reachable from the predicate, in token order"""
    arg = model.labels.get(ARG)
    scored = []
    for token in sentence.tokens:
        try:
            prediction = model.score(sentence, tree, predicate, token.id)
        except NoPathError:
            continue
        scored.append((token.id, float(prediction.probabilities[arg])))
    return scored


def identify_arguments(
    sentence: Sentence, tree: DepTree, predicate: int, model: SrlModel, threshold: float = 0.5
) -> list[tuple[int, float]]:
    if model.task != IDENTIFICATION:
        raise ValueError(f"expected an identification model, got {model.task}")
    return [(token, p) for token, p in score_candidates(sentence, tree, predicate, model) if p >= threshold]


def classify_argument(sentence: Sentence, tree: DepTree, predicate: int, argument: int, model: SrlModel) -> ArgumentScores:
    if model.task != CLASSIFICATION:
        raise ValueError(f"expected a classification model, got {model.task}")
    prediction = model.score(sentence, tree, predicate, argument)
    order = sorted(range(len(model.labels)), key=lambda k: (-prediction.probabilities[k], k))
    ranking = [(model.labels.key(k), float(prediction.probabilities[k])) for k in order]
    return ArgumentScores(ranking, prediction.embedding, prediction.hidden)


def predicate_feature_keys(sentence: Sentence, tree: DepTree, token_id: int) -> list[str]:
    token = sentence.token(token_id)
    keys = [f"form={token.form}", f"lemma={token.plemma}", f"pos={token.ppos}", f"deprel={token.pdeprel}"]
    keys.extend(f"child.rel={tree.label(c)}" for c in tree.children[token_id])
    keys.extend(f"child.pos={sentence.token(c).ppos}" for c in tree.children[token_id])
    return keys


def _design_matrix(rows: Sequence[Sequence[int]], width: int) -> csr_matrix:
    indptr = np.cumsum([0] + [len(r) for r in rows])
    indices = np.fromiter((i for r in rows for i in r), dtype=np.int64, count=int(indptr[-1]))
    return csr_matrix((np.ones(len(indices)), indices, indptr), shape=(len(rows), width))


@dataclass
class PredicateClassifier:
    feature_dict: FeatureDict
    identifier: LogisticRegression | None
    constant_identification: bool = True
    sense_models: dict[str, LogisticRegression] = field(default_factory=dict)
    frequent_senses: dict[str, str] = field(default_factory=dict)

    def _row(self, sentence: Sentence, tree: DepTree, token_id: int) -> csr_matrix:
        keys = predicate_feature_keys(sentence, tree, token_id)
        indices = sorted({i for i in map(self.feature_dict.get, keys) if i is not None})
        return _design_matrix([indices], len(self.feature_dict))

    def is_predicate(self, sentence: Sentence, tree: DepTree, token_id: int) -> bool:
        if self.identifier is None:
            return self.constant_identification
        return bool(self.identifier.predict(self._row(sentence, tree, token_id))[0])

    def sense(self, sentence: Sentence, tree: DepTree, token_id: int) -> str:
        lemma = sentence.token(token_id).plemma
        model = self.sense_models.get(lemma)
        if model is not None:
            return str(model.predict(self._row(sentence, tree, token_id))[0])
        return self.frequent_senses.get(lemma, f"{lemma}.01")


def train_predicate_classifier(corpus: Sequence[Sentence], trees: Sequence[DepTree], seed: int = 1) -> PredicateClassifier:
    feature_dict = FeatureDict()
    id_rows, id_labels = [], []
    sense_rows, sense_labels = defaultdict(list), defaultdict(list)
    for sentence, tree in zip(corpus, trees):
        for token in sentence.tokens:
            if not (is_predicate_candidate(token.ppos) or token.fillpred):
                continue
            row = sorted({feature_dict.lookup(k) for k in predicate_feature_keys(sentence, tree, token.id)})
            if is_predicate_candidate(token.ppos):
                id_rows.append(row)
                id_labels.append(token.fillpred)
            if token.fillpred:
                sense_rows[token.plemma].append(row)
                sense_labels[token.plemma].append(token.pred)
    feature_dict.freeze()
    width = len(feature_dict)

    identifier, constant = None, bool(id_labels and id_labels[0])
    if len(set(id_labels)) > 1:
        identifier = LogisticRegression(max_iter=1000, random_state=seed)
        identifier.fit(_design_matrix(id_rows, width), np.array(id_labels, dtype=int))
    else:
        logger.warning("Predicate identification saw a single class; predicting %s for every candidate", constant)

    sense_models, frequent = {}, {}
    for lemma in sorted(sense_labels):
        counts = Counter(sense_labels[lemma])
        frequent[lemma] = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        if len(counts) >= 2:
            model = LogisticRegression(max_iter=1000, random_state=seed)
            model.fit(_design_matrix(sense_rows[lemma], width), np.array(sense_labels[lemma]))
            sense_models[lemma] = model
    logger.info(
        "Predicate classifier: %d identification examples, %d lemmas, %d with sense models",
        len(id_labels),
        len(frequent),
        len(sense_models),
    )
    return PredicateClassifier(feature_dict, identifier, constant, sense_models, frequent)


def identify_predicates(
    sentence: Sentence, tree: DepTree, classifier: PredicateClassifier, gold_predicates: bool = False
) -> list[int]:
    if gold_predicates:
        return list(sentence.predicate_ids)
    return [
        t.id
        for t in sentence.tokens
        if is_predicate_candidate(t.ppos) and classifier.is_predicate(sentence, tree, t.id)
    ]


def disambiguate_predicate(sentence: Sentence, tree: DepTree, token_id: int, classifier: PredicateClassifier) -> str:
    return classifier.sense(sentence, tree, token_id)

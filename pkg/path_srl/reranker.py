"""
Global reranking of n-best argument structures per predicate.

Candidates come from a beam over identification decisions (product of p or
1 - p per token) crossed with a beam over label assignments (product of
role probabilities). A logistic regression over the label-offset [e_n; h]
states of the arguments scores each structure globally; the final score is
the geometric mean of that probability and every argument's identification
and classification probability.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix, vstack
from sklearn.linear_model import LogisticRegression

from path_srl.errors import MissingCacheError
from path_srl.processing.conll_io import Sentence
from path_srl.processing.dep_graph import DepTree, build_tree
from path_srl.srl_models import (
    CLASSIFICATION,
    ArgumentScores,
    LabeledArgument,
    SrlModel,
    classify_argument,
    predicate_category,
    score_candidates,
    select_models,
)

logger = logging.getLogger(__name__)

DEFAULT_NBEST = 4
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class CandidateStructure:
    predicate: int
    category: str
    arguments: tuple[LabeledArgument, ...]
    local_score: float
    rank: int = 0
    global_score: float | None = field(default=None, compare=False)

    @property
    def key(self) -> tuple[tuple[int, str], ...]:
        return tuple((a.token, a.label) for a in self.arguments)


def _beam(choices: Sequence[Sequence[tuple[object, float]]], n: int) -> list[tuple[float, tuple]]:
    """
    Top-n products picking one option per position. Exact: every top-n full
    assignment extends a top-n prefix. Ties keep the earlier option first.
    """
    beam = [(1.0, ())]
    for options in choices:
        extended = [(score * p, chosen + (value,)) for score, chosen in beam for value, p in options]
        extended.sort(key=lambda item: -item[0])
        beam = extended[:n]
    return beam


def top_subsets(scored: Sequence[tuple[int, float]], n: int) -> list[tuple[float, tuple[int, ...]]]:
    """Top-n argument subsets with their product score, included tokens in order"""
    choices = [[(token, p), (None, 1.0 - p)] for token, p in scored]
    return [(score, tuple(t for t in chosen if t is not None)) for score, chosen in _beam(choices, n)]


def _structure(predicate, category, tokens, labels, id_scores, label_scores, subset_score, rank):
    arguments = []
    local = subset_score
    for token, label in zip(tokens, labels):
        p_label = label_scores[token].probability(label)
        local *= p_label
        arguments.append(
            LabeledArgument(
                token,
                label,
                id_scores[token],
                p_label,
                label_scores[token].embedding,
                label_scores[token].hidden,
            )
        )
    return CandidateStructure(predicate, category, tuple(arguments), local, rank)


def local_structure(
    sentence: Sentence,
    tree: DepTree,
    predicate: int,
    identifier: SrlModel,
    classifier: SrlModel,
    threshold: float = 0.5,
    scored: Sequence[tuple[int, float]] | None = None,
) -> CandidateStructure:
    """Independent argmax decisions: every token with P(ARG) >= threshold, best label each"""
    if scored is None:
        scored = score_candidates(sentence, tree, predicate, identifier)
    id_scores = dict(scored)
    chosen = tuple(token for token, p in scored if p >= threshold)
    subset_score = math.prod(p if p >= threshold else 1.0 - p for _, p in scored)
    label_scores = {t: classify_argument(sentence, tree, predicate, t, classifier) for t in chosen}
    labels = [label_scores[t].best[0] for t in chosen]
    category = predicate_category(sentence.token(predicate).ppos)
    return _structure(predicate, category, chosen, labels, id_scores, label_scores, subset_score, 0)


def nbest_structures(
    sentence: Sentence,
    tree: DepTree,
    predicate: int,
    identifier: SrlModel,
    classifier: SrlModel,
    n: int = DEFAULT_NBEST,
    threshold: float = 0.5,
) -> list[CandidateStructure]:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    scored = score_candidates(sentence, tree, predicate, identifier)
    local = local_structure(sentence, tree, predicate, identifier, classifier, threshold, scored)
    if n == 1:
        return [local]

    id_scores = dict(scored)
    category = local.category
    label_scores: dict[int, ArgumentScores] = {}
    candidates = []
    for subset_score, tokens in top_subsets(scored, n):
        for t in tokens:
            if t not in label_scores:
                label_scores[t] = classify_argument(sentence, tree, predicate, t, classifier)
        for _, labels in _beam([label_scores[t].ranking for t in tokens], n):
            candidates.append(
                _structure(predicate, category, tokens, labels, id_scores, label_scores, subset_score, len(candidates))
            )
    candidates.sort(key=lambda s: -s.local_score)
    structures = candidates[:n]
    if local.key not in {s.key for s in structures}:
        structures[-1] = local
    return [replace(s, rank=k) for k, s in enumerate(structures)]


def rerank_features(structure: CandidateStructure, labels: Sequence[str], block_width: int) -> csr_matrix:
    """
    One (|e| + |h|)-wide block per role label; each argument's [e_n; h]
    is added into the block of its label.
    """
    offsets = {label: k * block_width for k, label in enumerate(labels)}
    vector = np.zeros(len(labels) * block_width)
    for argument in structure.arguments:
        if argument.embedding is None or argument.hidden is None:
            raise MissingCacheError(f"argument {argument.token} of predicate {structure.predicate} has no cached states")
        state = np.concatenate([argument.embedding, argument.hidden])
        if len(state) != block_width:
            raise MissingCacheError(f"cached state width {len(state)} does not match block width {block_width}")
        start = offsets[argument.label]
        vector[start : start + block_width] += state
    return csr_matrix(vector)


def geometric_mean_score(p_global: float, arguments: Sequence[LabeledArgument]) -> float:
    factors = [p_global] + [p for a in arguments for p in (a.id_score, a.label_score)]
    if min(factors) <= 0.0:
        return 0.0
    return math.exp(sum(math.log(p) for p in factors) / len(factors))


@dataclass
class CategoryReranker:
    labels: tuple[str, ...]
    block_width: int
    model: LogisticRegression | None = None
    constant: float = 0.5

    def probability(self, structure: CandidateStructure) -> float:
        if self.model is None:
            return self.constant
        features = rerank_features(structure, self.labels, self.block_width)
        p = float(self.model.predict_proba(features)[0, 1])
        return min(max(p, PROBABILITY_FLOOR), 1.0 - PROBABILITY_FLOOR)


@dataclass
class RerankerModel:
    categories: dict[str, CategoryReranker]
    nbest: int = DEFAULT_NBEST

    def global_probability(self, structure: CandidateStructure) -> float:
        return self.categories[structure.category].probability(structure)


def rerank(structures: Sequence[CandidateStructure], model: RerankerModel | None) -> CandidateStructure:
    if not structures:
        raise ValueError("cannot rerank an empty list of structures")
    if len(structures) == 1:
        return structures[0]
    scored = []
    for structure in structures:
        p_global = model.global_probability(structure) if model is not None else 1.0
        scored.append(replace(structure, global_score=geometric_mean_score(p_global, structure.arguments)))
    return min(scored, key=lambda s: (-s.global_score, -s.local_score, s.rank))


def _labeled_f1(predicted: set, gold: set) -> float:
    correct = len(predicted & gold)
    if not correct:
        return 1.0 if not predicted and not gold else 0.0
    precision, recall = correct / len(predicted), correct / len(gold)
    return 2 * precision * recall / (precision + recall)


def fit_category_reranker(
    category: str,
    labels: Sequence[str],
    block_width: int,
    examples: Sequence[tuple[Sequence[CandidateStructure], set]],
    seed: int = 1,
) -> CategoryReranker:
    """
    `examples` holds one (n-best structures, gold (token, label) pairs) entry
    per predicate. The structure with the highest labeled F1 against gold is
    the positive example and every other one is negative.
    """
    labels = tuple(labels)
    rows, y = [], []
    for structures, gold in examples:
        quality = [_labeled_f1(set(s.key), gold) for s in structures]
        best = int(np.argmax(quality))
        for k, structure in enumerate(structures):
            rows.append(rerank_features(structure, labels, block_width))
            y.append(int(k == best))

    reranker = CategoryReranker(labels, block_width)
    if len(set(y)) > 1:
        reranker.model = LogisticRegression(max_iter=1000, random_state=seed)
        reranker.model.fit(vstack(rows).tocsr(), np.array(y))
    elif y:
        logger.warning("Reranker for %s predicates saw a single class; using a constant global score", category)
    logger.info("Reranker %s: %d structures, %d positive", category, len(y), sum(y))
    return reranker


def train_reranker(
    corpus: Sequence[Sentence],
    models: Mapping[str, SrlModel],
    n: int = DEFAULT_NBEST,
    seed: int = 1,
    threshold: float = 0.5,
) -> RerankerModel:
    examples: dict[str, list] = {}
    for sentence in corpus:
        tree = build_tree(sentence)
        for column, predicate in enumerate(sentence.predicate_ids):
            identifier, classifier = select_models(models, sentence.token(predicate).ppos)
            structures = nbest_structures(sentence, tree, predicate, identifier, classifier, n, threshold)
            gold = set(sentence.arguments_of(column))
            examples.setdefault(structures[0].category, []).append((structures, gold))

    categories = {}
    for name, model in sorted(models.items()):
        if model.task != CLASSIFICATION:
            continue
        block_width = model.network.lstm_spec.embed_dim + model.network.head.spec.hidden_dim
        categories[model.category] = fit_category_reranker(
            model.category, model.labels.keys, block_width, examples.get(model.category, []), seed
        )
    return RerankerModel(categories, n)

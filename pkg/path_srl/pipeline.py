"""
Trained system bundle and the end-to-end labeling pipeline

    predicate identification -> disambiguation -> argument identification
    -> argument classification -> (optional) reranking

Bundle directory layout:
    manifest.json                 format version, networks, dictionary sizes, config
    <network>.pathsrl             one PATHSRL file per argument network
    predicates.pkl                pickled PredicateClassifier
    reranker.pkl                  pickled RerankerModel (absent when disabled)
    training.log                  key=value training records
"""

import json
import logging
import pickle
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import path_srl
from path_srl.config import NETWORKS
from path_srl.errors import BundleError
from path_srl.processing.conll_io import Sentence
from path_srl.processing.dep_graph import DepTree, build_tree
from path_srl.reranker import RerankerModel, local_structure, nbest_structures, rerank
from path_srl.srl_models import (
    IDENTIFICATION,
    LabeledStructure,
    PredicateClassifier,
    SrlModel,
    disambiguate_predicate,
    identify_arguments,
    identify_predicates,
    select_models,
)

logger = logging.getLogger(__name__)

BUNDLE_FORMAT = 1
MANIFEST = "manifest.json"
PREDICATES_FILE = "predicates.pkl"
RERANKER_FILE = "reranker.pkl"
TRAINING_LOG = "training.log"


@dataclass
class SrlBundle:
    models: dict[str, SrlModel]
    predicates: PredicateClassifier
    reranker: RerankerModel | None = None
    config: dict | None = None

    def manifest(self) -> dict:
        return {
            "format": BUNDLE_FORMAT,
            "version": path_srl.__version__,
            "networks": {
                name: {
                    "file": f"{name}.pathsrl",
                    "task": model.task,
                    "category": model.category,
                    "path_vocabulary": len(model.path_dict),
                    "binary_features": len(model.binary_dict),
                    "labels": model.labels.keys,
                    "embed_dim": model.network.lstm_spec.embed_dim,
                    "hidden_dim": model.network.head.spec.hidden_dim,
                    "disable_path_embeddings": model.network.disable_path_embeddings,
                    "disable_binary_features": model.network.disable_binary_features,
                }
                for name, model in sorted(self.models.items())
            },
            "predicates": PREDICATES_FILE,
            "reranker": RERANKER_FILE if self.reranker is not None else None,
            "config": self.config or {},
        }


def save_bundle(bundle: SrlBundle, directory, training_log: Sequence[str] = ()) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = bundle.manifest()
    for name, model in bundle.models.items():
        model.save(directory / manifest["networks"][name]["file"])
    with open(directory / PREDICATES_FILE, "wb") as f:
        pickle.dump(bundle.predicates, f, protocol=4)
    if bundle.reranker is not None:
        with open(directory / RERANKER_FILE, "wb") as f:
            pickle.dump(bundle.reranker, f, protocol=4)
    if training_log:
        (directory / TRAINING_LOG).write_text("".join(f"{line}\n" for line in training_log), encoding="utf-8")
    with open(directory / MANIFEST, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    logger.info("Bundle written to %s", directory)
    return directory


def load_bundle(directory) -> SrlBundle:
    directory = Path(directory)
    try:
        with open(directory / MANIFEST, encoding="utf-8") as f:
            manifest = json.load(f)
    except FileNotFoundError:
        raise BundleError(f"{directory} is not a bundle: {MANIFEST} missing") from None
    if manifest.get("format") != BUNDLE_FORMAT:
        raise BundleError(f"bundle format {manifest.get('format')} is not supported (expected {BUNDLE_FORMAT})")
    missing = set(NETWORKS) - set(manifest["networks"])
    if missing:
        raise BundleError(f"bundle lacks networks {sorted(missing)}")

    models = {name: SrlModel.load(directory / entry["file"]) for name, entry in manifest["networks"].items()}
    with open(directory / manifest["predicates"], "rb") as f:
        predicates = pickle.load(f)
    reranker = None
    if manifest.get("reranker"):
        with open(directory / manifest["reranker"], "rb") as f:
            reranker = pickle.load(f)
    return SrlBundle(models, predicates, reranker, manifest.get("config"))


@dataclass(frozen=True)
class LabelingOptions:
    gold_predicates: bool = True
    threshold: float = 0.5
    nbest: int = 4


def label_predicate(
    sentence: Sentence,
    tree: DepTree,
    predicate: int,
    bundle: SrlBundle,
    reranker: RerankerModel | None,
    options: LabelingOptions,
) -> LabeledStructure:
    sense = disambiguate_predicate(sentence, tree, predicate, bundle.predicates)
    identifier, classifier = select_models(bundle.models, sentence.token(predicate).ppos)
    if reranker is None:
        structure = local_structure(sentence, tree, predicate, identifier, classifier, options.threshold)
    else:
        structures = nbest_structures(sentence, tree, predicate, identifier, classifier, options.nbest, options.threshold)
        structure = rerank(structures, reranker)
    return LabeledStructure(predicate, sense, structure.arguments)


def label_structures(
    sentence: Sentence, bundle: SrlBundle, reranker: RerankerModel | None, options: LabelingOptions
) -> list[LabeledStructure]:
    tree = build_tree(sentence)
    predicates = identify_predicates(sentence, tree, bundle.predicates, options.gold_predicates)
    return [label_predicate(sentence, tree, p, bundle, reranker, options) for p in predicates]


def label_sentence(
    sentence: Sentence,
    bundle: SrlBundle,
    reranker: RerankerModel | None = None,
    options: LabelingOptions = LabelingOptions(),
) -> Sentence:
    structures = label_structures(sentence, bundle, reranker, options)
    return sentence.with_annotation([(s.predicate, s.sense, s.roles()) for s in structures])


def _label_chunk(args) -> list[Sentence]:
    sentences, bundle, reranker, options = args
    return [label_sentence(s, bundle, reranker, options) for s in sentences]


def label_corpus(
    corpus: Sequence[Sentence],
    bundle: SrlBundle,
    reranker: RerankerModel | None = None,
    options: LabelingOptions = LabelingOptions(),
    jobs: int = 1,
) -> list[Sentence]:
    """Labels every sentence; with jobs > 1 chunks run in worker processes and merge in input order"""
    if jobs <= 1 or len(corpus) < 2:
        return [label_sentence(s, bundle, reranker, options) for s in corpus]
    size = -(-len(corpus) // jobs)
    chunks = [(corpus[k : k + size], bundle, reranker, options) for k in range(0, len(corpus), size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return [sentence for chunk in pool.map(_label_chunk, chunks) for sentence in chunk]


@dataclass(frozen=True)
class EmbeddingRow:
    sentence: int
    predicate: int
    argument: int
    label: str
    values: tuple[float, ...]

    def format(self) -> str:
        fields = [str(self.sentence), str(self.predicate), str(self.argument), self.label or "_"]
        return "\t".join(fields + [repr(v) for v in self.values])


def embedding_rows(
    corpus: Sequence[Sentence], bundle: SrlBundle, options: LabelingOptions = LabelingOptions()
) -> Iterator[EmbeddingRow]:
    """
    Classification-network path embeddings of every identified argument,
    ordered by sentence, predicate and argument.
    """
    for k, sentence in enumerate(corpus, start=1):
        tree = build_tree(sentence)
        gold_columns = {p: column for column, p in enumerate(sentence.predicate_ids)}
        for predicate in identify_predicates(sentence, tree, bundle.predicates, options.gold_predicates):
            identifier, classifier = select_models(bundle.models, sentence.token(predicate).ppos)
            if identifier.task != IDENTIFICATION:
                raise BundleError(f"network routed for identification has task {identifier.task}")
            for argument, _ in identify_arguments(sentence, tree, predicate, identifier, options.threshold):
                prediction = classifier.score(sentence, tree, predicate, argument)
                column = gold_columns.get(predicate)
                label = sentence.token(argument).apreds[column] if column is not None else ""
                yield EmbeddingRow(k, predicate, argument, label, tuple(float(v) for v in prediction.embedding))

"""
Training of a complete system bundle

1. collect identification/classification instances per predicate category
2. build path and binary dictionaries, train the four path networks
3. train the predicate classifiers and the reranker
4. label the development corpus end to end and log its F1
"""

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from path_srl.config import CATEGORIES, NETWORKS, NetworkConfig, RunConfig
from path_srl.errors import NoPathError, TrainingDataError
from path_srl.evaluation import score
from path_srl.pipeline import LabelingOptions, SrlBundle, label_corpus
from path_srl.processing.conll_io import Sentence
from path_srl.processing.dep_graph import PathSequence, build_tree, extract_path_sequence
from path_srl.processing.features import (
    FeatureDict,
    build_path_dict,
    encode_path_items,
    feature_keys,
)
from path_srl.reranker import train_reranker
from path_srl.srl_models import (
    ARG,
    CLASSIFICATION,
    IDENTIFICATION,
    IDENTIFICATION_LABELS,
    NONE,
    SrlModel,
    predicate_category,
    train_predicate_classifier,
)
from path_srl.training.neural_core import Example, PathNetwork, train_network

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Instance:
    """One (predicate, candidate) pair before it is mapped onto dictionaries"""

    path: PathSequence
    keys: tuple[str, ...]
    label: str


@dataclass
class NetworkData:
    name: str
    task: str
    category: str
    train: list[Instance] = field(default_factory=list)
    dev: list[Instance] = field(default_factory=list)


def _split_name(name: str) -> tuple[str, str]:
    category, task = name.split("-", 1)
    return category, task


def collect_instances(corpus: Sequence[Sentence], config: RunConfig) -> dict[str, list[Instance]]:
    """
    Instances of every gold predicate, keyed by network name. Every reachable
    token is an identification candidate (the predicate included); annotated
    arguments are classification instances.
    """
    instances: dict[str, list[Instance]] = defaultdict(list)
    templates, path_words = config.features.templates, config.features.path_words
    for sentence in corpus:
        tree = build_tree(sentence)
        for column, predicate in enumerate(sentence.predicate_ids):
            category = predicate_category(sentence.token(predicate).ppos)
            for token in sentence.tokens:
                try:
                    path = extract_path_sequence(tree, sentence, predicate, token.id, path_words)
                except NoPathError:
                    continue
                keys = tuple(feature_keys(sentence, tree, predicate, token.id, templates))
                role = token.apreds[column]
                instances[f"{category}-{IDENTIFICATION}"].append(Instance(path, keys, ARG if role else NONE))
                if role:
                    instances[f"{category}-{CLASSIFICATION}"].append(Instance(path, keys, role))
    return instances


def network_data(train: Sequence[Sentence], dev: Sequence[Sentence], config: RunConfig) -> dict[str, NetworkData]:
    """Per-network training sets; a category without instances uses the pooled instances of both"""
    train_instances = collect_instances(train, config)
    dev_instances = collect_instances(dev, config)
    data = {}
    for name in NETWORKS:
        category, task = _split_name(name)
        names = [name]
        if not train_instances.get(name):
            names = [f"{c}-{task}" for c in CATEGORIES]
            logger.warning("No %s instances for %s predicates; using the pooled data of both categories", task, category)
        data[name] = NetworkData(
            name,
            task,
            category,
            [i for n in names for i in train_instances.get(n, [])],
            [i for n in names for i in dev_instances.get(n, [])],
        )
        if not data[name].train:
            raise TrainingDataError(f"no training instances for {name}")
    return data


def _encode(instances: Sequence[Instance], binary_dict: FeatureDict, path_dict: FeatureDict, labels: FeatureDict) -> list[Example]:
    examples = []
    for instance in instances:
        label = labels.get(instance.label)
        if label is None:
            continue
        features = sorted({i for i in map(binary_dict.lookup, instance.keys) if i is not None})
        examples.append(Example(tuple(encode_path_items(instance.path, path_dict)), tuple(features), label))
    return examples


def network_f1(network: PathNetwork, examples: Sequence[Example], positive: int | None = None) -> float:
    """
    F1 of the `positive` class in percent; without a positive class every
    example is scored, which makes it accuracy.
    """
    if not examples:
        return 0.0
    predicted = np.array([int(np.argmax(network.predict(e.path, e.features).probabilities)) for e in examples])
    gold = np.array([e.gold for e in examples])
    if positive is None:
        return 100.0 * float(np.mean(predicted == gold))
    correct = int(np.sum((predicted == positive) & (gold == positive)))
    n_predicted, n_gold = int(np.sum(predicted == positive)), int(np.sum(gold == positive))
    if not correct:
        return 0.0
    p, r = correct / n_predicted, correct / n_gold
    return 100.0 * 2 * p * r / (p + r)


def build_model(data: NetworkData, network_config: NetworkConfig, config: RunConfig, seed: int) -> tuple[SrlModel, list[Example], list[Example]]:
    """Fresh model with dictionaries fitted on the training instances, plus encoded train/dev examples"""
    if data.task == IDENTIFICATION:
        labels = FeatureDict(IDENTIFICATION_LABELS).freeze()
    else:
        labels = FeatureDict(sorted({i.label for i in data.train})).freeze()
        if len(labels) < 2:
            raise TrainingDataError(f"{data.name} needs at least two role labels, saw {labels.keys}")

    path_dict = build_path_dict((i.path for i in data.train), config.features.min_word_count)
    binary_dict = FeatureDict()
    train_examples = _encode(data.train, binary_dict, path_dict, labels)
    binary_dict.freeze()
    dev_examples = _encode(data.dev, binary_dict, path_dict, labels)

    train_config = network_config.train_config(seed, config.ablation)
    network = PathNetwork.init(
        network_config.lstm_spec(len(path_dict)),
        max(len(binary_dict), 1),
        network_config.hidden_dim,
        len(labels),
        np.random.default_rng(seed),
        train_config.disable_path_embeddings,
        train_config.disable_binary_features,
    )
    model = SrlModel(
        data.task,
        data.category,
        network,
        binary_dict,
        path_dict,
        labels,
        config.features.templates,
        config.features.path_words,
    )
    return model, train_examples, dev_examples


def train_one_network(data: NetworkData, config: RunConfig) -> tuple[SrlModel, list[str]]:
    """Trains one of the four networks; returns the model and its training-log records"""
    network_config = config.networks[data.name]
    seed = config.network_seed(data.name)
    model, train_examples, dev_examples = build_model(data, network_config, config, seed)
    positive = model.labels.get(ARG) if data.task == IDENTIFICATION else None
    records = [
        f"event=network network={data.name} train={len(train_examples)} dev={len(dev_examples)} "
        f"path_vocabulary={len(model.path_dict)} binary_features={len(model.binary_dict)} labels={len(model.labels)}"
    ]

    def on_epoch(epoch, loss, dev_f1):
        record = f"event=epoch network={data.name} epoch={epoch} loss={loss:.6f}"
        if dev_f1 is not None:
            record += f" dev_f1={dev_f1:.2f}"
        records.append(record)
        logger.info("%s epoch %d: loss %.6f dev F1 %s", data.name, epoch, loss, "-" if dev_f1 is None else f"{dev_f1:.2f}")

    model.network = train_network(
        model.network,
        train_examples,
        network_config.train_config(seed, config.ablation),
        dev_examples,
        lambda network, examples: network_f1(network, examples, positive),
        on_epoch,
    )
    return model, records


def _train_one(args) -> tuple[SrlModel, list[str]]:
    return train_one_network(*args)


def train_networks(data: dict[str, NetworkData], config: RunConfig) -> tuple[dict[str, SrlModel], list[str]]:
    jobs = [(data[name], config) for name in NETWORKS]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=min(config.jobs, len(jobs))) as pool:
            results = list(pool.map(_train_one, jobs))
    else:
        results = [_train_one(job) for job in jobs]
    models, records = {}, []
    for name, (model, network_records) in zip(NETWORKS, results):
        models[name] = model
        records.extend(network_records)
    return models, records


@dataclass
class TrainingRun:
    bundle: SrlBundle
    records: list[str]
    dev_f1: float | None = None


def labeling_options(config: RunConfig) -> LabelingOptions:
    return LabelingOptions(config.labeling.gold_predicates, config.labeling.threshold, config.reranker.nbest)


def train_bundle(train: Sequence[Sentence], dev: Sequence[Sentence], config: RunConfig) -> TrainingRun:
    if not train:
        raise TrainingDataError("training corpus is empty")
    logger.info("Training on %d sentences, %d development sentences", len(train), len(dev))
    data = network_data(train, dev, config)
    models, records = train_networks(data, config)

    predicates = train_predicate_classifier(train, [build_tree(s) for s in train], config.seed)
    reranker = None
    if config.reranker.enabled:
        reranker = train_reranker(train, models, config.reranker.nbest, config.seed, config.labeling.threshold)
        records.append(f"event=reranker nbest={config.reranker.nbest} categories={','.join(sorted(reranker.categories))}")

    bundle = SrlBundle(models, predicates, reranker, config.to_dict())
    run = TrainingRun(bundle, records)
    if dev:
        labeled = label_corpus(dev, bundle, reranker, labeling_options(config), config.jobs)
        run.dev_f1 = score(dev, labeled).f1
        records.append(f"event=pipeline dev_f1={run.dev_f1:.2f}")
        logger.info("Development F1 %.2f", run.dev_f1)
    return run

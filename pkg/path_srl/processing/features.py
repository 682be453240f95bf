"""
Sparse binary indicator features and the string <-> index dictionaries
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from path_srl.errors import NoPathError
from path_srl.processing.conll_io import Sentence
from path_srl.processing.dep_graph import DepTree, ItemKind, PathSequence, tree_path

logger = logging.getLogger(__name__)

UNK_WORD = "<unk-word>"
UNK_REL = "<unk-rel>"
UNK_POS = "<unk-pos>"
PATH_RESERVED = (UNK_WORD, UNK_REL, UNK_POS)
UNK_BY_KIND = {ItemKind.WORD: UNK_WORD, ItemKind.REL: UNK_REL, ItemKind.POS: UNK_POS}

MIN_WORD_COUNT = 2
NO_PATH = "NONE"


class FeatureDict:
    """
    Dense string <-> index map. An unfrozen dict grows on lookup; a frozen one
    answers unseen keys with its `unknown` entry, or None when it has none.
    """

    def __init__(self, keys: Iterable[str] = (), frozen: bool = False, unknown: str | None = None):
        self._keys: list[str] = []
        self._index: dict[str, int] = {}
        self.unknown = unknown
        self.frozen = False
        for key in keys:
            self.add(key)
        if unknown is not None:
            self.add(unknown)
        self.frozen = frozen

    def __len__(self):
        return len(self._keys)

    def __contains__(self, key):
        return key in self._index

    def __eq__(self, other):
        return (
            isinstance(other, FeatureDict)
            and self._keys == other._keys
            and self.frozen == other.frozen
            and self.unknown == other.unknown
        )

    @property
    def keys(self) -> list[str]:
        return list(self._keys)

    def add(self, key: str) -> int:
        if key in self._index:
            return self._index[key]
        if self.frozen:
            raise KeyError(f"cannot add {key!r} to a frozen dictionary")
        self._index[key] = len(self._keys)
        self._keys.append(key)
        return self._index[key]

    def get(self, key: str) -> int | None:
        return self._index.get(key)

    def lookup(self, key: str) -> int | None:
        if key in self._index:
            return self._index[key]
        if not self.frozen:
            return self.add(key)
        return self._index[self.unknown] if self.unknown is not None else None

    def key(self, index: int) -> str:
        return self._keys[index]

    def freeze(self) -> "FeatureDict":
        self.frozen = True
        return self

    def to_dict(self) -> dict:
        return {"keys": list(self._keys), "frozen": self.frozen, "unknown": self.unknown}

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureDict":
        return cls(data["keys"], frozen=data["frozen"], unknown=data.get("unknown"))


@dataclass(frozen=True)
class BinaryFeatureSet:
    indices: tuple[int, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("binary feature indices must be strictly increasing")

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    @classmethod
    def of(cls, indices: Iterable[int]) -> "BinaryFeatureSet":
        return cls(tuple(sorted(set(indices))))


@dataclass(frozen=True)
class FeatureContext:
    sentence: Sentence
    tree: DepTree
    predicate: int
    candidate: int

    def form(self, token_id):
        return self.sentence.token(token_id).form

    def pos(self, token_id):
        return self.sentence.token(token_id).ppos


def _path(ctx: FeatureContext):
    try:
        yield tree_path(ctx.tree, ctx.predicate, ctx.candidate).relations
    except NoPathError:
        yield NO_PATH


def _relative_position(ctx: FeatureContext):
    if ctx.candidate < ctx.predicate:
        yield "left"
    elif ctx.candidate == ctx.predicate:
        yield "self"
    else:
        yield "right"


def _between(ctx: FeatureContext):
    low, high = sorted((ctx.predicate, ctx.candidate))
    yield "+".join(ctx.pos(k) for k in range(low + 1, high))


def _neighbours(role: str, relation: str, attribute: str) -> Callable[[FeatureContext], Iterable[str]]:
    def template(ctx: FeatureContext):
        token_id = ctx.predicate if role == "pred" else ctx.candidate
        if relation == "child":
            neighbours = ctx.tree.children[token_id]
        else:
            neighbours = ctx.tree.siblings(token_id)
        for n in neighbours:
            yield ctx.form(n) if attribute == "form" else ctx.pos(n)

    return template


TEMPLATES: dict[str, Callable[[FeatureContext], Iterable[str]]] = {
    "pred.form": lambda ctx: [ctx.form(ctx.predicate)],
    "pred.pos": lambda ctx: [ctx.pos(ctx.predicate)],
    "pred.deprel": lambda ctx: [ctx.tree.label(ctx.predicate)],
    "cand.form": lambda ctx: [ctx.form(ctx.candidate)],
    "cand.pos": lambda ctx: [ctx.pos(ctx.candidate)],
    "cand.deprel": lambda ctx: [ctx.tree.label(ctx.candidate)],
    "path": _path,
    **{
        f"{role}.{relation}.{attribute}": _neighbours(role, relation, attribute)
        for role in ("pred", "cand")
        for relation in ("child", "sib")
        for attribute in ("form", "pos")
    },
    "relpos": _relative_position,
    "between.pos": _between,
}

DEFAULT_TEMPLATES = tuple(TEMPLATES)


def feature_keys(
    sentence: Sentence, tree: DepTree, predicate: int, candidate: int, templates: Sequence[str] = DEFAULT_TEMPLATES
) -> list[str]:
    ctx = FeatureContext(sentence, tree, predicate, candidate)
    keys = []
    for name in templates:
        keys.extend(f"{name}={value}" for value in TEMPLATES[name](ctx))
    return keys


def extract_binary_features(
    sentence: Sentence,
    tree: DepTree,
    predicate: int,
    candidate: int,
    feature_dict: FeatureDict,
    templates: Sequence[str] = DEFAULT_TEMPLATES,
) -> BinaryFeatureSet:
    indices = (feature_dict.lookup(k) for k in feature_keys(sentence, tree, predicate, candidate, templates))
    return BinaryFeatureSet.of(i for i in indices if i is not None)


def validate_templates(templates: Iterable[str]) -> tuple[str, ...]:
    templates = tuple(templates)
    unknown = [t for t in templates if t not in TEMPLATES]
    if unknown:
        raise ValueError(f"unknown feature templates: {unknown}")
    return templates


def build_path_dict(paths: Iterable[PathSequence], min_word_count: int = MIN_WORD_COUNT) -> FeatureDict:
    """Frozen path-item vocabulary; words seen fewer than `min_word_count` times stay UNK"""
    words = Counter()
    others = Counter()
    for path in paths:
        for item in path.items:
            (words if item.kind is ItemKind.WORD else others)[item.key] += 1
    vocabulary = FeatureDict(PATH_RESERVED)
    for key in sorted(others):
        vocabulary.add(key)
    for key in sorted(k for k, count in words.items() if count >= min_word_count):
        vocabulary.add(key)
    logger.debug(
        "Path vocabulary: %d entries, %d of %d words kept", len(vocabulary), len(vocabulary) - len(PATH_RESERVED) - len(others), len(words)
    )
    return vocabulary.freeze()


def encode_path_items(path: PathSequence, path_dict: FeatureDict) -> list[int]:
    indices = []
    for item in path.items:
        index = path_dict.get(item.key)
        if index is None:
            index = path_dict.add(item.key) if not path_dict.frozen else path_dict.get(UNK_BY_KIND[item.kind])
        indices.append(index)
    return indices

"""
Predicted dependency tree navigation and lexicalized path extraction.
"""

from dataclasses import dataclass
from enum import Enum

from path_srl.errors import NoPathError
from path_srl.processing.conll_io import Sentence

ROOT = 0
WORD_SOURCES = ("plemma", "form")


class Direction(str, Enum):
    UP = "↑"
    DOWN = "↓"


class ItemKind(str, Enum):
    POS = "pos"
    WORD = "word"
    REL = "rel"


@dataclass(frozen=True)
class Edge:
    label: str
    direction: Direction

    def __str__(self):
        return f"{self.label}{self.direction.value}"


@dataclass(frozen=True)
class PathItem:
    kind: ItemKind
    value: str
    direction: Direction | None = None

    def __post_init__(self):
        if (self.direction is not None) != (self.kind is ItemKind.REL):
            raise ValueError("direction is required for relation items and only for them")

    @property
    def key(self) -> str:
        """Vocabulary key; relation direction is part of the key"""
        if self.kind is ItemKind.REL:
            return f"rel={self.value}{self.direction.value}"
        return f"{self.kind.value}={self.value}"


@dataclass(frozen=True)
class PathSequence:
    items: tuple[PathItem, ...]
    node_count: int

    def __len__(self):
        return len(self.items)

    @property
    def relations(self) -> str:
        """Unlexicalized path string, e.g. NMOD↑OBJ↑SBJ↓"""
        return "".join(f"{i.value}{i.direction.value}" for i in self.items if i.kind is ItemKind.REL)


@dataclass(frozen=True)
class TreePath:
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]

    def __iter__(self):
        """(node id, edge leaving that node) pairs; the last node has no edge"""
        return iter(zip(self.nodes, self.edges + (None,)))

    @property
    def relations(self) -> str:
        return "".join(str(e) for e in self.edges)


class DepTree:
    def __init__(self, heads: list[int], labels: list[str]):
        # index 0 is the artificial root
        self.heads = [ROOT] + list(heads)
        self.labels = [""] + list(labels)
        self.children: list[list[int]] = [[] for _ in self.heads]
        for token_id, head in enumerate(heads, start=1):
            self.children[head].append(token_id)

    def __len__(self):
        return len(self.heads) - 1

    def parent(self, token_id: int) -> int:
        return self.heads[token_id]

    def label(self, token_id: int) -> str:
        return self.labels[token_id]

    def siblings(self, token_id: int) -> list[int]:
        return [c for c in self.children[self.parent(token_id)] if c != token_id]

    def ancestors(self, token_id: int) -> list[int]:
        """token_id followed by its heads up to (not including) the artificial root"""
        chain = [token_id]
        while self.parent(chain[-1]) != ROOT:
            chain.append(self.parent(chain[-1]))
        return chain


def build_tree(sentence: Sentence) -> DepTree:
    return DepTree([t.phead for t in sentence.tokens], [t.pdeprel for t in sentence.tokens])


def tree_path(tree: DepTree, source: int, target: int) -> TreePath:
    up_chain = tree.ancestors(source)
    down_chain = tree.ancestors(target)
    depth = {node: i for i, node in enumerate(down_chain)}
    for i, node in enumerate(up_chain):
        if node in depth:
            lca_up, lca_down = i, depth[node]
            break
    else:
        raise NoPathError(source, target)

    up = up_chain[: lca_up + 1]
    down = list(reversed(down_chain[:lca_down]))
    edges = [Edge(tree.label(n), Direction.UP) for n in up[:-1]]
    edges += [Edge(tree.label(n), Direction.DOWN) for n in down]
    return TreePath(tuple(up + down), tuple(edges))


def extract_path_sequence(
    tree: DepTree, sentence: Sentence, predicate: int, argument: int, word_source: str = "plemma"
) -> PathSequence:
    """
    Predicate-first item sequence along the tree path to the argument head.

    Every node contributes its PPOS tag then its word (PLEMMA by default,
    `word_source="form"` for the surface form); consecutive nodes are joined
    by one direction-tagged relation item.
    """
    if word_source not in WORD_SOURCES:
        raise ValueError(f"word_source must be one of {WORD_SOURCES}, got {word_source!r}")
    path = tree_path(tree, predicate, argument)
    items = []
    for node, edge in path:
        token = sentence.token(node)
        items.append(PathItem(ItemKind.POS, token.ppos))
        items.append(PathItem(ItemKind.WORD, getattr(token, word_source)))
        if edge is not None:
            items.append(PathItem(ItemKind.REL, edge.label, edge.direction))
    return PathSequence(tuple(items), len(path.nodes))

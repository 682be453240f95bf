from collections import deque

import numpy as np
import pytest

from path_srl.errors import NoPathError
from path_srl.processing.dep_graph import (
    ROOT,
    DepTree,
    Direction,
    Edge,
    ItemKind,
    PathItem,
    extract_path_sequence,
    tree_path,
)


def render(path):
    return [f"{i.value}{i.direction.value}" if i.kind is ItemKind.REL else i.value for i in path.items]


def test_trouble_path_with_surface_forms(trouble, trouble_tree):
    path = extract_path_sequence(trouble_tree, trouble, 4, 1, word_source="form")
    assert render(path) == ["V", "raising", "NMOD↑", "N", "trouble", "OBJ↑", "V", "had", "SBJ↓", "N", "He"]
    assert path.node_count == 4
    assert path.relations == "NMOD↑OBJ↑SBJ↓"


def test_trouble_path_with_lemmas(trouble, trouble_tree):
    path = extract_path_sequence(trouble_tree, trouble, 4, 1)
    assert render(path) == ["V", "raise", "NMOD↑", "N", "trouble", "OBJ↑", "V", "have", "SBJ↓", "N", "he"]


def test_trouble_direct_object(trouble, trouble_tree):
    path = extract_path_sequence(trouble_tree, trouble, 4, 5)
    assert render(path) == ["V", "raise", "OBJ↓", "N", "fund"]


def test_self_path_is_a_single_node(trouble, trouble_tree):
    path = extract_path_sequence(trouble_tree, trouble, 4, 4)
    assert render(path) == ["V", "raise"]
    assert path.relations == ""


def test_unknown_word_source_is_rejected(trouble, trouble_tree):
    with pytest.raises(ValueError):
        extract_path_sequence(trouble_tree, trouble, 4, 1, word_source="lemma")


def test_tree_navigation(trouble_tree):
    assert len(trouble_tree) == 5
    assert trouble_tree.children[ROOT] == [2]
    assert trouble_tree.parent(4) == 3
    assert trouble_tree.label(1) == "SBJ"
    assert trouble_tree.children[2] == [1, 3]
    assert trouble_tree.siblings(1) == [3]
    assert trouble_tree.ancestors(5) == [5, 4, 3, 2]


def test_path_items_validate_direction():
    with pytest.raises(ValueError):
        PathItem(ItemKind.REL, "SBJ")
    with pytest.raises(ValueError):
        PathItem(ItemKind.POS, "N", Direction.UP)
    assert PathItem(ItemKind.REL, "SBJ", Direction.DOWN).key == "rel=SBJ↓"
    assert PathItem(ItemKind.WORD, "he").key == "word=he"


def test_disconnected_tokens_have_no_path():
    # two roots: 1 <- 2 and 3
    tree = DepTree([0, 1, 0], ["ROOT", "NMOD", "ROOT"])
    with pytest.raises(NoPathError):
        tree_path(tree, 2, 3)
    assert tree_path(tree, 2, 1).relations == "NMOD↑"


def random_forest(rng, size):
    """Heads pointing only to earlier nodes of a random order, so the graph is acyclic"""
    order = rng.permutation(size) + 1
    heads = [0] * size
    for k, node in enumerate(order):
        if k == 0 or rng.random() < 0.05:
            heads[node - 1] = 0
        else:
            heads[node - 1] = int(order[rng.integers(k)])
    labels = [f"L{rng.integers(4)}" for _ in range(size)]
    return heads, labels


def bfs_path(heads, labels, source, target):
    """Independent oracle: breadth-first search over the undirected tree without the root"""
    neighbours = {n: [] for n in range(1, len(heads) + 1)}
    for child, head in enumerate(heads, start=1):
        if head:
            neighbours[child].append((head, Edge(labels[child - 1], Direction.UP)))
            neighbours[head].append((child, Edge(labels[child - 1], Direction.DOWN)))
    previous = {source: None}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for nxt, edge in neighbours[node]:
            if nxt not in previous:
                previous[nxt] = (node, edge)
                queue.append(nxt)
    if target not in previous:
        return None
    nodes, edges = [target], []
    while previous[nodes[-1]] is not None:
        node, edge = previous[nodes[-1]]
        nodes.append(node)
        edges.append(edge)
    return tuple(reversed(nodes)), tuple(reversed(edges))


def test_tree_path_matches_brute_force_on_random_trees():
    rng = np.random.default_rng(2015)
    mismatches = 0
    for _ in range(1000):
        size = int(rng.integers(1, 31))
        heads, labels = random_forest(rng, size)
        tree = DepTree(heads, labels)
        source, target = (int(x) for x in rng.integers(1, size + 1, size=2))
        expected = bfs_path(heads, labels, source, target)
        if expected is None:
            with pytest.raises(NoPathError):
                tree_path(tree, source, target)
            continue
        path = tree_path(tree, source, target)
        if (path.nodes, path.edges) != expected:
            mismatches += 1
    assert mismatches == 0

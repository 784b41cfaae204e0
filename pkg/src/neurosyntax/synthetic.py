"""Random lexicons, trees and derivations for tests, demos and sweeps."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .lexicon import Lexicon
from .syntax import (DEFAULT_PRECEDENCE, Derivation, Leaf, LexicalItem, Node, SyntacticObject,
                     Workspace, derive, label_tree, merge)

__all__ = ["random_lexicon", "random_tree", "random_derivation", "demo_lexicon"]


def random_lexicon(rng: np.random.Generator, n_items: int = 48, n_dim: int = 6,
                   categories: Sequence[str] = DEFAULT_PRECEDENCE) -> Lexicon:
    items = []
    for k in range(n_items):
        cat = categories[k % len(categories)]
        items.append(LexicalItem(f"w{k:03d}", cat, tuple(rng.standard_normal(n_dim)),
                                 float(rng.uniform(0.05, 1.0))))
    return Lexicon.from_items(items, n_dim)


def random_tree(rng: np.random.Generator, lex: Lexicon, max_depth: int,
                leaf_prob: float = 0.3, precedence: Sequence[str] = DEFAULT_PRECEDENCE
                ) -> SyntacticObject:
    """Labeled tree of depth <= ``max_depth`` over distinct lexicon items.

    The root is always a node when ``max_depth > 0``.
    """
    pool = list(lex.items.values())
    order = rng.permutation(len(pool))
    used = iter(order)

    def grow(budget: int, root: bool) -> SyntacticObject:
        if budget == 0 or (not root and rng.random() < leaf_prob):
            return Leaf(pool[next(used)])
        return Node.of(grow(budget - 1, False), grow(budget - 1, False))

    if 2 ** max_depth > len(pool):
        raise ValueError(f"lexicon of {len(pool)} items cannot fill depth {max_depth}")
    return label_tree(grow(max_depth, True), precedence)


def random_derivation(rng: np.random.Generator, items: Sequence[LexicalItem], n_steps: int
                      ) -> Derivation:
    """Merge random pairs, starting from ``n_steps + 1`` leaves drawn from ``items``."""
    if n_steps + 1 > len(items):
        raise ValueError("not enough items for the requested number of steps")
    chosen = [items[i] for i in rng.choice(len(items), n_steps + 1, replace=False)]
    ws = Workspace.of(*(Leaf(it) for it in chosen))
    pairs = []
    current = ws
    for _ in range(n_steps):
        members = list(current)
        i, j = rng.choice(len(members), 2, replace=False)
        pairs.append((members[i], members[j]))
        current = merge(current, members[i], members[j])
    return derive(ws, pairs)


def demo_lexicon() -> Lexicon:
    """Small hand-written English lexicon with 4-d embeddings."""
    rows = [
        ("the", "D", (0.1, -0.3, 0.2, 0.0), 0.9),
        ("a", "D", (0.0, -0.2, 0.3, 0.1), 0.8),
        ("dog", "N", (0.8, 0.1, -0.4, 0.5), 0.6),
        ("cat", "N", (0.7, 0.3, -0.2, -0.6), 0.5),
        ("old", "A", (-0.5, 0.9, 0.1, 0.2), 0.3),
        ("barked", "V", (0.2, -0.8, 0.6, -0.1), 0.4),
        ("saw", "V", (-0.3, -0.6, -0.7, 0.4), 0.7),
        ("in", "P", (-0.9, 0.2, 0.5, -0.3), 0.2),
        ("park", "N", (0.5, 0.6, 0.4, 0.9), 0.35),
    ]
    return Lexicon.from_items([LexicalItem(i, c, e, w) for i, c, e, w in rows], 4)

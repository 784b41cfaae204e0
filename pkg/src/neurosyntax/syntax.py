"""Set-theoretic MERGE over workspaces, labeling, tree metrics and linearization.

Syntactic objects are immutable values. A node holds its two children as a
``frozenset`` so that ``{a, b}`` and ``{b, a}`` compare (and hash) equal; any
planar order is imposed only by :func:`linearize`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

from .errors import MergeError, OrderMismatchError, UnlabelableError

__all__ = [
    "Feature", "LexicalItem", "Leaf", "Node", "SyntacticObject", "Workspace",
    "Step", "Derivation", "DEFAULT_PRECEDENCE",
    "merge", "label", "label_tree", "is_labeled", "head_child", "depth",
    "node_count", "leaf_count", "leaves", "node_closures", "linearize",
    "derive", "check_markov", "postorder",
    "to_json_obj", "from_json_obj", "canonical_json", "tree_from_json",
]

FEATURE_KINDS = ("categorial", "selectional", "other")
DEFAULT_PRECEDENCE: tuple[str, ...] = ("N", "V", "A", "P")


@dataclass(frozen=True, order=True)
class Feature:
    name: str
    kind: str = "other"

    def __post_init__(self):
        if not self.name:
            raise ValueError("feature name must be non-empty")
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")


@dataclass(frozen=True)
class LexicalItem:
    """A lexical token.

    ``id`` identifies the token, so two occurrences of *the* in one sentence
    are two items (``the_1``, ``the_2``). If ``features`` carries no
    categorial feature one is added from ``category``.
    """

    id: str
    category: str
    embedding: tuple[float, ...] = ()
    weight: float = 1.0
    features: frozenset[Feature] = frozenset()

    def __post_init__(self):
        if not self.id:
            raise ValueError("lexical item id must be non-empty")
        if not self.category:
            raise ValueError(f"item {self.id!r} has no category")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"item {self.id!r}: weight {self.weight} outside [0, 1]")
        object.__setattr__(self, "embedding", tuple(float(v) for v in self.embedding))
        feats = frozenset(self.features)
        categorial = [f for f in feats if f.kind == "categorial"]
        if not categorial:
            feats = feats | {Feature(self.category, "categorial")}
        elif len(categorial) > 1:
            raise ValueError(f"item {self.id!r} has {len(categorial)} categorial features")
        elif categorial[0].name != self.category:
            raise ValueError(
                f"item {self.id!r}: categorial feature {categorial[0].name!r} "
                f"disagrees with category {self.category!r}")
        object.__setattr__(self, "features", feats)


@dataclass(frozen=True)
class Leaf:
    item: LexicalItem

    @property
    def label(self) -> str:
        return self.item.category


@dataclass(frozen=True)
class Node:
    children: frozenset
    label: str | None = None

    def __post_init__(self):
        children = frozenset(self.children)
        if len(children) != 2:
            raise MergeError("a node needs exactly two distinct children")
        object.__setattr__(self, "children", children)

    @classmethod
    def of(cls, a: "SyntacticObject", b: "SyntacticObject", label: str | None = None) -> "Node":
        return cls(frozenset((a, b)), label)


SyntacticObject = Union[Leaf, Node]


@dataclass(frozen=True)
class Workspace:
    objects: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "objects", frozenset(self.objects))

    @classmethod
    def of(cls, *objects: SyntacticObject) -> "Workspace":
        if len(set(objects)) != len(objects):
            raise MergeError("workspace members must be distinct")
        return cls(frozenset(objects))

    def __len__(self) -> int:
        return len(self.objects)

    def __contains__(self, so) -> bool:
        return so in self.objects

    def __iter__(self) -> Iterator[SyntacticObject]:
        return iter(sorted(self.objects, key=canonical_json))


def merge(ws: Workspace, p: SyntacticObject, q: SyntacticObject) -> Workspace:
    """Replace ``p`` and ``q`` in ``ws`` by the unlabeled set ``{p, q}``."""
    if p == q:
        raise MergeError("cannot merge an object with itself")
    if p not in ws.objects or q not in ws.objects:
        raise MergeError("both merge operands must be members of the workspace")
    return Workspace((ws.objects - {p, q}) | {Node.of(p, q)})


# --------------------------------------------------------------------------
# labeling


def _head_category(so: SyntacticObject, precedence: Sequence[str]) -> str:
    if isinstance(so, Leaf):
        return so.item.category
    return so.label if so.label is not None else label(so, precedence)


def label(so: SyntacticObject, precedence: Sequence[str] = DEFAULT_PRECEDENCE) -> str:
    """Return the category that ``so`` projects.

    A lexical head merged with a phrase projects. Two leaves or two phrases
    are resolved by ``precedence`` (earlier wins); equal categories project
    that category. Raises :class:`UnlabelableError` when neither category
    appears in ``precedence``.
    """
    if isinstance(so, Leaf):
        return so.item.category
    a, b = tuple(so.children)
    if isinstance(a, Leaf) != isinstance(b, Leaf):
        lexical = a if isinstance(a, Leaf) else b
        return lexical.item.category
    ca, cb = _head_category(a, precedence), _head_category(b, precedence)
    if ca == cb:
        return ca
    ranked = [c for c in precedence if c in (ca, cb)]
    if not ranked:
        raise UnlabelableError(f"no labeling rule for {{{ca}, {cb}}}")
    return ranked[0]


def label_tree(so: SyntacticObject, precedence: Sequence[str] = DEFAULT_PRECEDENCE) -> SyntacticObject:
    """Return a copy of ``so`` with every node label filled in."""
    if isinstance(so, Leaf):
        return so
    a, b = (label_tree(c, precedence) for c in so.children)
    unlabeled = Node.of(a, b)
    return Node.of(a, b, label(unlabeled, precedence))


def is_labeled(so: SyntacticObject) -> bool:
    if isinstance(so, Leaf):
        return True
    return so.label is not None and all(is_labeled(c) for c in so.children)


def head_child(node: Node) -> tuple[SyntacticObject, SyntacticObject]:
    """Split a labeled node into ``(head, non_head)``."""
    if node.label is None:
        raise UnlabelableError("node is unlabeled")
    a, b = sorted(node.children, key=canonical_json)
    if isinstance(a, Leaf) != isinstance(b, Leaf):
        head = a if isinstance(a, Leaf) else b
        if head.item.category != node.label:
            raise UnlabelableError(
                f"label {node.label!r} does not match lexical head {head.item.category!r}")
        return head, (b if head is a else a)
    for head, other in ((a, b), (b, a)):
        if head.label == node.label:
            return head, other
    raise UnlabelableError(f"label {node.label!r} matches neither child")


# --------------------------------------------------------------------------
# metrics


def depth(so: SyntacticObject) -> int:
    if isinstance(so, Leaf):
        return 0
    return 1 + max(depth(c) for c in so.children)


def node_count(so: SyntacticObject) -> int:
    if isinstance(so, Leaf):
        return 1
    return 1 + sum(node_count(c) for c in so.children)


def leaf_count(so: SyntacticObject) -> int:
    if isinstance(so, Leaf):
        return 1
    return sum(leaf_count(c) for c in so.children)


def leaves(so: SyntacticObject) -> list[LexicalItem]:
    """Leaf items in canonical (not linear) order."""
    if isinstance(so, Leaf):
        return [so.item]
    out: list[LexicalItem] = []
    for c in sorted(so.children, key=canonical_json):
        out.extend(leaves(c))
    return out


def _item_id(x) -> str:
    if isinstance(x, Leaf):
        return x.item.id
    if isinstance(x, LexicalItem):
        return x.id
    return str(x)


def node_closures(so: SyntacticObject, order: Sequence) -> list[int]:
    """Count, per leaf position, the nodes whose rightmost leaf sits there.

    ``order`` may be any planar order of the tree's leaves (items, leaves or
    ids), not only the head-initial one.
    """
    ids = [_item_id(x) for x in order]
    position = {i: k for k, i in enumerate(ids)}
    if len(position) != len(ids) or sorted(ids) != sorted(it.id for it in leaves(so)):
        raise OrderMismatchError("order is not a permutation of the tree's leaves")
    counts = [0] * len(ids)

    def walk(t: SyntacticObject) -> tuple[int, int, int]:
        # returns (min position, max position, leaf count)
        if isinstance(t, Leaf):
            k = position[t.item.id]
            counts[k] += 1
            return k, k, 1
        spans = [walk(c) for c in t.children]
        lo = min(s[0] for s in spans)
        hi = max(s[1] for s in spans)
        n = sum(s[2] for s in spans)
        if hi - lo + 1 != n:
            raise OrderMismatchError("order splits a constituent")
        counts[hi] += 1
        return lo, hi, n

    walk(so)
    return counts


def linearize(so: SyntacticObject) -> list[LexicalItem]:
    """Head-initial planar order of the leaves of a fully labeled tree."""
    if isinstance(so, Leaf):
        return [so.item]
    head, comp = head_child(so)
    return linearize(head) + linearize(comp)


def postorder(so: SyntacticObject) -> list[SyntacticObject]:
    """Bottom-up node sequence following the head-initial order."""
    if isinstance(so, Leaf):
        return [so]
    head, comp = head_child(so)
    return postorder(head) + postorder(comp) + [so]


# --------------------------------------------------------------------------
# derivations


@dataclass(frozen=True)
class Step:
    pair: tuple
    result: Workspace


@dataclass(frozen=True)
class Derivation:
    initial: Workspace
    steps: tuple[Step, ...] = ()

    @property
    def final(self) -> Workspace:
        return self.steps[-1].result if self.steps else self.initial

    def workspaces(self) -> list[Workspace]:
        return [self.initial] + [s.result for s in self.steps]


def derive(initial: Workspace, pairs: Iterable[tuple]) -> Derivation:
    ws, steps = initial, []
    for p, q in pairs:
        ws = merge(ws, p, q)
        steps.append(Step((p, q), ws))
    return Derivation(initial, tuple(steps))


def check_markov(d: Derivation) -> bool:
    """True iff every suffix replays from its own starting workspace."""
    states = d.workspaces()
    for start in range(len(d.steps) + 1):
        ws = states[start]
        for k in range(start, len(d.steps)):
            try:
                ws = merge(ws, *d.steps[k].pair)
            except (MergeError, TypeError, ValueError):
                return False
            if ws != d.steps[k].result:
                return False
    return True


# --------------------------------------------------------------------------
# JSON


def to_json_obj(so: SyntacticObject) -> dict:
    if isinstance(so, Leaf):
        it = so.item
        return {
            "id": it.id,
            "category": it.category,
            "features": [{"name": f.name, "kind": f.kind} for f in sorted(it.features)],
            "weight": it.weight,
            "embedding": list(it.embedding),
        }
    kids = sorted((to_json_obj(c) for c in so.children), key=_dump)
    return {"label": so.label, "children": kids}


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def canonical_json(so: SyntacticObject) -> str:
    """Canonical serialization; equal trees give equal strings."""
    return _dump(to_json_obj(so))


def _feature_from_json(f) -> Feature:
    if isinstance(f, str):
        return Feature(f)
    return Feature(f["name"], f.get("kind", "other"))


def from_json_obj(obj: dict) -> SyntacticObject:
    if "children" in obj:
        kids = obj["children"]
        if len(kids) != 2:
            raise MergeError("serialized node must have two children")
        return Node.of(from_json_obj(kids[0]), from_json_obj(kids[1]), obj.get("label"))
    item = LexicalItem(
        id=obj["id"],
        category=obj["category"],
        embedding=tuple(obj.get("embedding", ())),
        weight=obj.get("weight", 1.0),
        features=frozenset(_feature_from_json(f) for f in obj.get("features", ())),
    )
    return Leaf(item)


def tree_from_json(text: str) -> SyntacticObject:
    return from_json_obj(json.loads(text))

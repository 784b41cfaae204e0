"""Lexical feature vectors, compression and recursive composition."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DegenerateWeightsError, DimensionError
from .syntax import Feature, LexicalItem

__all__ = [
    "Lexicon", "Projection", "RecurrentReducer", "NONLINEARITIES",
    "compress", "reduce_sequence", "compose_embedding", "normalize_weights",
    "normalize",
]

NONLINEARITIES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
    "identity": lambda z: z,
    "relu": lambda z: np.maximum(z, 0.0),
    "logistic": lambda z: 1.0 / (1.0 + np.exp(-z)),
}


@dataclass(frozen=True)
class Lexicon:
    n: int
    items: Mapping[str, LexicalItem] = field(default_factory=dict)

    def __post_init__(self):
        for key, it in self.items.items():
            if key != it.id:
                raise ValueError(f"lexicon key {key!r} differs from item id {it.id!r}")
            if len(it.embedding) != self.n:
                raise DimensionError(
                    f"item {it.id!r} has embedding length {len(it.embedding)}, expected {self.n}")
        object.__setattr__(self, "items", dict(sorted(self.items.items())))

    @classmethod
    def from_items(cls, items: Sequence[LexicalItem], n: int | None = None) -> "Lexicon":
        if n is None:
            n = len(items[0].embedding) if items else 0
        return cls(n, {it.id: it for it in items})

    def __getitem__(self, key: str) -> LexicalItem:
        return self.items[key]

    def __contains__(self, key) -> bool:
        return key in self.items

    def __len__(self) -> int:
        return len(self.items)

    def by_category(self, category: str) -> list[LexicalItem]:
        return [it for it in self.items.values() if it.category == category]

    def to_json_obj(self) -> dict:
        return {
            key: {
                "category": it.category,
                "features": [{"name": f.name, "kind": f.kind} for f in sorted(it.features)],
                "weight": it.weight,
                "embedding": list(it.embedding),
            }
            for key, it in self.items.items()
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Lexicon":
        items = []
        for key, entry in obj.items():
            feats = []
            for f in entry.get("features", ()):
                feats.append(Feature(f) if isinstance(f, str)
                             else Feature(f["name"], f.get("kind", "other")))
            items.append(LexicalItem(key, entry["category"], tuple(entry["embedding"]),
                                     entry.get("weight", 1.0), frozenset(feats)))
        if not items:
            raise ValueError("lexicon file is empty")
        return cls.from_items(items)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_obj(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Lexicon":
        with open(path) as fh:
            return cls.from_json_obj(json.load(fh))


@dataclass(frozen=True)
class Projection:
    W: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] >= W.shape[1]:
            raise DimensionError(f"projection must be m x n with m < n, got {W.shape}")
        if not np.all(np.isfinite(W)):
            raise ValueError("projection has non-finite entries")
        W.flags.writeable = False
        object.__setattr__(self, "W", W)

    @property
    def shape(self) -> tuple[int, int]:
        return self.W.shape


@dataclass(frozen=True)
class RecurrentReducer:
    W_r: np.ndarray
    W_x: np.ndarray
    b: np.ndarray
    sigma: str = "tanh"

    def __post_init__(self):
        W_r = np.array(self.W_r, dtype=float)
        W_x = np.array(self.W_x, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        m = b.size
        if W_r.shape != (m, m) or W_x.ndim != 2 or W_x.shape[0] != m:
            raise DimensionError(
                f"inconsistent reducer shapes W_r={W_r.shape} W_x={W_x.shape} b={b.shape}")
        if self.sigma not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.sigma!r}")
        for a in (W_r, W_x, b):
            a.flags.writeable = False
        object.__setattr__(self, "W_r", W_r)
        object.__setattr__(self, "W_x", W_x)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def n(self) -> int:
        return self.W_x.shape[1]

    def activate(self, z):
        return NONLINEARITIES[self.sigma](z)


def compress(p: Projection, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (p.W.shape[1],):
        raise DimensionError(f"expected a length-{p.W.shape[1]} vector, got shape {X.shape}")
    return p.W @ X


def reduce_sequence(r: RecurrentReducer, Xs, h_0) -> np.ndarray:
    """Fold ``h_t = sigma(W_r h_{t-1} + W_x X_t + b)`` left to right."""
    h = np.asarray(h_0, dtype=float)
    if h.shape != (r.m,):
        raise DimensionError(f"h_0 must have length {r.m}")
    for X in Xs:
        X = np.asarray(X, dtype=float)
        if X.shape != (r.n,):
            raise DimensionError(f"input of shape {X.shape}, expected ({r.n},)")
        h = r.activate(r.W_r @ h + r.W_x @ X + r.b)
    return h


def compose_embedding(h_left, h_right, r: RecurrentReducer) -> np.ndarray:
    """Parent vector of two children; symmetric in its arguments."""
    a = np.asarray(h_left, dtype=float)
    c = np.asarray(h_right, dtype=float)
    if a.shape != (r.m,) or c.shape != (r.m,):
        raise DimensionError(f"children must both have length {r.m}")
    return r.activate(r.W_r @ ((a + c) / 2.0) + r.b)


def normalize(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if not total > 0:
        raise DegenerateWeightsError("all weights are zero")
    return w / total


def normalize_weights(lex: Lexicon, ids: Sequence[str]) -> np.ndarray:
    """Rescale the items' raw weights into a probability vector."""
    return normalize([lex[i].weight for i in ids])

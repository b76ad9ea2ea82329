"""Sentence embedding and approximate nearest-neighbor retrieval.

The default embedder hashes TF-IDF-weighted word unigrams and character
trigrams into a fixed dimension with signed feature hashing, then
L2-normalizes, so embeddings are deterministic and need no model files.
Any callable text -> unit vector can replace it without touching retrieval.

Retrieval is a forest of random-projection split trees searched best-first
across all trees; candidates are re-scored with exact dot products, so the
approximation only ever affects recall, never reported similarities.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ValidationError

DEFAULT_DIM = 256
DEFAULT_NUM_TREES = 16
DEFAULT_LEAF_CAPACITY = 32
DEFAULT_SEED = 17
DEFAULT_K = 50

_TOKEN = re.compile(r"[a-z0-9']+")

INDEX_FORMAT_VERSION = 1


@dataclass(frozen=True)
class SentenceVector:
    id: str
    vec: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=np.float64)
        object.__setattr__(self, "vec", vec)


def _tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def _features(text: str) -> dict[str, int]:
    """Word unigrams plus padded character trigrams, with term counts."""
    tokens = _tokenize(text)
    feats: dict[str, int] = {}
    for tok in tokens:
        feats[f"w:{tok}"] = feats.get(f"w:{tok}", 0) + 1
        padded = f" {tok} "
        for i in range(len(padded) - 2):
            tri = f"c:{padded[i:i + 3]}"
            feats[tri] = feats.get(tri, 0) + 1
    return feats


def _hash64(feature: str) -> int:
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class IdfTable:
    """Smoothed inverse document frequencies over embedder features."""

    n_docs: int = 0
    idf: dict[str, float] = field(default_factory=dict)

    @property
    def default_idf(self) -> float:
        return float(np.log((1.0 + self.n_docs) / 1.0) + 1.0)

    def weight(self, feature: str) -> float:
        return self.idf.get(feature, self.default_idf) if self.n_docs else 1.0

    @classmethod
    def build(cls, texts: Iterable[str]) -> "IdfTable":
        df: dict[str, int] = {}
        n = 0
        for text in texts:
            n += 1
            for feature in _features(text):
                df[feature] = df.get(feature, 0) + 1
        idf = {f: float(np.log((1.0 + n) / (1.0 + c)) + 1.0) for f, c in df.items()}
        return cls(n_docs=n, idf=idf)

    def to_dict(self) -> dict:
        return {"n_docs": self.n_docs, "idf": self.idf}

    @classmethod
    def from_dict(cls, data: dict) -> "IdfTable":
        return cls(n_docs=data["n_docs"], idf=dict(data["idf"]))


class HashedEmbedder:
    """Deterministic signed-feature-hashing embedder (case-insensitive)."""

    def __init__(self, dim: int = DEFAULT_DIM, idf: Optional[IdfTable] = None):
        if dim < 2:
            raise ValidationError("dim must be >= 2")
        self.dim = dim
        self.idf = idf or IdfTable()

    def embed(self, text: str, item_id: str = "") -> SentenceVector:
        if not text or not text.strip():
            raise ValidationError("text must be non-empty")
        vec = np.zeros(self.dim)
        for feature, tf in _features(text).items():
            h = _hash64(feature)
            sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
            vec[h % self.dim] += sign * tf * self.idf.weight(feature)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValidationError("text produced an empty embedding")
        return SentenceVector(id=item_id, vec=vec / norm)


def embed(text: str, dim: int = DEFAULT_DIM, idf: Optional[IdfTable] = None,
          item_id: str = "") -> SentenceVector:
    return HashedEmbedder(dim=dim, idf=idf).embed(text, item_id=item_id)


# ---------------------------------------------------------------------------
# Random-projection forest


@dataclass
class _Node:
    # Internal node: unit normal + offset + children. Leaf: item ids.
    normal: Optional[np.ndarray] = None
    offset: float = 0.0
    left: Optional["_Node"] = None
    right: Optional["_Node"] = None
    items: Optional[list[str]] = None

    @property
    def is_leaf(self) -> bool:
        return self.items is not None


class AnnIndex:
    """Immutable after build; safe for unlimited concurrent queries."""

    def __init__(self, items: dict[str, np.ndarray], trees: list[_Node],
                 dim: int, num_trees: int, leaf_capacity: int, seed: int):
        self.items = items
        self.trees = trees
        self.dim = dim
        self.num_trees = num_trees
        self.leaf_capacity = leaf_capacity
        self.seed = seed

    def __len__(self) -> int:
        return len(self.items)


def build_index(vectors: Sequence[SentenceVector],
                num_trees: int = DEFAULT_NUM_TREES,
                leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
                seed: int = DEFAULT_SEED) -> AnnIndex:
    """Deterministic forest for a fixed seed; the index never mutates."""
    if not vectors:
        raise ValidationError("need at least one vector")
    if num_trees < 1 or leaf_capacity < 1:
        raise ValidationError("num_trees and leaf_capacity must be >= 1")
    dim = len(vectors[0].vec)
    items: dict[str, np.ndarray] = {}
    for v in vectors:
        if len(v.vec) != dim:
            raise ValidationError(
                f"vector {v.id!r} has dim {len(v.vec)}, expected {dim}")
        if v.id in items:
            raise ValidationError(f"duplicate vector id {v.id!r}")
        items[v.id] = v.vec

    ids = sorted(items)
    matrix = np.stack([items[i] for i in ids])
    trees = []
    for t in range(num_trees):
        rng = np.random.default_rng((seed, t))
        trees.append(_build_tree(ids, matrix, np.arange(len(ids)), rng,
                                 leaf_capacity, depth=0))
    return AnnIndex(items=items, trees=trees, dim=dim, num_trees=num_trees,
                    leaf_capacity=leaf_capacity, seed=seed)


_MAX_DEPTH = 64


def _build_tree(ids: list[str], matrix: np.ndarray, subset: np.ndarray,
                rng: np.random.Generator, leaf_capacity: int, depth: int) -> _Node:
    if len(subset) <= leaf_capacity or depth >= _MAX_DEPTH:
        return _Node(items=[ids[i] for i in subset])

    normal = _split_normal(matrix, subset, rng)
    if normal is None:  # all points effectively identical
        return _Node(items=[ids[i] for i in subset])
    margins = matrix[subset] @ normal
    offset = float(np.median(margins))
    go_left = margins > offset
    if not go_left.any() or go_left.all():
        # Median landed on a plateau of ties; force a balanced split.
        order = np.argsort(margins, kind="stable")
        half = len(subset) // 2
        go_left = np.zeros(len(subset), dtype=bool)
        go_left[order[half:]] = True
    node = _Node(normal=normal, offset=offset)
    node.left = _build_tree(ids, matrix, subset[go_left], rng, leaf_capacity,
                            depth + 1)
    node.right = _build_tree(ids, matrix, subset[~go_left], rng, leaf_capacity,
                             depth + 1)
    return node


def _split_normal(matrix: np.ndarray, subset: np.ndarray,
                  rng: np.random.Generator) -> Optional[np.ndarray]:
    for _ in range(8):
        a, b = rng.choice(len(subset), size=2, replace=False)
        direction = matrix[subset[a]] - matrix[subset[b]]
        norm = float(np.linalg.norm(direction))
        if norm > 1e-9:
            return direction / norm
    direction = rng.standard_normal(matrix.shape[1])
    spread = matrix[subset] @ direction
    if float(spread.max() - spread.min()) < 1e-12:
        return None
    return direction / float(np.linalg.norm(direction))


def query(index: AnnIndex, q: SentenceVector, k: int,
          search_budget: Optional[int] = None) -> list[tuple[str, float]]:
    """Top-k ids by cosine, descending, ties broken by id.

    The forest is searched best-first with a shared priority queue until
    search_budget nodes have been visited (default 4 * k * num_trees);
    every gathered candidate is re-scored exactly.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if not index.items:
        return []
    if len(q.vec) != index.dim:
        raise ValidationError(f"query dim {len(q.vec)} != index dim {index.dim}")
    budget = search_budget if search_budget is not None else 4 * k * index.num_trees

    candidates: set[str] = set()
    heap: list[tuple[float, int, _Node]] = []
    counter = 0
    for tree in index.trees:
        heapq.heappush(heap, (-np.inf, counter, tree))
        counter += 1
    visited = 0
    while heap and visited < budget:
        neg_priority, _, node = heapq.heappop(heap)
        visited += 1
        if node.is_leaf:
            candidates.update(node.items)
            continue
        priority = -neg_priority
        margin = float(q.vec @ node.normal) - node.offset
        near, far = (node.left, node.right) if margin > 0 else (node.right, node.left)
        heapq.heappush(heap, (-priority, counter, near))
        counter += 1
        heapq.heappush(heap, (-min(priority, abs(margin)), counter, far))
        counter += 1

    scored = sorted(((float(q.vec @ index.items[cid]), cid) for cid in candidates),
                    key=lambda sc: (-sc[0], sc[1]))
    return [(cid, cos) for cos, cid in scored[:k]]


# ---------------------------------------------------------------------------
# Persistence


def save_index(index: AnnIndex, idf: IdfTable, path: str | Path) -> None:
    doc = {
        "format_version": INDEX_FORMAT_VERSION,
        "dim": index.dim,
        "num_trees": index.num_trees,
        "leaf_capacity": index.leaf_capacity,
        "seed": index.seed,
        "idf": idf.to_dict(),
        "items": {cid: vec.tolist() for cid, vec in index.items.items()},
        "trees": [_node_to_dict(t) for t in index.trees],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_index(path: str | Path) -> tuple[AnnIndex, IdfTable]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    version = doc.get("format_version")
    if version != INDEX_FORMAT_VERSION:
        raise ValidationError(f"unsupported index format version: {version}")
    items = {cid: np.asarray(vec, dtype=np.float64)
             for cid, vec in doc["items"].items()}
    trees = [_node_from_dict(t) for t in doc["trees"]]
    index = AnnIndex(items=items, trees=trees, dim=doc["dim"],
                     num_trees=doc["num_trees"],
                     leaf_capacity=doc["leaf_capacity"], seed=doc["seed"])
    return index, IdfTable.from_dict(doc["idf"])


def _node_to_dict(node: _Node) -> dict:
    if node.is_leaf:
        return {"items": node.items}
    return {"normal": node.normal.tolist(), "offset": node.offset,
            "left": _node_to_dict(node.left), "right": _node_to_dict(node.right)}


def _node_from_dict(data: dict) -> _Node:
    if "items" in data:
        return _Node(items=list(data["items"]))
    return _Node(normal=np.asarray(data["normal"], dtype=np.float64),
                 offset=float(data["offset"]),
                 left=_node_from_dict(data["left"]),
                 right=_node_from_dict(data["right"]))

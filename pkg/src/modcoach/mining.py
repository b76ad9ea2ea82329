"""Frequent modulation-combination mining over aligned technique labels.

Every contiguous query window (start, length <= max_n) collects one
transaction per retrieved sentence whose alignment covers the whole
window. Frequent label tuples per window are mined with FP-growth; the
result is defined to equal exhaustive counting, which the tests enforce.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

from .errors import ValidationError
from .labeling import TechniqueLabel

#: Windows with fewer transactions than this are flagged as weakly
#: supported (rendered dashed in the recommendation view).
MIN_WELL_SUPPORTED = 5


@dataclass(frozen=True)
class MiningConfig:
    min_support_ratio: float = 0.05
    max_n: int = 3

    def __post_init__(self):
        if not (0 < self.min_support_ratio <= 1):
            raise ValidationError("min_support_ratio must be in (0, 1]")
        if self.max_n < 1:
            raise ValidationError("max_n must be >= 1")


@dataclass
class TransactionSet:
    """Label-tuple transactions per (start, length) window."""

    query_len: int
    max_n: int
    n_projections: int
    windows: dict[tuple[int, int], list[tuple[TechniqueLabel, ...]]] = field(
        default_factory=dict)

    def transactions(self, start: int, length: int) -> list[tuple[TechniqueLabel, ...]]:
        return self.windows.get((start, length), [])


@dataclass(frozen=True)
class Combo:
    labels: tuple[TechniqueLabel, ...]
    count: int
    ratio: float

    def to_dict(self) -> dict:
        return {"labels": [lab.to_dict() for lab in self.labels],
                "count": self.count, "ratio": self.ratio}


@dataclass(frozen=True)
class ConditionCounts:
    not_aligned: int
    no_technique: int
    with_technique: int

    def to_dict(self) -> dict:
        return {"not_aligned": self.not_aligned, "none": self.no_technique,
                "tech": self.with_technique}


@dataclass
class WindowSummary:
    start: int
    length: int
    transaction_count: int
    combos: list[Combo]

    @property
    def insufficient_support(self) -> bool:
        return self.transaction_count < MIN_WELL_SUPPORTED

    def to_dict(self, conditions: Optional[ConditionCounts] = None) -> dict:
        data = {
            "window": {"start": self.start, "len": self.length},
            "transactions": self.transaction_count,
            "insufficient": self.insufficient_support,
            "combos": [c.to_dict() for c in self.combos],
        }
        if conditions is not None:
            data["conditions"] = conditions.to_dict()
        return data


@dataclass
class NgramSummary:
    """Hierarchical per-window combination summary plus per-word conditions."""

    query_len: int
    windows: dict[tuple[int, int], WindowSummary]
    conditions: list[ConditionCounts]

    def to_payload(self) -> list[dict]:
        out = []
        for (start, length) in sorted(self.windows, key=lambda k: (k[1], k[0])):
            summary = self.windows[(start, length)]
            cond = self.conditions[start] if length == 1 else None
            out.append(summary.to_dict(cond))
        return out


def build_transactions(projections: Sequence[Sequence[Optional[TechniqueLabel]]],
                       max_n: int, query_len: Optional[int] = None) -> TransactionSet:
    """Collect window transactions from per-sentence label projections.

    A sentence contributes to window (i, n) iff every position i..i+n-1 is
    aligned; unaligned positions never enter any transaction.
    """
    if query_len is None:
        if not projections:
            raise ValidationError("query_len required when projections are empty")
        query_len = len(projections[0])
    for p, proj in enumerate(projections):
        if len(proj) != query_len:
            raise ValidationError(
                f"projection {p} has length {len(proj)}, expected {query_len}")
    tx = TransactionSet(query_len=query_len, max_n=max_n,
                        n_projections=len(projections))
    for n in range(1, max_n + 1):
        for start in range(0, query_len - n + 1):
            bucket: list[tuple[TechniqueLabel, ...]] = []
            for proj in projections:
                span = proj[start:start + n]
                if all(lab is not None for lab in span):
                    bucket.append(tuple(span))
            tx.windows[(start, n)] = bucket
    return tx


def summarize_conditions(
        projections: Sequence[Sequence[Optional[TechniqueLabel]]],
        query_len: Optional[int] = None) -> list[ConditionCounts]:
    """Per query word: how many sentences are unaligned, aligned with no
    technique, or aligned with some technique. The three always sum to the
    number of projections."""
    if query_len is None:
        if not projections:
            return []
        query_len = len(projections[0])
    out = []
    for i in range(query_len):
        not_aligned = no_tech = with_tech = 0
        for proj in projections:
            lab = proj[i]
            if lab is None:
                not_aligned += 1
            elif lab.is_none:
                no_tech += 1
            else:
                with_tech += 1
        out.append(ConditionCounts(not_aligned, no_tech, with_tech))
    return out


def min_count_for(ratio: float, n_transactions: int) -> int:
    """Smallest integer count whose support ratio reaches the threshold."""
    return max(1, math.ceil(ratio * n_transactions - 1e-9))


def mine_frequent(tx: TransactionSet, cfg: MiningConfig = MiningConfig()) -> NgramSummary:
    """Frequent label tuples per window at support ratio >= the threshold.

    FP-growth runs per window over position-tagged items; only itemsets
    covering the full window are kept, so results are exactly the frequent
    contiguous tuples. Combos are sorted by ratio descending, then by the
    tuple's channel-value lexicographic order.
    """
    windows: dict[tuple[int, int], WindowSummary] = {}
    for (start, n), transactions in sorted(tx.windows.items()):
        n_tx = len(transactions)
        combos: list[Combo] = []
        if n_tx:
            items_tx = [tuple((pos, lab) for pos, lab in enumerate(t))
                        for t in transactions]
            frequent = fp_growth(items_tx, min_count_for(cfg.min_support_ratio, n_tx))
            for itemset, count in frequent.items():
                if len(itemset) != n:
                    continue
                if count / n_tx >= cfg.min_support_ratio:
                    labels = tuple(lab for _, lab in sorted(itemset))
                    combos.append(Combo(labels=labels, count=count,
                                        ratio=count / n_tx))
            combos.sort(key=lambda c: (-c.ratio,
                                       tuple(lab.as_tuple() for lab in c.labels)))
        windows[(start, n)] = WindowSummary(start=start, length=n,
                                            transaction_count=n_tx, combos=combos)
    return NgramSummary(query_len=tx.query_len, windows=windows, conditions=[])


def ngram_summary(projections: Sequence[Sequence[Optional[TechniqueLabel]]],
                  cfg: MiningConfig = MiningConfig(),
                  query_len: Optional[int] = None) -> NgramSummary:
    """build_transactions + mine_frequent + summarize_conditions in one step."""
    tx = build_transactions(projections, cfg.max_n, query_len=query_len)
    summary = mine_frequent(tx, cfg)
    summary.conditions = summarize_conditions(projections, query_len=tx.query_len)
    return summary


# ---------------------------------------------------------------------------
# FP-growth over generic hashable items


class _FPNode:
    __slots__ = ("item", "count", "parent", "children", "link")

    def __init__(self, item, parent):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict = {}
        self.link: Optional[_FPNode] = None


class _FPTree:
    def __init__(self):
        self.root = _FPNode(None, None)
        self.heads: dict = {}
        self.tails: dict = {}

    def add(self, items: Sequence[Hashable], count: int = 1) -> None:
        node = self.root
        for item in items:
            child = node.children.get(item)
            if child is None:
                child = _FPNode(item, node)
                node.children[item] = child
                if item in self.tails:
                    self.tails[item].link = child
                else:
                    self.heads[item] = child
                self.tails[item] = child
            child.count += count
            node = child

    def nodes(self, item):
        node = self.heads.get(item)
        while node is not None:
            yield node
            node = node.link


def fp_growth(transactions: Iterable[Sequence[Hashable]],
              min_count: int) -> dict[frozenset, int]:
    """All itemsets with support count >= min_count, mapped to exact counts."""
    transactions = [tuple(t) for t in transactions]
    counts: dict = defaultdict(int)
    for t in transactions:
        for item in set(t):
            counts[item] += 1
    frequent_items = {i: c for i, c in counts.items() if c >= min_count}
    # Stable, deterministic item order: by descending count then repr.
    order = {item: (-count, repr(item)) for item, count in frequent_items.items()}

    tree = _FPTree()
    for t in transactions:
        kept = sorted((i for i in set(t) if i in frequent_items),
                      key=lambda i: order[i])
        if kept:
            tree.add(kept)

    out: dict[frozenset, int] = {}
    _mine_tree(tree, frequent_items, min_count, (), out)
    return out


def _mine_tree(tree: _FPTree, item_counts: dict, min_count: int,
               suffix: tuple, out: dict[frozenset, int]) -> None:
    for item, support in sorted(item_counts.items(),
                                key=lambda kv: (kv[1], repr(kv[0]))):
        new_suffix = suffix + (item,)
        out[frozenset(new_suffix)] = support

        # Conditional pattern base for this item.
        paths: list[tuple[tuple, int]] = []
        for node in tree.nodes(item):
            path = []
            parent = node.parent
            while parent is not None and parent.item is not None:
                path.append(parent.item)
                parent = parent.parent
            if path:
                paths.append((tuple(reversed(path)), node.count))

        cond_counts: dict = defaultdict(int)
        for path, count in paths:
            for path_item in path:
                cond_counts[path_item] += count
        cond_frequent = {i: c for i, c in cond_counts.items() if c >= min_count}
        if not cond_frequent:
            continue
        cond_tree = _FPTree()
        order = {i: (-c, repr(i)) for i, c in cond_frequent.items()}
        for path, count in paths:
            kept = sorted((i for i in path if i in cond_frequent),
                          key=lambda i: order[i])
            if kept:
                cond_tree.add(kept, count)
        _mine_tree(cond_tree, cond_frequent, min_count, new_suffix, out)

"""Recursive most-frequent-term splitting of a dataset into bounded clusters."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from itertools import chain
from typing import Iterable, Sequence

from .core import Dataset, Params, Record

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawCluster:
    records: tuple[Record, ...]
    positions: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.records)


def _most_frequent(records: Sequence[Record], idx: Sequence[int], ignore: frozenset[int]) -> int | None:
    counts = Counter(chain.from_iterable(records[i] for i in idx))
    best, best_count = None, 0
    for t, c in counts.items():
        if t in ignore:
            continue
        if c > best_count or (c == best_count and t < best):
            best, best_count = t, c
    return best


def horpart(data: Dataset, params: Params) -> list[RawCluster]:
    """Split on the most frequent non-ignored term until every part is small.

    A part is final once it holds fewer than ``max_cluster_size`` records. Ties
    on support go to the smaller term id. Sensitive terms are never used for
    splitting. When every term of an oversized part is already ignored (duplicate
    heavy data) the part is halved by position.
    """
    if not data.records:
        raise ValueError("cannot partition an empty dataset")
    records = data.records
    limit = params.max_cluster_size
    out: list[list[int]] = []
    # explicit stack; D1 is pushed last so it is expanded first (left-to-right order)
    stack: list[tuple[list[int], frozenset[int]]] = [
        (list(range(len(records))), frozenset(params.sensitive_terms))
    ]
    while stack:
        idx, ignore = stack.pop()
        if len(idx) < limit:
            out.append(idx)
            continue
        a = _most_frequent(records, idx, ignore)
        if a is None:
            half = len(idx) // 2
            stack.append((idx[half:], ignore))
            stack.append((idx[:half], ignore))
            continue
        d1 = [i for i in idx if a in records[i]]
        d2 = [i for i in idx if a not in records[i]]
        if d2:
            stack.append((d2, ignore))
        stack.append((d1, ignore | {a}))
    return [RawCluster(tuple(records[i] for i in idx), tuple(idx)) for idx in out]


def _feasible_parts(n: int, k: int, limit: int) -> int | None:
    c = max(1, -(-n // limit))
    return c if c * k <= n else None


def _split_even(idx: list[int], parts: int) -> list[list[int]]:
    q, r = divmod(len(idx), parts)
    out, start = [], 0
    for p in range(parts):
        end = start + q + (1 if p < r else 0)
        out.append(idx[start:end])
        start = end
    return out


def enforce_min_cluster_size(
    clusters: Iterable[RawCluster], k: int, max_cluster_size: int
) -> list[RawCluster]:
    """Fold clusters with fewer than k records into their neighbours.

    An undersized cluster is merged with the preceding one; if the union is too
    large it is re-split by position into the fewest near-equal parts that each
    hold between k and ``max_cluster_size`` records. Groups with no such split
    are carried forward and merged with the next cluster. When no split exists
    at all, clusters keep at least k records and may exceed the maximum.
    """
    by_pos: dict[int, Record] = {}
    groups: list[list[int]] = []
    for c in clusters:
        by_pos.update(zip(c.positions, c.records))
        groups.append(list(c.positions))

    done: list[list[int]] = []
    carry: list[int] = []
    for g in groups:
        g = carry + g
        carry = []
        if len(g) < k:
            if not done:
                carry = g
                continue
            g = done.pop() + g
        if len(g) <= max_cluster_size:
            done.append(g)
            continue
        parts = _feasible_parts(len(g), k, max_cluster_size)
        if parts is None:
            carry = g
        else:
            done.extend(_split_even(g, parts))
    if carry:
        merged = (done.pop() if done else []) + carry
        parts = _feasible_parts(len(merged), k, max_cluster_size)
        if parts is None:
            # at least k per cluster outranks the size cap
            log.warning("cannot split %d records into clusters of size [%d, %d]; "
                        "keeping at least %d per cluster", len(merged), k, max_cluster_size, k)
            parts = max(1, len(merged) // k)
        done.extend(_split_even(merged, parts))
    return [RawCluster(tuple(by_pos[i] for i in g), tuple(g)) for g in done]

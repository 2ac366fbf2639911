"""Greedy vertical partitioning of a cluster into k^m-anonymous record chunks."""
from __future__ import annotations

from collections import Counter
from itertools import combinations
from typing import Collection, Iterable, Sequence

from .core import Params, Record, compute_supports, project
from .horizontal import RawCluster
from .model import RecordChunk, VerticalPartition


def chunk_support(subrecords: Iterable[Record], terms: Collection[int]) -> int:
    """Number of subrecords (with multiplicity) containing every term in ``terms``."""
    s = set(terms)
    return sum(1 for r in subrecords if s.issubset(r))


def combination_counts(subrecords: Iterable[Record], m: int) -> Counter:
    counts: Counter = Counter()
    for r in subrecords:
        for size in range(1, min(m, len(r)) + 1):
            counts.update(combinations(r, size))
    return counts


def is_km_anonymous(subrecords: Iterable[Record], k: int, m: int) -> bool:
    """Every combination of at most m terms occurs 0 or at least k times."""
    return all(c >= k for c in combination_counts(subrecords, m).values())


def is_k_anonymous(subrecords: Iterable[Record], k: int) -> bool:
    """Every distinct non-empty subrecord occurs at least k times."""
    return all(c >= k for r, c in Counter(subrecords).items() if r)


def can_extend(containing: Sequence[Record], current: set[int], k: int, m: int) -> bool:
    """Would adding term t keep a k^m-anonymous chunk over ``current`` anonymous?

    ``containing`` holds the records that contain t. Only combinations that
    include t can change, so only those are counted.
    """
    if len(containing) < k:
        return False
    if m == 1:
        return True
    counts: Counter = Counter()
    for r in containing:
        inter = [u for u in r if u in current]
        for size in range(1, min(m - 1, len(inter)) + 1):
            counts.update(combinations(inter, size))
    return all(c >= k for c in counts.values())


def greedy_domains(
    records: Sequence[Record], order: Sequence[int], k: int, m: int
) -> list[list[int]]:
    """Pack terms (in the given priority order) into k^m-anonymous domains."""
    holders: dict[int, list[Record]] = {t: [] for t in order}
    for r in records:
        for t in r:
            if t in holders:
                holders[t].append(r)
    remaining = list(order)
    domains = []
    while remaining:
        current: set[int] = set()
        picked = []
        for t in remaining:
            if can_extend(holders[t], current, k, m):
                current.add(t)
                picked.append(t)
        if not picked:
            break
        domains.append(picked)
        remaining = [t for t in remaining if t not in current]
    return domains


def meets_record_count_bound(vp: VerticalPartition, k: int, m: int) -> bool:
    """Enough non-empty subrecords for a valid reconstruction, or a non-empty term chunk."""
    if vp.term_chunk:
        return True
    return vp.n_subrecords >= record_count_bound(vp.size, len(vp.record_chunks), k, m)


def record_count_bound(size: int, n_chunks: int, k: int, m: int) -> int:
    """Subrecords needed by a cluster with an empty term chunk.

    A cluster without record chunks still needs one subrecord per record.
    """
    h = max(1, min(m, n_chunks))
    return size + k * (h - 1)


def enforce_record_count_bound(vp: VerticalPartition, params: Params) -> VerticalPartition:
    """Move the least frequent record-chunk term to the term chunk until the bound holds.

    Ties go to the highest term id.
    """
    while not meets_record_count_bound(vp, params.k, params.m):
        supports = compute_supports(s for c in vp.record_chunks for s in c.subrecords)
        victim = min(supports, key=lambda t: (supports[t], -t))
        chunks = []
        for c in vp.record_chunks:
            if victim in c.domain:
                domain = c.domain - {victim}
                if not domain:
                    continue
                c = RecordChunk(domain, tuple(sorted(project(c.subrecords, domain))))
            chunks.append(c)
        vp = VerticalPartition(vp.size, tuple(chunks), vp.term_chunk | {victim})
    return vp


def verpart(cluster: RawCluster, params: Params) -> VerticalPartition:
    records = cluster.records
    supports = compute_supports(records)
    sensitive = params.sensitive_terms
    term_chunk = {t for t, s in supports.items() if s < params.k or t in sensitive}
    order = sorted((t for t in supports if t not in term_chunk), key=lambda t: (-supports[t], t))
    chunks = []
    for dom in greedy_domains(records, order, params.k, params.m):
        domain = frozenset(dom)
        chunks.append(RecordChunk(domain, tuple(sorted(project(records, domain)))))
    # empty while every ordered term has support >= k
    placed = set().union(*(c.domain for c in chunks))
    term_chunk.update(t for t in order if t not in placed)
    vp = VerticalPartition(len(records), tuple(chunks), frozenset(term_chunk))
    return enforce_record_count_bound(vp, params)

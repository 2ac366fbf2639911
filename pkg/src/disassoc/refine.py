"""Merging clusters into joint clusters that publish shared chunks."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import Params, Record, compute_supports, project
from .model import Joint, Leaf, Node, SharedChunk, VerticalPartition, chunk_terms, iter_leaves
from .vertical import can_extend, meets_record_count_bound

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MergeRecord:
    placed: tuple[int, ...]
    lhs: Fraction
    rhs: Fraction


def virtual_term_chunk(node: Node) -> set[int]:
    out: set[int] = set()
    for leaf in iter_leaves(node):
        out |= leaf.partition.term_chunk
    return out


def term_chunk_supports(forest: Iterable[Node]) -> Counter:
    """tcs(t): number of leaf term chunks containing t."""
    return Counter(t for n in forest for leaf in iter_leaves(n) for t in leaf.partition.term_chunk)


def cluster_order_key(node: Node, tcs: Counter, cache: "_NodeCache | None" = None) -> tuple:
    """Lexicographic key over the (virtual) term chunk, terms ranked by descending tcs.

    Empty term chunks sort last; equal chunks fall back to the smallest record position.
    """
    vtc, _, pos = (cache or _NodeCache()).get(node)
    terms = tuple(sorted((-tcs[t], t) for t in vtc))
    return (0 if terms else 1, terms, pos)


def _shared_bag(leaves: Sequence[Leaf], candidates: set[int]) -> list[Record]:
    bag: list[Record] = []
    for leaf in leaves:
        own = leaf.partition.term_chunk & candidates
        if own:
            if not leaf.records:
                raise ValueError("refining needs the original records of every leaf")
            bag.extend(project(leaf.records, own))
    return bag


class _Projection:
    """Counts of bag records projected onto a growing term set.

    Keys are term tuples in insertion order; records missing every term map to ().
    """

    def __init__(self, bag: Sequence[Record], k: int):
        self.k = k
        self.keys: list[tuple[int, ...]] = [()] * len(bag)
        self.counts: Counter = Counter({(): len(bag)})
        self.bad: set[tuple[int, ...]] = set()

    def _delta(self, idx: Sequence[int], t: int) -> Counter:
        delta: Counter = Counter()
        for i in idx:
            key = self.keys[i]
            delta[key] -= 1
            delta[key + (t,)] += 1
        return delta

    def k_anonymous_with(self, idx: Sequence[int], t: int) -> bool:
        delta = self._delta(idx, t)
        for key in set(delta) | self.bad:
            if key and 0 < self.counts[key] + delta[key] < self.k:
                return False
        return True

    def add(self, idx: Sequence[int], t: int) -> None:
        delta = self._delta(idx, t)
        for i in idx:
            self.keys[i] = self.keys[i] + (t,)
        self.counts.update(delta)
        for key in set(delta) | self.bad:
            c = self.counts[key]
            if key and 0 < c < self.k:
                self.bad.add(key)
            else:
                self.bad.discard(key)
                if c == 0:
                    del self.counts[key]


def build_shared_chunks(
    nodes: tuple[Node, Node], candidates: Iterable[int], params: Params,
    restricted: Iterable[int] | None = None,
) -> tuple[list[SharedChunk], set[int]]:
    """Greedily pack candidate refining terms into shared chunks for a prospective joint.

    A chunk whose domain meets the record/shared-chunk terms of the two nodes
    must be k-anonymous; otherwise k^m-anonymity suffices.
    """
    candidates = set(candidates)
    if not candidates:
        return [], set()
    k, m = params.k, params.m
    leaves = [leaf for n in nodes for leaf in iter_leaves(n)]
    bag = _shared_bag(leaves, candidates)
    supports = compute_supports(bag)
    if restricted is None:
        restricted = chunk_terms(nodes[0]) | chunk_terms(nodes[1])
    restricted = set(restricted)
    holders: dict[int, list[int]] = {t: [] for t in supports}
    for i, r in enumerate(bag):
        for t in r:
            holders[t].append(i)

    remaining = [t for t in sorted(supports, key=lambda t: (-supports[t], t)) if supports[t] >= k]
    domains: list[set[int]] = []
    while remaining:
        current: set[int] = set()
        proj = _Projection(bag, k)
        for t in remaining:
            if (current | {t}) & restricted:
                ok = proj.k_anonymous_with(holders[t], t)
            else:
                ok = can_extend([bag[i] for i in holders[t]], current, k, m)
            if ok:
                current.add(t)
                proj.add(holders[t], t)
        if not current:
            break
        domains.append(current)
        remaining = [t for t in remaining if t not in current]

    chunks = [SharedChunk(frozenset(d), tuple(sorted(project(bag, d))), bool(d & restricted))
              for d in domains]
    placed = set().union(*domains) if domains else set()
    return chunks, placed


def merge_ratios(placed: set[int], shared: Sequence[SharedChunk], leaves: Sequence[Leaf]) -> tuple[Fraction, Fraction]:
    """Left and right side of the merge criterion.

    Left: summed shared-chunk supports of the placed terms over the joint size.
    Right: placed terms per leaf term chunk, summed over the leaves holding any
    of them, over those leaves' total size.
    """
    joint_size = sum(leaf.size for leaf in leaves)
    s = sum(1 for c in shared for r in c.subrecords for t in r if t in placed)
    u = size = 0
    for leaf in leaves:
        n = len(leaf.partition.term_chunk & placed)
        if n:
            u += n
            size += leaf.size
    lhs = Fraction(s, joint_size)
    rhs = Fraction(u, size) if size else Fraction(0)
    return lhs, rhs


def eq1_check(placed: set[int], shared: Sequence[SharedChunk], leaves: Sequence[Leaf]) -> bool:
    lhs, rhs = merge_ratios(placed, shared, leaves)
    return lhs >= rhs


def _strip(node: Node, placed: set[int]) -> Node:
    if isinstance(node, Leaf):
        p = node.partition
        if not p.term_chunk & placed:
            return node
        vp = VerticalPartition(p.size, p.record_chunks, p.term_chunk - placed)
        return Leaf(vp, node.records, node.positions)
    return Joint(tuple(_strip(c, placed) for c in node.children), node.shared_chunks)


class _NodeCache:
    """Per-node virtual term chunk, chunk terms and first record position.

    Nodes are immutable, so entries keyed by identity stay valid; the cache
    holds a reference to each node to keep identities unique.
    """

    def __init__(self):
        self._info: dict[int, tuple[Node, frozenset, frozenset, int]] = {}

    def get(self, node: Node) -> tuple[frozenset, frozenset, int]:
        hit = self._info.get(id(node))
        if hit is not None:
            return hit[1:]
        if isinstance(node, Leaf):
            p = node.partition
            info = (p.term_chunk, p.chunk_domain(), min(node.positions, default=-1))
        else:
            parts = [self.get(c) for c in node.children]
            shared = frozenset().union(*(c.domain for c in node.shared_chunks))
            positions = [x[2] for x in parts if x[2] >= 0]
            info = (frozenset().union(*(x[0] for x in parts)),
                    frozenset().union(shared, *(x[1] for x in parts)),
                    min(positions, default=-1))
        self._info[id(node)] = (node,) + info
        return info


def try_merge(a: Node, b: Node, params: Params, merge_log: list | None = None,
              cache: _NodeCache | None = None) -> Joint | None:
    cache = cache or _NodeCache()
    (vtc_a, ct_a, _), (vtc_b, ct_b, _) = cache.get(a), cache.get(b)
    candidates = (vtc_a & vtc_b) - params.sensitive_terms
    if not candidates:
        return None
    shared, placed = build_shared_chunks((a, b), candidates, params, ct_a | ct_b)
    if not placed:
        return None
    leaves = list(iter_leaves(a)) + list(iter_leaves(b))
    lhs, rhs = merge_ratios(placed, shared, leaves)
    if lhs < rhs:
        return None
    for leaf in leaves:
        p = leaf.partition
        if p.term_chunk and p.term_chunk <= placed:
            emptied = VerticalPartition(p.size, p.record_chunks, frozenset())
            if not meets_record_count_bound(emptied, params.k, params.m):
                return None
    if merge_log is not None:
        merge_log.append(MergeRecord(tuple(sorted(placed)), lhs, rhs))
    return Joint((_strip(a, placed), _strip(b, placed)), tuple(shared))


def refine(forest: Sequence[Node], params: Params, merge_log: list | None = None) -> list[Node]:
    """Repeatedly join adjacent clusters (ordered by term-chunk contents) until nothing merges."""
    nodes = list(forest)
    cache = _NodeCache()
    failed: set[tuple[int, int]] = set()
    tcs = term_chunk_supports(nodes)
    merged_any = False
    passes = 0
    while True:
        passes += 1
        keys = [cluster_order_key(n, tcs, cache) for n in nodes]
        order = sorted(range(len(nodes)), key=lambda i: (keys[i], i))
        ordered = [nodes[i] for i in order]
        out: list[Node] = []
        changed = False
        i = 0
        while i < len(ordered):
            if i + 1 < len(ordered):
                pair = (id(ordered[i]), id(ordered[i + 1]))
                joint = None
                if pair not in failed:
                    joint = try_merge(ordered[i], ordered[i + 1], params, merge_log, cache)
                if joint is not None:
                    placed = frozenset().union(*(c.domain for c in joint.shared_chunks))
                    for n in ordered[i:i + 2]:
                        for leaf in iter_leaves(n):
                            tcs.subtract(leaf.partition.term_chunk & placed)
                    out.append(joint)
                    changed = True
                    i += 2
                    continue
                failed.add(pair)
            out.append(ordered[i])
            i += 1
        if not changed:
            break
        nodes = out
        merged_any = True
    log.debug("refine finished after %d passes, %d roots", passes, len(nodes))
    return nodes if merged_any else list(forest)

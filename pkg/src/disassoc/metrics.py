"""Information-loss measures: top-K itemset deviation, pair relative error, lost terms."""
from __future__ import annotations

import heapq
import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Dataset, Record, compute_supports
from .model import DisassociatedDataset, Leaf, iter_nodes
from .reconstruct import POLICIES, Reconstructor


@dataclass(frozen=True, order=True)
class Itemset:
    terms: tuple[int, ...]
    support: float


def _rank_key(it: Itemset) -> tuple:
    return (-it.support, len(it.terms), it.terms)


def _bitsets(records: Iterable[Record]) -> dict[int, int]:
    rows: dict[int, list[int]] = defaultdict(list)
    n = 0
    for n, r in enumerate(records, 1):
        for t in r:
            rows[t].append(n - 1)
    out = {}
    for t, idx in rows.items():
        mask = np.zeros(n, dtype=bool)
        mask[idx] = True
        out[t] = int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")
    return out


def mine_top_k(
    records: Sequence[Record],
    K: int,
    max_size: int = 4,
    extra_singletons: Mapping[int, int] | None = None,
    scale: float = 1.0,
) -> list[Itemset]:
    """The K most supported itemsets of size 1..max_size.

    Ordered by support (descending), then size, then term order. Supports are
    divided by ``scale``; ``extra_singletons`` adds counts to single terms only.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    bits = _bitsets(records)
    extra = extra_singletons or {}
    level: dict[tuple[int, ...], int] = {}
    found: list[tuple[tuple[int, ...], int]] = []
    for t in set(bits) | set(extra):
        b = bits.get(t, 0)
        s = b.bit_count() + extra.get(t, 0)
        if s >= 1:
            found.append(((t,), s))
            level[(t,)] = b
    single_support = dict(found)

    def threshold() -> int:
        if len(found) < K:
            return 1
        return heapq.nlargest(K, (s for _, s in found))[-1]

    support_of = {(t,): s for (t,), s in single_support.items()}
    size = 1
    while size < max_size and level:
        th = threshold()
        keep = sorted(x for x in level if support_of[x] >= th)
        keep_set = set(keep)
        by_prefix: dict[tuple[int, ...], list[tuple[int, ...]]] = defaultdict(list)
        for x in keep:
            by_prefix[x[:-1]].append(x)
        nxt: dict[tuple[int, ...], int] = {}
        for group in by_prefix.values():
            for a, b in combinations(group, 2):
                cand = a + (b[-1],)
                if size >= 2 and any(cand[:i] + cand[i + 1:] not in keep_set for i in range(size - 1)):
                    continue
                bb = level[a] & level[b]
                s = bb.bit_count()
                if s >= max(th, 1):
                    nxt[cand] = bb
                    support_of[cand] = s
                    found.append((cand, s))
        level = nxt
        size += 1
    items = [Itemset(t, s / scale if scale != 1.0 else s) for t, s in found]
    items.sort(key=_rank_key)
    return items[:K]


def tkd(orig_top: Sequence[Itemset], other_top: Sequence[Itemset]) -> float:
    if not orig_top:
        raise ValueError("orig_top must be non-empty")
    other = {it.terms for it in other_top}
    common = sum(1 for it in orig_top if it.terms in other)
    return 1.0 - common / len(orig_top)


def ranked_terms(supports: Mapping[int, float]) -> list[int]:
    return sorted(supports, key=lambda t: (-supports[t], t))


def pair_supports(records: Iterable[Record], terms: Iterable[int]) -> Counter:
    wanted = set(terms)
    out: Counter = Counter()
    for r in records:
        hit = [t for t in r if t in wanted]
        if len(hit) > 1:
            out.update(combinations(hit, 2))
    return out


def relative_error(orig_pairs: Mapping, other_pairs: Mapping, terms: Sequence[int], scale: float = 1.0) -> float:
    total = 0.0
    n = 0
    for a, b in combinations(sorted(terms), 2):
        so = orig_pairs.get((a, b), 0)
        sp = other_pairs.get((a, b), 0) / scale
        if so == 0 and sp == 0:
            continue
        n += 1
        if so == 0 or sp == 0:
            total += 2.0
        else:
            total += abs(so - sp) / ((so + sp) / 2)
    return total / n if n else 0.0


def pair_relative_error(orig: Dataset, other: Dataset, rank_range: tuple[int, int]) -> float:
    """Mean relative pair-support error over terms ranked [lo, hi) in ``orig``."""
    lo, hi = rank_range
    terms = ranked_terms(compute_supports(orig.records))[lo:hi]
    return relative_error(pair_supports(orig.records, terms), pair_supports(other.records, terms), terms)


def _chunk_bag(da: DisassociatedDataset) -> tuple[list[Record], Counter]:
    bag: list[Record] = []
    tc: Counter = Counter()
    for root in da.forest:
        for node in iter_nodes(root):
            if isinstance(node, Leaf):
                for c in node.partition.record_chunks:
                    bag.extend(c.subrecords)
                tc.update(node.partition.term_chunk)
            else:
                for c in node.shared_chunks:
                    bag.extend(c.subrecords)
    return bag, tc


def lower_bound_support(da: DisassociatedDataset, terms: Iterable[int]) -> int:
    """Support of ``terms`` counted from chunk subrecords only, plus one per
    term chunk holding the term when a single term is asked for."""
    s = frozenset(terms)
    if not s:
        raise ValueError("itemset must be non-empty")
    bag, tc = _chunk_bag(da)
    count = sum(1 for r in bag if s <= set(r))
    if len(s) == 1:
        count += tc[next(iter(s))]
    return count


def tlost(orig: Dataset, da: DisassociatedDataset, k: int) -> Fraction:
    """Share of terms with support above k that survive only in term chunks."""
    supports = compute_supports(orig.records)
    frequent = {t for t, s in supports.items() if s > k}
    if not frequent:
        return Fraction(0)
    published = set()
    for root in da.forest:
        for node in iter_nodes(root):
            if isinstance(node, Leaf):
                published |= node.partition.chunk_domain()
            else:
                for c in node.shared_chunks:
                    published |= c.domain
    return Fraction(len(frequent - published), len(frequent))


@dataclass(frozen=True)
class MetricsReport:
    tkd: float
    tkd_a: float
    re: float
    re_a: float
    tlost: float
    k: int
    m: int
    K: int
    pair_range: tuple[int, int]
    reconstructions: int

    def to_text(self) -> str:
        d = asdict(self)
        d["pair_range"] = f"{self.pair_range[0]}:{self.pair_range[1]}"
        return "".join(f"{key}={val}\n" for key, val in d.items())

    def to_json(self) -> str:
        d = asdict(self)
        d["pair_range"] = list(self.pair_range)
        return json.dumps(d)


def metrics_run(
    orig: Dataset,
    da: DisassociatedDataset,
    K: int = 1000,
    rank_range: tuple[int, int] = (200, 220),
    n_reconstructions: int = 1,
    seed: int = 0,
    max_size: int = 4,
    term_policy: str = "single",
) -> MetricsReport:
    """Compare ``orig`` with ``da``; ``da`` must share ``orig``'s term ids."""
    if n_reconstructions < 1:
        raise ValueError("n_reconstructions must be >= 1")
    orig_top = mine_top_k(orig.records, K, max_size)
    terms = ranked_terms(compute_supports(orig.records))[rank_range[0]:rank_range[1]]
    orig_pairs = pair_supports(orig.records, terms)

    if term_policy not in POLICIES:
        raise ValueError(f"term_policy must be one of {POLICIES}")
    sampler = Reconstructor(da)
    pooled: list[Record] = []
    for i in range(n_reconstructions):
        pooled.extend(sampler.sample(seed + i, term_policy).records)
    n = float(n_reconstructions)
    avg_top = mine_top_k(pooled, K, max_size, scale=n)
    re = relative_error(orig_pairs, pair_supports(pooled, terms), terms, scale=n)

    bag, tc = _chunk_bag(da)
    lb_top = mine_top_k(bag, K, max_size, extra_singletons=tc)
    re_a = relative_error(orig_pairs, pair_supports(bag, terms), terms)

    return MetricsReport(
        tkd=tkd(orig_top, avg_top),
        tkd_a=tkd(orig_top, lb_top),
        re=re,
        re_a=re_a,
        tlost=float(tlost(orig, da, da.k)),
        k=da.k,
        m=da.m,
        K=K,
        pair_range=tuple(rank_range),
        reconstructions=n_reconstructions,
    )

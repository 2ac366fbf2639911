"""Sampling and enumerating possible original datasets from a disassociated one."""
from __future__ import annotations

import random
from bisect import bisect_right
from collections import Counter
from itertools import accumulate, islice

from .core import Dataset, Record, project
from .model import DisassociatedDataset, Joint, Leaf, Node
from .worlds import check_limits, iter_reconstructions

POLICIES = ("single", "uniform")


class ReconstructionStuck(RuntimeError):
    pass


def _leaves(node: Node, out: list[Leaf]) -> None:
    if isinstance(node, Leaf):
        out.append(node)
    else:
        for c in node.children:
            _leaves(c, out)


class _Bin:
    """Leaves sharing one blocked pattern; slots drawn proportionally to leaf size."""

    def __init__(self, leaves: list[int], starts: list[int], sizes: list[int]):
        self.starts = [starts[i] for i in leaves]
        self.cum = list(accumulate(sizes[i] for i in leaves))
        self.total = self.cum[-1] if self.cum else 0

    def slot(self, x: int) -> int:
        li = bisect_right(self.cum, x)
        return self.starts[li] + x - (self.cum[li - 1] if li else 0)

    def slots(self) -> list[int]:
        out: list[int] = []
        prev = 0
        for st, c in zip(self.starts, self.cum):
            out.extend(range(st, st + c - prev))
            prev = c
        return out


class _Value:
    """One distinct subrecord of a shared chunk, its count and the bins that accept it."""

    __slots__ = ("sub", "need", "bins", "cum")

    def __init__(self, sub: Record, need: int, bins: list[_Bin]):
        self.sub = sub
        self.need = need
        self.bins = bins
        self.cum = list(accumulate(b.total for b in bins))

    @property
    def total(self) -> int:
        return self.cum[-1] if self.cum else 0

    def draw(self, x: int) -> int:
        bi = bisect_right(self.cum, x)
        return self.bins[bi].slot(x - (self.cum[bi - 1] if bi else 0))


class _RootPlan:
    """Everything about one root cluster that does not depend on the random draws.

    A leaf is eligible for a shared subrecord sharing no term with the leaf's
    own record-chunk domains or with shared domains of joints below the chunk.
    """

    def __init__(self, root: Node):
        leaves: list[Leaf] = []
        _leaves(root, leaves)
        self.sizes = [leaf.size for leaf in leaves]
        self.starts = list(accumulate([0] + self.sizes[:-1]))
        self.n = sum(self.sizes)
        self.term_chunks = [sorted(leaf.partition.term_chunk) for leaf in leaves]
        self.record_chunks: list[tuple[int, int, tuple[Record, ...]]] = []
        blocked: list[set[int]] = []
        chunk_id = 0
        for i, leaf in enumerate(leaves):
            own: set[int] = set()
            for c in leaf.partition.record_chunks:
                own |= c.domain
                self.record_chunks.append((i, chunk_id, c.subrecords))
                chunk_id += 1
            blocked.append(own)
        # per shared chunk: (chunk id, subrecords, free bin or None, values)
        self.shared: list[tuple[int, tuple[Record, ...], _Bin | None, list[_Value]]] = []
        counter = iter(range(len(leaves)))

        def walk(node: Node) -> list[int]:
            # post-order, so lower shared chunks are planned and blocked first
            nonlocal chunk_id
            if isinstance(node, Leaf):
                return [next(counter)]
            below = [i for c in node.children for i in walk(c)]
            mine = frozenset().union(*(c.domain for c in node.shared_chunks))
            by_pattern: dict[frozenset, list[int]] = {}
            for i in below:
                by_pattern.setdefault(frozenset(blocked[i] & mine), []).append(i)
            for c in node.shared_chunks:
                self.shared.append((chunk_id, c.subrecords) + self._plan(c, by_pattern))
                chunk_id += 1
            for i in below:
                blocked[i] |= mine
            return below

        walk(root)

    def _plan(self, chunk, by_pattern: dict[frozenset, list[int]]) -> tuple[_Bin | None, list[_Value]]:
        groups: dict[frozenset, list[int]] = {}
        for pattern, leaves in by_pattern.items():
            groups.setdefault(pattern & chunk.domain, []).extend(leaves)
        bins = [(pattern, _Bin(sorted(leaves), self.starts, self.sizes)) for pattern, leaves in groups.items()]
        if len(bins) == 1 and not bins[0][0]:
            # no leaf publishes any of these terms, so every slot accepts every subrecord
            return bins[0][1], []
        values = [_Value(sub, need, [b for pattern, b in bins if pattern.isdisjoint(sub)])
                  for sub, need in Counter(chunk.subrecords).items()]
        return None, values


def _place_values(content: list[set[int]], values: list[_Value], rng: random.Random) -> list | None:
    """One attempt to give each subrecord a distinct fitting slot; None on a dead end."""
    used: set[int] = set()
    plan = []
    # most constrained values first
    for v in sorted(values, key=lambda v: (v.total, rng.random())):
        total, sub = v.total, v.sub
        if v.need > total:
            return None
        for x in rng.sample(range(total), v.need):
            s = v.draw(x)
            if s in used or not content[s].isdisjoint(sub):
                s = None
                for _ in range(32):
                    t = v.draw(rng.randrange(total))
                    if t not in used and content[t].isdisjoint(sub):
                        s = t
                        break
                if s is None:
                    fitting = [t for b in v.bins for t in b.slots()
                               if t not in used and content[t].isdisjoint(sub)]
                    if not fitting:
                        return None
                    s = rng.choice(fitting)
            used.add(s)
            plan.append((s, sub))
    return plan


class Reconstructor:
    """Samples datasets consistent with ``da``; the per-cluster setup is done once.

    Each root cluster draws from its own generator seeded by (seed, root index).
    Term-chunk terms land in one random record of their leaf ("single"), and
    with the "uniform" policy additionally in each other record with
    probability 1/size.
    """

    def __init__(self, da: DisassociatedDataset):
        self.da = da
        self.plans = [_RootPlan(root) for root in da.forest]

    def sample(self, seed: int = 0, term_policy: str = "single") -> Dataset:
        if term_policy not in POLICIES:
            raise ValueError(f"term_policy must be one of {POLICIES}")
        records: list[Record] = []
        for idx, plan in enumerate(self.plans):
            rng = random.Random(f"{seed}:{idx}")
            records.extend(_sample_root(plan, rng, term_policy))
        return Dataset(tuple(records), self.da.dictionary)


def _sample_root(plan: _RootPlan, rng: random.Random, policy: str) -> list[Record]:
    content: list[set[int]] = [set() for _ in range(plan.n)]
    # parts remember (chunk id, subrecord) so a part can be moved to an empty record
    parts: list[list[tuple[int, Record]]] = [[] for _ in range(plan.n)]
    for leaf, cid, subs in plan.record_chunks:
        st = plan.starts[leaf]
        for sub, s in zip(subs, rng.sample(range(st, st + plan.sizes[leaf]), len(subs))):
            content[s].update(sub)
            parts[s].append((cid, sub))

    budget = 10 * plan.n
    for cid, subs, free, values in plan.shared:
        if free is not None:
            if len(subs) > free.total:
                raise ReconstructionStuck(f"shared chunk {cid} has more subrecords than records")
            for sub, x in zip(subs, rng.sample(range(free.total), len(subs))):
                s = free.slot(x)
                content[s].update(sub)
                parts[s].append((cid, sub))
            continue
        while True:
            if budget <= 0:
                raise ReconstructionStuck(f"could not place shared chunk {cid}")
            budget -= 1
            placed = _place_values(content, values, rng)
            if placed is not None:
                break
        for s, sub in placed:
            content[s].update(sub)
            parts[s].append((cid, sub))

    for st, size, tc in zip(plan.starts, plan.sizes, plan.term_chunks):
        span = range(st, st + size)
        for t in tc:
            home = rng.choice(span)
            content[home].add(t)
            if policy == "uniform":
                p = 1.0 / size
                for s in span:
                    if s != home and rng.random() < p:
                        content[s].add(t)
        for s in span:
            if content[s]:
                continue
            if tc:
                content[s].add(rng.choice(tc))
                continue
            # no padding terms: relocate a part from a slot holding several
            donors = [d for d in span if len(parts[d]) > 1]
            if not donors:
                raise ReconstructionStuck("empty record with nothing to relocate")
            d = rng.choice(donors)
            cid, sub = parts[d].pop(rng.randrange(len(parts[d])))
            content[d].difference_update(sub)
            content[s].update(sub)
            parts[s].append((cid, sub))
    return [tuple(sorted(c)) for c in content]


def reconstruct(da: DisassociatedDataset, seed: int = 0, term_policy: str = "single") -> Dataset:
    """Sample one dataset consistent with ``da``; see :class:`Reconstructor`."""
    if term_policy not in POLICIES:
        raise ValueError(f"term_policy must be one of {POLICIES}")
    return Reconstructor(da).sample(seed, term_policy)


def enumerate_reconstructions(node: Node, limit: int, max_records: int = 8,
                              max_terms: int = 10) -> list[tuple[Record, ...]]:
    check_limits(node, max_records, max_terms)
    return list(islice(iter_reconstructions(node), limit))


def _closure_root(root: Node, records: list[Record], where: str, out: list[str]) -> None:
    # every record term not published by its own leaf belongs to the deepest
    # joint above the leaf whose shared chunks hold it
    joints: list[tuple[str, Joint]] = []
    owners: dict[int, list[int]] = {}  # term -> joint indices, deepest first
    leaves: list[tuple[str, Leaf, frozenset[int]]] = []

    def walk(node: Node, path: str, above: frozenset[int]) -> None:
        if isinstance(node, Leaf):
            leaves.append((path, node, above))
            return
        j = len(joints)
        joints.append((path, node))
        for i, child in enumerate(node.children):
            walk(child, f"{path}.children[{i}]", above | {j})

    walk(root, where, frozenset())
    chunk_of: list[dict[int, int]] = []
    for j, (_, joint) in enumerate(joints):
        chunk_of.append({t: i for i, c in enumerate(joint.shared_chunks) for t in c.domain})
        for t in chunk_of[-1]:
            owners.setdefault(t, []).append(j)
    for lst in owners.values():
        lst.reverse()  # pre-order indices: descendants come later

    got: dict[tuple[int, int], list[Record]] = {}
    start = 0
    for path, leaf, above in leaves:
        mine = records[start:start + leaf.size]
        start += leaf.size
        own: set[int] = set()
        for i, c in enumerate(leaf.partition.record_chunks):
            own |= c.domain
            if sorted(project(mine, c.domain)) != sorted(c.subrecords):
                out.append(f"{path}.record_chunks[{i}]: projection differs from published subrecords")
        for r in mine:
            parts: dict[tuple[int, int], list[int]] = {}
            for t in r:
                if t in own:
                    continue
                for j in owners.get(t, ()):
                    if j in above:
                        parts.setdefault((j, chunk_of[j][t]), []).append(t)
                        break
            for key, p in parts.items():
                got.setdefault(key, []).append(tuple(p))
    for j, (path, joint) in enumerate(joints):
        for i, c in enumerate(joint.shared_chunks):
            if sorted(got.get((j, i), [])) != sorted(c.subrecords):
                out.append(f"{path}.shared_chunks[{i}]: projection differs from published subrecords")


def closure_violations(da: DisassociatedDataset, data: Dataset) -> list[str]:
    """Differences between a reconstruction and the chunks it was drawn from.

    ``data`` must list records root by root and leaf by leaf, as
    :func:`reconstruct` does.
    """
    out: list[str] = []
    records = list(data.records)
    if len(records) != da.size:
        out.append(f"{len(records)} records, published size {da.size}")
        return out
    for r in records:
        if not r:
            out.append("empty record")
        elif len(set(r)) != len(r):
            out.append(f"duplicate term in record {r}")
    start = 0
    for i, root in enumerate(da.forest):
        _closure_root(root, records[start:start + root.size], f"forest[{i}]", out)
        start += root.size
    return out

"""Exhaustive enumeration of the datasets a small disassociated node can stand for.

A reconstruction assigns every subrecord of a record chunk to a distinct slot
of its leaf, and every subrecord of a shared chunk to a distinct slot of some
leaf under the joint. Slots are sets, so no slot may receive a term twice, and
a leaf never receives a shared subrecord holding a term that the leaf (or a
joint between it and the shared chunk) publishes in a chunk of its own: those
occurrences are already accounted for there. Term-chunk terms pad slots of
their own leaf freely but must each be used at least once, and every slot must
end up non-empty.

Slots within one leaf are interchangeable, so states are kept as per-leaf
multisets of slot contents; this keeps the search small enough for nodes of
about eight records.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator

from .core import Record
from .model import Joint, Leaf, Node, node_domain

Slot = frozenset
State = tuple[tuple[frozenset, ...], ...]


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class _Task:
    scope: tuple[int, ...]
    blocked: tuple[frozenset, ...]  # per scope leaf
    values: tuple[tuple[frozenset, int], ...]  # distinct subrecord, multiplicity


@dataclass(frozen=True)
class Layout:
    leaves: tuple[Leaf, ...]
    tasks: tuple[_Task, ...]

    @property
    def size(self) -> int:
        return sum(leaf.size for leaf in self.leaves)


def _values(subrecords) -> tuple[tuple[frozenset, int], ...]:
    c = Counter(frozenset(s) for s in subrecords)
    return tuple(sorted(c.items(), key=lambda kv: (sorted(kv[0]), kv[1])))


def layout(node: Node) -> Layout:
    leaves: list[Leaf] = []
    tasks: list[_Task] = []

    def walk(n: Node) -> list[tuple[int, frozenset]]:
        # returns (leaf index, terms blocked for shared chunks above) for every leaf under n
        if isinstance(n, Leaf):
            idx = len(leaves)
            leaves.append(n)
            own = frozenset().union(*(c.domain for c in n.partition.record_chunks))
            for c in n.partition.record_chunks:
                tasks.append(_Task((idx,), (frozenset(),), _values(c.subrecords)))
            return [(idx, own)]
        below = [x for c in n.children for x in walk(c)]
        for c in n.shared_chunks:
            tasks.append(_Task(tuple(i for i, _ in below), tuple(b for _, b in below),
                               _values(c.subrecords)))
        mine = frozenset().union(*(c.domain for c in n.shared_chunks))
        return [(i, b | mine) for i, b in below]

    walk(node)
    return Layout(tuple(leaves), tuple(tasks))


def _compositions(total: int, caps: list[int]) -> Iterator[tuple[int, ...]]:
    if not caps:
        if total == 0:
            yield ()
        return
    rest = sum(caps[1:])
    for take in range(max(0, total - rest), min(total, caps[0]) + 1):
        for tail in _compositions(total - take, caps[1:]):
            yield (take,) + tail


def _place(leaf_slots: list[Counter], task: _Task, vi: int) -> Iterator[list[Counter]]:
    """Place distinct subrecord values vi.. of the task; slot keys are (content, used)."""
    if vi == len(task.values):
        yield leaf_slots
        return
    value, mult = task.values[vi]
    classes = []
    for pos, leaf in enumerate(task.scope):
        if value & task.blocked[pos]:
            continue
        for (content, used), cnt in sorted(leaf_slots[leaf].items(), key=lambda kv: (sorted(kv[0][0]), kv[0][1])):
            if not used and not (content & value):
                classes.append((leaf, content, cnt))
    for takes in _compositions(mult, [c[2] for c in classes]):
        nxt = list(leaf_slots)
        for (leaf, content, _), take in zip(classes, takes):
            if not take:
                continue
            cur = Counter(nxt[leaf]) if nxt[leaf] is leaf_slots[leaf] else nxt[leaf]
            cur[(content, False)] -= take
            if not cur[(content, False)]:
                del cur[(content, False)]
            cur[(content | value, True)] += take
            nxt[leaf] = cur
        yield from _place(nxt, task, vi + 1)


def _canon(leaf_slots: list[Counter]) -> State:
    return tuple(
        tuple(sorted((content for (content, _), cnt in c.items() for _ in range(cnt)), key=sorted))
        for c in leaf_slots
    )


def chunk_states(lay: Layout) -> list[State]:
    """All distinct slot contents after placing every record and shared chunk."""
    start = tuple((frozenset(),) * leaf.size for leaf in lay.leaves)
    states = {start}
    for task in lay.tasks:
        nxt = set()
        for st in states:
            slots = [Counter((c, False) for c in leaf) for leaf in st]
            for placed in _place(slots, task, 0):
                nxt.add(_canon(placed))
        states = nxt
    valid = []
    for st in states:
        ok = all(leaf.partition.term_chunk or all(st[i]) for i, leaf in enumerate(lay.leaves))
        if ok:
            valid.append(st)
    return sorted(valid, key=lambda st: [[sorted(s) for s in leaf] for leaf in st])


def check_limits(node: Node, max_records: int, max_terms: int) -> None:
    size = node.size
    n_terms = len(node_domain(node))
    if size > max_records or n_terms > max_terms:
        raise TooLarge(f"node with {size} records and {n_terms} terms exceeds "
                       f"limits ({max_records} records, {max_terms} terms)")


def _support(slots, tc: frozenset, s: frozenset) -> int:
    return sum(1 for content in slots if s <= content | tc)


def max_support_per_set(node: Node, m: int, cap: int | None = None) -> dict[tuple[int, ...], int] | None:
    """For every term set of size <= m that some reconstruction contains, the
    largest number of records containing it over all valid reconstructions.

    With ``cap`` set, values at or above it are only known to be >= cap, which
    lets the search stop early. None when the node admits no valid
    reconstruction at all.
    """
    lay = layout(node)
    tasks = lay.tasks
    tcs = [leaf.partition.term_chunk for leaf in lay.leaves]
    domain = sorted(node_domain(node))
    sets = [frozenset(c) for size in range(1, m + 1) for c in combinations(domain, size)]
    # reach[i][t]: leaves that tasks i.. can still hand t to; left[i][t]: how many times
    reach: list[dict[int, set[int]]] = [{} for _ in range(len(tasks) + 1)]
    left: list[Counter] = [Counter() for _ in range(len(tasks) + 1)]
    for i in range(len(tasks) - 1, -1, -1):
        reach[i] = {t: set(v) for t, v in reach[i + 1].items()}
        left[i] = Counter(left[i + 1])
        task = tasks[i]
        for value, mult in task.values:
            for t in value:
                left[i][t] += mult
                reach[i].setdefault(t, set()).update(
                    leaf for leaf, b in zip(task.scope, task.blocked) if t not in b)

    def bound(s: frozenset, st: State, i: int) -> int:
        full = partial = 0
        missing: Counter = Counter()
        for leaf, slots in enumerate(st):
            for content in slots:
                miss = s - content - tcs[leaf]
                if not miss:
                    full += 1
                elif all(leaf in reach[i].get(t, ()) for t in miss):
                    partial += 1
                    missing.update(miss)
        # each occurrence still to come completes at most one slot
        excess = max((n - left[i][t] for t, n in missing.items()), default=0)
        return full + partial - max(0, excess)

    best = dict.fromkeys(sets, 0)
    goal = cap if cap is not None else lay.size
    found = False
    seen: set = set()

    def settled(st: State, i: int) -> bool:
        return all(best[s] >= goal or bound(s, st, i) <= best[s] for s in sets)

    def dfs(i: int, st: State) -> None:
        nonlocal found
        if (i, st) in seen:
            return
        seen.add((i, st))
        if i == len(tasks):
            if all(tcs[j] or all(slots) for j, slots in enumerate(st)):
                found = True
                for s in sets:
                    c = _support(st[0], tcs[0], s) if len(st) == 1 else sum(
                        _support(slots, tcs[j], s) for j, slots in enumerate(st))
                    if c > best[s]:
                        best[s] = c
            return
        if found and settled(st, i):
            return
        slots = [Counter((c, False) for c in leaf) for leaf in st]
        for placed in _place(slots, tasks[i], 0):
            dfs(i + 1, _canon(placed))

    dfs(0, tuple((frozenset(),) * leaf.size for leaf in lay.leaves))
    if not found:
        return None
    return {tuple(sorted(s)): c for s, c in best.items() if c > 0}


def iter_reconstructions(node: Node) -> Iterator[tuple[Record, ...]]:
    """Distinct valid reconstructions of ``node`` in a fixed order."""
    lay = layout(node)
    seen = set()
    for st in chunk_states(lay):
        per_leaf_options = []
        for leaf, slots in zip(lay.leaves, st):
            tc = sorted(leaf.partition.term_chunk)
            n = len(slots)
            masks = range(1, 2 ** n)
            options = []
            for choice in product(masks, repeat=len(tc)):
                recs = [set(s) for s in slots]
                for t, mask in zip(tc, choice):
                    for j in range(n):
                        if mask >> j & 1:
                            recs[j].add(t)
                if all(recs):
                    options.append(tuple(sorted(tuple(sorted(r)) for r in recs)))
            per_leaf_options.append(list(dict.fromkeys(options)))
        for combo in product(*per_leaf_options):
            data = tuple(sorted(r for recs in combo for r in recs))
            if data not in seen:
                seen.add(data)
                yield data

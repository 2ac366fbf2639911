"""Published structure of a disassociated dataset and its JSON file format."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union

from .core import Record, TermDictionary


class MalformedFile(ValueError):
    pass


@dataclass(frozen=True)
class RecordChunk:
    domain: frozenset[int]
    subrecords: tuple[Record, ...]


@dataclass(frozen=True)
class SharedChunk:
    domain: frozenset[int]
    subrecords: tuple[Record, ...]
    strict_k: bool = False


@dataclass(frozen=True)
class VerticalPartition:
    size: int
    record_chunks: tuple[RecordChunk, ...]
    term_chunk: frozenset[int]

    @property
    def n_subrecords(self) -> int:
        return sum(len(c.subrecords) for c in self.record_chunks)

    def chunk_domain(self) -> frozenset[int]:
        return frozenset().union(*(c.domain for c in self.record_chunks))

    def domain(self) -> frozenset[int]:
        return self.chunk_domain() | self.term_chunk


@dataclass(frozen=True)
class Leaf:
    partition: VerticalPartition
    # original records and their dataset positions; kept in memory, never published
    records: tuple[Record, ...] = ()
    positions: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return self.partition.size


@dataclass(frozen=True)
class Joint:
    children: tuple["Node", ...]
    shared_chunks: tuple[SharedChunk, ...]

    @cached_property
    def size(self) -> int:
        return sum(c.size for c in self.children)


Node = Union[Leaf, Joint]


def iter_leaves(node: Node) -> Iterator[Leaf]:
    if isinstance(node, Leaf):
        yield node
    else:
        for c in node.children:
            yield from iter_leaves(c)


def iter_nodes(node: Node) -> Iterator[Node]:
    yield node
    if isinstance(node, Joint):
        for c in node.children:
            yield from iter_nodes(c)


def chunk_terms(node: Node) -> set[int]:
    """Terms in record chunks and shared chunks anywhere under ``node``."""
    out: set[int] = set()
    for n in iter_nodes(node):
        if isinstance(n, Leaf):
            for c in n.partition.record_chunks:
                out |= c.domain
        else:
            for c in n.shared_chunks:
                out |= c.domain
    return out


def node_domain(node: Node) -> set[int]:
    out = chunk_terms(node)
    for leaf in iter_leaves(node):
        out |= leaf.partition.term_chunk
    return out


@dataclass(frozen=True)
class DisassociatedDataset:
    k: int
    m: int
    dictionary: TermDictionary
    forest: tuple[Node, ...]

    @property
    def size(self) -> int:
        return sum(n.size for n in self.forest)

    def leaves(self) -> list[Leaf]:
        return [leaf for n in self.forest for leaf in iter_leaves(n)]

    def remap(self, target: TermDictionary) -> "DisassociatedDataset":
        """Re-express term ids in ``target``'s id space (matched by token)."""
        mapping = {i: target.index[tok] for i, tok in enumerate(self.dictionary.tokens)}
        return DisassociatedDataset(self.k, self.m, target,
                                    tuple(_remap_node(n, mapping) for n in self.forest))


def _remap_records(subs, mapping):
    return tuple(sorted(tuple(sorted(mapping[t] for t in s)) for s in subs))


def _remap_node(node: Node, mapping: dict[int, int]) -> Node:
    if isinstance(node, Leaf):
        p = node.partition
        chunks = tuple(RecordChunk(frozenset(mapping[t] for t in c.domain),
                                   _remap_records(c.subrecords, mapping))
                       for c in p.record_chunks)
        return Leaf(VerticalPartition(p.size, chunks, frozenset(mapping[t] for t in p.term_chunk)))
    return Joint(tuple(_remap_node(c, mapping) for c in node.children),
                 tuple(SharedChunk(frozenset(mapping[t] for t in c.domain),
                                   _remap_records(c.subrecords, mapping), c.strict_k)
                       for c in node.shared_chunks))


# -- JSON ------------------------------------------------------------------

def _subs_out(subs, rng):
    subs = [list(s) for s in subs]
    if rng is not None:
        rng.shuffle(subs)
    return subs


def _node_to_obj(node: Node, rng) -> dict:
    if isinstance(node, Leaf):
        p = node.partition
        return {
            "type": "leaf",
            "size": p.size,
            "record_chunks": [{"domain": sorted(c.domain), "subrecords": _subs_out(c.subrecords, rng)}
                              for c in p.record_chunks],
            "term_chunk": sorted(p.term_chunk),
        }
    return {
        "type": "joint",
        "children": [_node_to_obj(c, rng) for c in node.children],
        "shared_chunks": [{"domain": sorted(c.domain), "subrecords": _subs_out(c.subrecords, rng),
                           "strict_k": c.strict_k} for c in node.shared_chunks],
    }


def to_json(da: DisassociatedDataset, shuffle_seed: int | None = None) -> str:
    """Serialize; subrecords stay content-sorted unless ``shuffle_seed`` is given."""
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    obj = {
        "k": da.k,
        "m": da.m,
        "dictionary": list(da.dictionary.tokens),
        "forest": [_node_to_obj(n, rng) for n in da.forest],
    }
    return json.dumps(obj, separators=(",", ":")) + "\n"


def _ids(val, n_terms: int, what: str) -> tuple[int, ...]:
    if not isinstance(val, list) or not all(isinstance(t, int) and not isinstance(t, bool) for t in val):
        raise MalformedFile(f"{what}: expected a list of term ids")
    if any(t < 0 or t >= n_terms for t in val):
        raise MalformedFile(f"{what}: term id out of range")
    if len(set(val)) != len(val):
        raise MalformedFile(f"{what}: repeated term id")
    return tuple(sorted(val))


def _chunk_body(obj, n_terms, what):
    if not isinstance(obj, dict):
        raise MalformedFile(f"{what}: expected an object")
    domain = frozenset(_ids(obj.get("domain"), n_terms, what + ".domain"))
    subs = obj.get("subrecords")
    if not isinstance(subs, list):
        raise MalformedFile(f"{what}.subrecords: expected a list")
    subrecords = tuple(sorted(_ids(s, n_terms, what + ".subrecords") for s in subs))
    return domain, subrecords


def _node_from_obj(obj, n_terms: int, where: str) -> Node:
    if not isinstance(obj, dict):
        raise MalformedFile(f"{where}: expected an object")
    kind = obj.get("type")
    if kind == "leaf":
        size = obj.get("size")
        if not isinstance(size, int) or isinstance(size, bool) or size < 1:
            raise MalformedFile(f"{where}.size: expected a positive integer")
        chunks = obj.get("record_chunks")
        if not isinstance(chunks, list):
            raise MalformedFile(f"{where}.record_chunks: expected a list")
        rcs = []
        for i, c in enumerate(chunks):
            domain, subs = _chunk_body(c, n_terms, f"{where}.record_chunks[{i}]")
            rcs.append(RecordChunk(domain, subs))
        tc = frozenset(_ids(obj.get("term_chunk"), n_terms, f"{where}.term_chunk"))
        return Leaf(VerticalPartition(size, tuple(rcs), tc))
    if kind == "joint":
        children = obj.get("children")
        if not isinstance(children, list) or not children:
            raise MalformedFile(f"{where}.children: expected a non-empty list")
        kids = tuple(_node_from_obj(c, n_terms, f"{where}.children[{i}]") for i, c in enumerate(children))
        shared = obj.get("shared_chunks")
        if not isinstance(shared, list):
            raise MalformedFile(f"{where}.shared_chunks: expected a list")
        scs = []
        for i, c in enumerate(shared):
            domain, subs = _chunk_body(c, n_terms, f"{where}.shared_chunks[{i}]")
            strict = c.get("strict_k", False)
            if not isinstance(strict, bool):
                raise MalformedFile(f"{where}.shared_chunks[{i}].strict_k: expected a boolean")
            scs.append(SharedChunk(domain, subs, strict))
        return Joint(kids, tuple(scs))
    raise MalformedFile(f"{where}.type: expected 'leaf' or 'joint'")


def from_json(text: str) -> DisassociatedDataset:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedFile(f"invalid JSON: {e}") from None
    if not isinstance(obj, dict):
        raise MalformedFile("top level: expected an object")
    k, m = obj.get("k"), obj.get("m")
    if not isinstance(k, int) or not isinstance(m, int) or k < 1 or m < 1:
        raise MalformedFile("k and m must be positive integers")
    tokens = obj.get("dictionary")
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise MalformedFile("dictionary: expected a list of strings")
    try:
        dictionary = TermDictionary(tuple(tokens))
    except ValueError as e:
        raise MalformedFile(f"dictionary: {e}") from None
    forest = obj.get("forest")
    if not isinstance(forest, list):
        raise MalformedFile("forest: expected a list")
    nodes = tuple(_node_from_obj(n, len(tokens), f"forest[{i}]") for i, n in enumerate(forest))
    return DisassociatedDataset(k, m, dictionary, nodes)

"""Datasets of set-valued records, support counting and a synthetic generator."""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import chain
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

Record = tuple[int, ...]


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class TermDictionary:
    tokens: tuple[str, ...]
    index: dict[str, int] = field(compare=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.index:
            object.__setattr__(self, "index", {tok: i for i, tok in enumerate(self.tokens)})
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate token in dictionary")

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self.index[token]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.tokens[i] for i in ids]


@dataclass(frozen=True)
class Dataset:
    records: tuple[Record, ...]
    dictionary: TermDictionary

    def __len__(self) -> int:
        return len(self.records)

    def __post_init__(self):
        n = len(self.dictionary)
        for r in self.records:
            if r and (r[0] < 0 or r[-1] >= n):
                raise ValueError(f"record {r} references a term outside the dictionary")

    @classmethod
    def from_token_records(cls, rows: Iterable[Iterable[str]]) -> "Dataset":
        """Build a dataset, assigning term ids in first-appearance order."""
        index: dict[str, int] = {}
        tokens: list[str] = []
        records = []
        for row in rows:
            ids = set()
            for tok in row:
                tid = index.get(tok)
                if tid is None:
                    tid = index[tok] = len(tokens)
                    tokens.append(tok)
                ids.add(tid)
            records.append(tuple(sorted(ids)))
        return cls(tuple(records), TermDictionary(tuple(tokens), index))

    def token_records(self) -> list[list[str]]:
        return [self.dictionary.decode(r) for r in self.records]

    def terms(self) -> set[int]:
        return set(chain.from_iterable(self.records))


@dataclass(frozen=True)
class Params:
    k: int
    m: int
    max_cluster_size: int = 30
    seed: int = 0
    refine: bool = True
    sensitive_terms: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.max_cluster_size < self.k:
            raise ValueError("max_cluster_size must be >= k")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "sensitive_terms", frozenset(self.sensitive_terms))


@dataclass(frozen=True)
class ParseStats:
    duplicates_dropped: int = 0
    lines_skipped: int = 0


def parse_dataset_stats(text: str) -> tuple[Dataset, ParseStats]:
    dups = skipped = 0
    rows = []
    for line in text.splitlines():
        if not line:
            continue
        toks = line.split()
        if not toks:
            skipped += 1
            continue
        dups += len(toks) - len(set(toks))
        rows.append(toks)
    if not rows:
        raise EmptyDataset("input contains no records")
    if dups:
        log.warning("dropped %d duplicate tokens", dups)
    if skipped:
        log.warning("skipped %d blank lines", skipped)
    return Dataset.from_token_records(rows), ParseStats(dups, skipped)


def parse_dataset(text: str) -> Dataset:
    return parse_dataset_stats(text)[0]


def serialize_dataset(data: Dataset) -> str:
    toks = data.dictionary.tokens
    return "".join(" ".join(toks[t] for t in r) + "\n" for r in data.records)


def compute_supports(records: Iterable[Iterable[int]]) -> Counter:
    """Number of records containing each term."""
    return Counter(chain.from_iterable(records))


def zipf_weights(n: int, exponent: float = 1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1, dtype=float) ** exponent
    return w / w.sum()


def generate_synthetic(n_records: int, domain_size: int, avg_len: float, seed: int = 0) -> Dataset:
    """Zipf(1.0) term popularity, Poisson(avg_len) record lengths clamped to [1, domain_size].

    Terms inside a record are drawn without replacement (successive sampling),
    implemented as the first distinct values of a with-replacement stream.
    """
    if n_records < 1 or domain_size < 1 or avg_len < 1:
        raise ValueError("n_records, domain_size and avg_len must be >= 1")
    rng = np.random.default_rng(seed)
    lengths = np.clip(rng.poisson(avg_len, size=n_records), 1, domain_size)
    cdf = np.cumsum(zipf_weights(domain_size))
    cdf[-1] = 1.0

    def draw(size: int) -> np.ndarray:
        return np.searchsorted(cdf, rng.random(size), side="right")

    pool = draw(int(lengths.sum() * 2) + 64).tolist()
    pos = 0
    rows = []
    for length in lengths.tolist():
        chosen: dict[int, None] = {}
        while len(chosen) < length:
            if pos >= len(pool):
                pool = draw(4 * length + 64).tolist()
                pos = 0
            chosen[pool[pos]] = None
            pos += 1
        rows.append([f"t{i}" for i in chosen])
    return Dataset.from_token_records(rows)


def project(records: Sequence[Record], domain: frozenset[int] | set[int]) -> list[Record]:
    """Non-empty projections of records onto a term set."""
    out = []
    for r in records:
        p = tuple(t for t in r if t in domain)
        if p:
            out.append(p)
    return out

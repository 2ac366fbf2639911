"""Independent audit of a disassociated dataset and a brute-force guarantee oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

from .model import DisassociatedDataset, Joint, Leaf, Node, chunk_terms, iter_leaves
from .vertical import is_k_anonymous, is_km_anonymous, record_count_bound
from .worlds import TooLarge, check_limits, max_support_per_set

KINDS = ("ChunkKm", "ChunkK", "Lemma2Bound", "Property1", "DomainOverlap", "DomainCoverage")


@dataclass(frozen=True)
class Violation:
    location: str
    kind: str
    detail: str


@dataclass
class AuditReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def _coverage(where: str, domain, subrecords, limit: int) -> Iterator[Violation]:
    used = set()
    for s in subrecords:
        if not s:
            yield Violation(where, "DomainCoverage", "empty subrecord")
        if not set(s) <= domain:
            yield Violation(where, "DomainCoverage", f"subrecord {list(s)} leaves the chunk domain")
        used.update(s)
    if len(subrecords) > limit:
        yield Violation(where, "DomainCoverage", f"{len(subrecords)} subrecords for {limit} records")
    unused = domain - used
    if unused:
        yield Violation(where, "DomainCoverage", f"domain terms {sorted(unused)} never occur")


def _overlaps(where: str, named: list[tuple[str, frozenset]]) -> Iterator[Violation]:
    for (na, a), (nb, b) in combinations(named, 2):
        common = a & b
        if common:
            yield Violation(where, "DomainOverlap", f"{na} and {nb} share {sorted(common)}")


def _audit_leaf(leaf: Leaf, where: str, k: int, m: int) -> Iterator[Violation]:
    p = leaf.partition
    named = []
    n_sub = 0
    for i, c in enumerate(p.record_chunks):
        loc = f"{where}.record_chunks[{i}]"
        yield from _coverage(loc, c.domain, c.subrecords, p.size)
        if not is_km_anonymous(c.subrecords, k, m):
            yield Violation(loc, "ChunkKm", f"not {k}^{m}-anonymous")
        named.append((f"record_chunks[{i}]", c.domain))
        n_sub += sum(1 for s in c.subrecords if s)
    named.append(("term_chunk", p.term_chunk))
    yield from _overlaps(where, named)
    if not p.term_chunk:
        need = record_count_bound(p.size, len(p.record_chunks), k, m)
        if n_sub < need:
            yield Violation(where, "Lemma2Bound",
                            f"{n_sub} subrecords < {need} needed for {p.size} records and empty term chunk")


def _audit_joint(node: Joint, where: str, k: int, m: int) -> Iterator[Violation]:
    restricted = set()
    for child in node.children:
        restricted |= chunk_terms(child)
    size = node.size
    named = []
    for i, c in enumerate(node.shared_chunks):
        loc = f"{where}.shared_chunks[{i}]"
        yield from _coverage(loc, c.domain, c.subrecords, size)
        named.append((f"shared_chunks[{i}]", c.domain))
        if c.domain & restricted:
            if not is_k_anonymous(c.subrecords, k):
                yield Violation(loc, "Property1",
                                f"domain meets record/shared-chunk terms {sorted(c.domain & restricted)} "
                                f"but chunk is not {k}-anonymous")
        elif not is_km_anonymous(c.subrecords, k, m):
            yield Violation(loc, "ChunkKm", f"not {k}^{m}-anonymous")
        if c.strict_k and not is_k_anonymous(c.subrecords, k):
            yield Violation(loc, "ChunkK", f"declared k-anonymous but is not {k}-anonymous")
    yield from _overlaps(where, named)
    shared = frozenset().union(*(c.domain for c in node.shared_chunks))
    for leaf in (l for child in node.children for l in iter_leaves(child)):
        common = leaf.partition.term_chunk & shared
        if common:
            yield Violation(where, "DomainOverlap", f"shared terms {sorted(common)} also in a descendant term chunk")


def _walk(node: Node, where: str, k: int, m: int) -> Iterator[Violation]:
    if isinstance(node, Leaf):
        yield from _audit_leaf(node, where, k, m)
    else:
        yield from _audit_joint(node, where, k, m)
        for i, c in enumerate(node.children):
            yield from _walk(c, f"{where}.children[{i}]", k, m)


def audit_node(node: Node, k: int, m: int, where: str = "node") -> AuditReport:
    return AuditReport(list(_walk(node, where, k, m)))


def audit(da: DisassociatedDataset) -> AuditReport:
    """Recheck every anonymity condition from raw chunk contents.

    Nothing recorded by the anonymizer (strict flags, sizes of joints) is trusted.
    """
    report = AuditReport()
    for i, node in enumerate(da.forest):
        report.violations.extend(_walk(node, f"forest[{i}]", da.k, da.m))
    return report


def brute_force_guarantee(node: Node, k: int, m: int, max_records: int = 8, max_terms: int = 10) -> bool:
    """True iff every set S of at most m terms either occurs in no valid
    reconstruction or occurs in at least k records of some valid reconstruction."""
    check_limits(node, max_records, max_terms)
    best = max_support_per_set(node, m, cap=k)
    return best is not None and all(c >= k for c in best.values())


def guarantee_failures(node: Node, k: int, m: int, max_records: int = 8, max_terms: int = 10) -> dict:
    """Term sets that break the guarantee, with their best achievable support."""
    check_limits(node, max_records, max_terms)
    best = max_support_per_set(node, m, cap=k)
    if best is None:
        return {(): 0}
    return {s: c for s, c in best.items() if c < k}


__all__ = ["AuditReport", "Violation", "TooLarge", "audit", "audit_node",
           "brute_force_guarantee", "guarantee_failures"]

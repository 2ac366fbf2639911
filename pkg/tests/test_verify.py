import json

import pytest

from disassoc.anonymize import anonymize, anonymize_clusters
from disassoc.core import Params
from disassoc.model import (
    DisassociatedDataset, Leaf, MalformedFile, RecordChunk, VerticalPartition, from_json, to_json,
)
from disassoc.verify import TooLarge, audit, audit_node, brute_force_guarantee, guarantee_failures
from disassoc.vertical import enforce_record_count_bound


def test_short_chunks_leaf_is_caught(short_chunks_leaf):
    assert audit_node(short_chunks_leaf, 3, 2).kinds() == {"Lemma2Bound"}
    assert not brute_force_guarantee(short_chunks_leaf, 3, 2)
    assert (0, 1) in guarantee_failures(short_chunks_leaf, 3, 2)
    fixed = Leaf(enforce_record_count_bound(short_chunks_leaf.partition, Params(3, 2, 5)))
    assert audit_node(fixed, 3, 2).passed
    assert brute_force_guarantee(fixed, 3, 2)


def test_shared_chunk_reusing_record_terms(leaky_joint):
    assert "Property1" in audit_node(leaky_joint, 3, 2).kinds()
    fails = guarantee_failures(leaky_joint, 3, 2)
    assert fails.get((1, 3)) == 1


def test_fig2_pipeline_passes(fig2a, fig2a_halves):
    for refine in (True, False):
        da = anonymize_clusters(fig2a.dictionary, fig2a_halves, Params(3, 2, 5, refine=refine))
        assert audit(da).passed
        for root in da.forest:
            assert brute_force_guarantee(root, 3, 2, max_records=10, max_terms=12)


def test_oracle_refuses_large_nodes(fig2a):
    da = anonymize(fig2a, Params(3, 2, 6))
    big = max(da.forest, key=lambda n: n.size)
    with pytest.raises(TooLarge):
        brute_force_guarantee(big, 3, 2, max_records=3)


@pytest.mark.parametrize("subs,kind", [
    (((1,),) * 2, "ChunkKm"),
    (((1,),) * 3 + ((),), "DomainCoverage"),
    (((1, 2),) * 3, "DomainCoverage"),
])
def test_tampered_chunks(subs, kind):
    leaf = Leaf(VerticalPartition(4, (RecordChunk(frozenset({1}), subs),), frozenset({7})))
    assert kind in audit_node(leaf, 3, 2).kinds()


def test_overlapping_domains():
    leaf = Leaf(VerticalPartition(3, (RecordChunk(frozenset({1}), ((1,),) * 3),), frozenset({1})))
    assert "DomainOverlap" in audit_node(leaf, 3, 2).kinds()


def test_no_valid_reconstruction_fails_oracle():
    # three records, only two subrecords, nothing to pad with
    leaf = Leaf(VerticalPartition(3, (RecordChunk(frozenset({1}), ((1,),) * 2),), frozenset()))
    assert not brute_force_guarantee(leaf, 2, 2)


def test_json_roundtrip(fig2a):
    da = anonymize(fig2a, Params(3, 2, 6))
    text = to_json(da)
    again = from_json(text)
    assert to_json(again) == text
    assert audit(again).passed
    obj = json.loads(text)
    assert set(obj) == {"k", "m", "dictionary", "forest"}


def test_shuffle_changes_order_only(fig2a):
    da = anonymize(fig2a, Params(3, 2, 6))
    shuffled = to_json(da, shuffle_seed=1)
    assert shuffled == to_json(da, shuffle_seed=1)
    assert to_json(from_json(shuffled)) == to_json(da)


@pytest.mark.parametrize("text", [
    "not json",
    '{"k": 3, "m": 2, "dictionary": ["a"]}',
    '{"k": 3, "m": 2, "dictionary": ["a"], "forest": [{"type": "leaf", "size": 1, "record_chunks": [], "term_chunk": [4]}]}',
    '{"k": 3, "m": 2, "dictionary": ["a"], "forest": [{"type": "tree"}]}',
    '{"k": 3, "m": 2, "dictionary": ["a", "a"], "forest": []}',
])
def test_malformed_files(text):
    with pytest.raises(MalformedFile):
        from_json(text)

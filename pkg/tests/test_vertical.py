from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from disassoc.core import Params, compute_supports
from disassoc.horizontal import RawCluster
from disassoc.model import RecordChunk, VerticalPartition
from disassoc.vertical import (
    can_extend, enforce_record_count_bound, is_k_anonymous, is_km_anonymous, meets_record_count_bound,
    record_count_bound, verpart,
)

cluster_rows = st.lists(
    st.lists(st.integers(0, 7), min_size=1, max_size=6, unique=True).map(lambda r: tuple(sorted(r))),
    min_size=2, max_size=12,
)


def test_fig2b_partitions(fig2a_halves, tok):
    p1 = verpart(fig2a_halves[0], Params(3, 2, 5))
    p2 = verpart(fig2a_halves[1], Params(3, 2, 5))
    assert [c.domain for c in p1.record_chunks] == [tok("itunes", "flu", "madonna"), tok("audi_a4", "sony_tv")]
    assert p1.term_chunk == tok("ikea", "viagra", "ruby")
    assert [c.domain for c in p2.record_chunks] == [tok("iphone_sdk", "digital_camera", "madonna")]
    assert p2.term_chunk == tok("panic_disorder", "playboy", "ikea", "ruby")


def test_fig2b_subrecords(fig2a_halves, tok):
    p1 = verpart(fig2a_halves[0], Params(3, 2, 5))
    c2 = p1.record_chunks[1]
    assert Counter(c2.subrecords) == Counter({tuple(sorted(tok("audi_a4", "sony_tv"))): 3})


@pytest.mark.parametrize("subs,k,m,expected", [
    ([(1, 2)] * 3, 3, 2, True),
    ([(1, 2)] * 2 + [(1,)], 3, 2, False),
    ([(1, 2), (1, 3), (2, 3)] * 2, 2, 2, True),
    ([(1, 2, 3)] * 2 + [(1, 2)] * 2, 2, 3, True),
    ([(1, 2, 3)] + [(1, 2)] * 3, 2, 3, False),
    ([(1, 2)] + [(1,)] * 3, 2, 1, False),
])
def test_km_anonymity(subs, k, m, expected):
    assert is_km_anonymous(subs, k, m) is expected


def test_k_anonymity_is_on_whole_subrecords():
    assert is_k_anonymous([(1, 2)] * 2 + [(1,)] * 2, 2)
    assert not is_k_anonymous([(1, 2)] * 2 + [(1,)] * 2 + [(2,)], 2)
    assert is_km_anonymous([(1, 2)] * 2 + [(1,)] * 2 + [(2,)] * 2, 2, 2)


@given(cluster_rows, st.integers(2, 3), st.integers(1, 3))
def test_can_extend_matches_full_check(rows, k, m):
    current: set[int] = set()
    for t in sorted({t for r in rows for t in r}):
        holders = [r for r in rows if t in r]
        trial = current | {t}
        full = is_km_anonymous([tuple(x for x in r if x in trial) for r in rows if set(r) & trial], k, m)
        if is_km_anonymous([tuple(x for x in r if x in current) for r in rows if set(r) & current], k, m):
            assert can_extend(holders, current, k, m) == full
        if full:
            current = trial


@given(cluster_rows, st.integers(2, 3), st.integers(1, 3))
def test_verpart_invariants(rows, k, m):
    params = Params(k, m, 30)
    vp = verpart(RawCluster(tuple(rows), tuple(range(len(rows)))), params)
    sup = compute_supports(rows)
    domains = [c.domain for c in vp.record_chunks] + [vp.term_chunk]
    assert frozenset().union(*domains) == frozenset(sup)
    assert sum(len(d) for d in domains) == len(sup)
    for c in vp.record_chunks:
        assert is_km_anonymous(c.subrecords, k, m)
        assert all(sup[t] >= k for t in c.domain)
        assert sorted(c.subrecords) == sorted(
            tuple(t for t in r if t in c.domain) for r in rows if set(r) & c.domain)
    assert {t for t, s in sup.items() if s < k} <= vp.term_chunk
    assert meets_record_count_bound(vp, k, m)


def test_sensitive_terms_go_to_term_chunk(fig2a_halves, tok):
    madonna = tok("madonna")
    vp = verpart(fig2a_halves[0], Params(3, 2, 5, sensitive_terms=madonna))
    assert madonna <= vp.term_chunk
    assert not any(c.domain & madonna for c in vp.record_chunks)


def test_record_count_bound(short_chunks_leaf):
    vp = short_chunks_leaf.partition
    assert record_count_bound(5, 2, 3, 2) == 8
    assert record_count_bound(4, 0, 3, 2) == 4
    assert not meets_record_count_bound(vp, 3, 2)
    fixed = enforce_record_count_bound(vp, Params(3, 2, 5))
    # c ties with b on support; the higher id moves
    assert fixed.term_chunk == frozenset({2})
    assert [c.domain for c in fixed.record_chunks] == [frozenset({0}), frozenset({1})]
    assert meets_record_count_bound(fixed, 3, 2)


def test_single_chunk_needs_one_subrecord_per_record():
    vp = VerticalPartition(4, (RecordChunk(frozenset({1}), ((1,),) * 3),), frozenset())
    assert not meets_record_count_bound(vp, 3, 2)
    assert meets_record_count_bound(VerticalPartition(4, vp.record_chunks, frozenset({9})), 3, 2)

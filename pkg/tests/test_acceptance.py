"""Acceptance criteria, one test each; the terminal summary prints a PASS/FAIL line per criterion.

The large-scale criteria (5, 6, 9, 10) take several minutes in total on one core.
"""
import random
import statistics
import time
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disassoc.anonymize import anonymize, anonymize_clusters
from disassoc.core import Dataset, Params, compute_supports, generate_synthetic
from disassoc.metrics import metrics_run, mine_top_k, pair_relative_error, tkd, tlost
from disassoc.model import Joint, Leaf, iter_leaves, iter_nodes
from disassoc.reconstruct import Reconstructor, closure_violations
from disassoc.refine import MergeRecord, refine
from disassoc.verify import audit, audit_node, brute_force_guarantee, guarantee_failures
from disassoc.vertical import enforce_record_count_bound, verpart

SCALE = dict(n_records=100_000, domain_size=5_000, avg_len=10.0, seed=0)
SCALE_PARAMS = Params(5, 2, 30)


@pytest.fixture(scope="module")
def scale_data():
    return generate_synthetic(**SCALE)


@pytest.fixture(scope="module")
def scale_run(scale_data):
    t = time.perf_counter()
    da = anonymize(scale_data, SCALE_PARAMS)
    return da, time.perf_counter() - t


@pytest.mark.criterion(1, "vertical partition of the two-cluster example")
def test_c01_vertical_golden(fig2a_halves, tok):
    t = time.perf_counter()
    params = Params(3, 2, 5)
    p1, p2 = (verpart(c, params) for c in fig2a_halves)
    assert [c.domain for c in p1.record_chunks] == [tok("itunes", "flu", "madonna"), tok("audi_a4", "sony_tv")]
    assert p1.term_chunk == tok("ikea", "viagra", "ruby")
    assert [c.domain for c in p2.record_chunks] == [tok("iphone_sdk", "digital_camera", "madonna")]
    assert p2.term_chunk == tok("panic_disorder", "playboy", "ikea", "ruby")
    assert time.perf_counter() - t < 1.0


@pytest.mark.criterion(2, "refining the example forest into one joint cluster")
def test_c02_refine_golden(fig2a_halves, tok):
    t = time.perf_counter()
    params = Params(3, 2, 5)
    forest = [Leaf(verpart(c, params), c.records, c.positions) for c in fig2a_halves]
    log = []
    out = refine(forest, params, log)
    assert len(out) == 1 and isinstance(out[0], Joint)
    joint = out[0]
    assert [c.domain for c in joint.shared_chunks] == [tok("ikea", "ruby")]
    assert [leaf.partition.term_chunk for leaf in iter_leaves(joint)] == [
        tok("viagra"), tok("panic_disorder", "playboy")]
    assert len(log) == 1
    assert (log[0].lhs, log[0].rhs) == (Fraction(4, 5), Fraction(2, 5))
    assert log[0].lhs >= log[0].rhs
    assert isinstance(log[0], MergeRecord)
    assert time.perf_counter() - t < 1.0


@pytest.mark.criterion(3, "short-chunk node fails the record-count bound until repaired")
def test_c03_record_count_bound(short_chunks_leaf):
    t = time.perf_counter()
    assert audit_node(short_chunks_leaf, 3, 2).kinds() == {"Lemma2Bound"}
    assert not brute_force_guarantee(short_chunks_leaf, 3, 2)
    assert (0, 1) in guarantee_failures(short_chunks_leaf, 3, 2)
    fixed = Leaf(enforce_record_count_bound(short_chunks_leaf.partition, Params(3, 2, 5)))
    assert audit_node(fixed, 3, 2).passed
    assert brute_force_guarantee(fixed, 3, 2)
    assert time.perf_counter() - t < 1.0


@pytest.mark.criterion(4, "exhaustive guarantee check on 300 small random datasets")
def test_c04_oracle_fuzz():
    t = time.perf_counter()
    rng = random.Random(2024)
    failures = []
    per_k = Counter()
    for _ in range(300):
        k = rng.choice([2, 3])
        n_terms = rng.randint(1, 8)
        rows = [[f"t{x}" for x in rng.sample(range(n_terms), rng.randint(1, n_terms))]
                for _ in range(rng.randint(k, 8))]
        params = Params(k, 2, rng.randint(k, 8))
        da = anonymize(Dataset.from_token_records(rows), params)
        per_k[k] += 1
        report = audit(da)
        if not report.passed:
            failures.append((rows, params, report.violations))
            continue
        for root in da.forest:
            for node in iter_nodes(root):
                if not brute_force_guarantee(node, k, 2, max_records=8, max_terms=8):
                    failures.append((rows, params, guarantee_failures(node, k, 2)))
    elapsed = time.perf_counter() - t
    assert failures == []
    assert min(per_k.values()) >= 50
    assert elapsed < 300


def _check_conservation(data: Dataset, da) -> None:
    chunk_count: Counter = Counter()
    tc_count: Counter = Counter()
    seen_positions = []
    for root in da.forest:
        for node in iter_nodes(root):
            if isinstance(node, Leaf):
                seen_positions.extend(node.positions)
                assert node.records == tuple(data.records[p] for p in node.positions)
                for c in node.partition.record_chunks:
                    chunk_count.update(t for sub in c.subrecords for t in sub)
                tc = node.partition.term_chunk
                tc_count.update(t for r in node.records for t in r if t in tc)
            else:
                for c in node.shared_chunks:
                    chunk_count.update(t for sub in c.subrecords for t in sub)
    assert sorted(seen_positions) == list(range(len(data)))
    assert chunk_count + tc_count == compute_supports(data.records)


@pytest.mark.criterion(5, "audit, term conservation and cluster sizes at 100k records")
def test_c05_scale_invariants(scale_data, scale_run):
    t = time.perf_counter()
    da, anon_seconds = scale_run
    report = audit(da)
    assert report.passed, report.violations[:5]
    _check_conservation(scale_data, da)
    sizes = [leaf.size for leaf in da.leaves()]
    assert sum(sizes) == len(scale_data)
    assert max(sizes) <= SCALE_PARAMS.max_cluster_size
    assert anon_seconds + time.perf_counter() - t < 600


@pytest.mark.criterion(6, "doubling the records at most triples anonymization time")
def test_c06_scaling(scale_data):
    big = generate_synthetic(200_000, SCALE["domain_size"], SCALE["avg_len"], SCALE["seed"])

    def median_time(data):
        runs = []
        for _ in range(3):
            t = time.perf_counter()
            anonymize(data, SCALE_PARAMS)
            runs.append(time.perf_counter() - t)
        return statistics.median(runs)

    small_t, big_t = median_time(scale_data), median_time(big)
    print(f"100k median {small_t:.1f}s, 200k median {big_t:.1f}s, ratio {big_t / small_t:.2f}")
    assert big_t <= 3 * small_t


rows = st.lists(
    st.lists(st.integers(0, 15), min_size=1, max_size=7, unique=True).map(lambda r: [str(t) for t in r]),
    min_size=1, max_size=40,
)


@pytest.mark.criterion(7, "metrics of a dataset against itself are zero")
@given(rows, st.integers(1, 50), st.integers(0, 10), st.integers(1, 10))
@settings(max_examples=200, deadline=None)
def test_c07_metric_identities(rs, K, lo, width):
    data = Dataset.from_token_records(rs)
    top = mine_top_k(data.records, K)
    assert tkd(top, top) == 0
    assert pair_relative_error(data, data, (lo, lo + width)) == 0


@pytest.mark.criterion(8, "lost-term share of the example with and without refining")
def test_c08_tlost(fig2a, fig2a_halves):
    t = time.perf_counter()
    for refine_on, expected in ((True, Fraction(0)), (False, Fraction(2, 7))):
        da = anonymize_clusters(fig2a.dictionary, fig2a_halves, Params(3, 2, 5, refine=refine_on))
        assert tlost(fig2a, da, 3) == expected
        whole = anonymize(fig2a, Params(3, 2, 6, refine=refine_on))
        assert tlost(fig2a, whole, 3) == expected
    assert time.perf_counter() - t < 1.0


@pytest.mark.criterion(9, "pair relative error does not fall as k grows")
def test_c09_re_trend():
    data = generate_synthetic(50_000, 1_000, 8.0, 0)
    res = []
    for k in (2, 5, 10, 20):
        da = anonymize(data, Params(k, 2, max(30, 2 * k)))
        res.append(metrics_run(data, da, K=10, rank_range=(200, 220)).re)
    print("re by k:", [round(x, 4) for x in res])
    assert all(b >= a - 0.02 for a, b in zip(res, res[1:]))


@pytest.mark.criterion(10, "50 sampled reconstructions reproduce every published chunk")
def test_c10_reconstruction_closure(scale_run):
    da, _ = scale_run
    t = time.perf_counter()
    bad = {}
    sampler = Reconstructor(da)
    for seed in range(50):
        data = sampler.sample(seed)
        problems = closure_violations(da, data)
        if problems:
            bad[seed] = problems[:3]
    elapsed = time.perf_counter() - t
    print(f"50 reconstructions checked in {elapsed:.0f}s")
    assert bad == {}
    assert elapsed < 300

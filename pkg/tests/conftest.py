from __future__ import annotations

import pytest

from disassoc.core import Dataset, parse_dataset
from disassoc.horizontal import RawCluster
from disassoc.model import Joint, Leaf, RecordChunk, SharedChunk, VerticalPartition

FIG2A = """itunes flu madonna ikea ruby
madonna flu viagra ruby audi_a4 sony_tv
itunes madonna audi_a4 ikea sony_tv
itunes flu viagra
itunes flu madonna audi_a4 sony_tv
madonna digital_camera panic_disorder playboy
iphone_sdk madonna ikea ruby
iphone_sdk digital_camera madonna playboy
iphone_sdk digital_camera panic_disorder
iphone_sdk digital_camera madonna ikea ruby
"""

_RESULTS: list[tuple[str, str, bool]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        num, title = marker.args
        _RESULTS.append((str(num), title, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok in sorted(_RESULTS, key=lambda r: int(r[0])):
        terminalreporter.write_line(f"criterion {num:>2} {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture
def fig2a_text() -> str:
    return FIG2A


@pytest.fixture
def fig2a() -> Dataset:
    return parse_dataset(FIG2A)


@pytest.fixture
def fig2a_halves(fig2a) -> list[RawCluster]:
    """The two hand-picked clusters r1..r5 and r6..r10."""
    r = fig2a.records
    return [RawCluster(r[:5], tuple(range(5))), RawCluster(r[5:], tuple(range(5, 10)))]


@pytest.fixture
def tok(fig2a):
    def ids(*tokens: str) -> frozenset[int]:
        return frozenset(fig2a.dictionary.id_of(t) for t in tokens)
    return ids


@pytest.fixture
def short_chunks_leaf() -> Leaf:
    """Five records, chunks {a}x3 and {b,c}x3, nothing in the term chunk.

    Every reconstruction must put a and b,c together at least once, but at most once.
    """
    a, b, c = 0, 1, 2
    return Leaf(VerticalPartition(5, (
        RecordChunk(frozenset({a}), ((a,),) * 3),
        RecordChunk(frozenset({b, c}), ((b, c),) * 3),
    ), frozenset()))


@pytest.fixture
def leaky_joint() -> Joint:
    """k=3, m=2: a shared chunk reusing record-chunk term a without being 3-anonymous.

    Leaf one publishes {a,x} three times; the shared {o} can only pair with x
    once, so {x,o} is pinned to support 1.
    """
    a, x, b, o = 0, 1, 2, 3
    p1 = Leaf(VerticalPartition(3, (RecordChunk(frozenset({a, x}), ((a, x),) * 3),), frozenset()))
    p2 = Leaf(VerticalPartition(4, (RecordChunk(frozenset({b}), ((b,),) * 4),), frozenset()))
    shared = SharedChunk(frozenset({a, o}), ((a, o),) * 3 + ((o,),))
    return Joint((p1, p2), (shared,))

"""End-to-end disassociation pipeline."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Sequence

from .core import Dataset, Params, TermDictionary
from .horizontal import RawCluster, enforce_min_cluster_size, horpart
from .model import DisassociatedDataset, Leaf
from .refine import refine
from .vertical import verpart


def anonymize_clusters(
    dictionary: TermDictionary,
    clusters: Sequence[RawCluster],
    params: Params,
    threads: int = 1,
    merge_log: list | None = None,
) -> DisassociatedDataset:
    """Vertical partitioning (and refining, if enabled) of pre-built clusters."""
    work = partial(verpart, params=params)
    if threads > 1 and len(clusters) > 1:
        with ProcessPoolExecutor(threads) as pool:
            vps = list(pool.map(work, clusters, chunksize=max(1, len(clusters) // (4 * threads))))
    else:
        vps = [work(c) for c in clusters]
    forest = [Leaf(vp, c.records, c.positions) for vp, c in zip(vps, clusters)]
    if params.refine:
        forest = refine(forest, params, merge_log)
    return DisassociatedDataset(params.k, params.m, dictionary, tuple(forest))


def anonymize(
    data: Dataset, params: Params, threads: int = 1, merge_log: list | None = None
) -> DisassociatedDataset:
    clusters = horpart(data, params)
    clusters = enforce_min_cluster_size(clusters, params.k, params.max_cluster_size)
    return anonymize_clusters(data.dictionary, clusters, params, threads, merge_log)

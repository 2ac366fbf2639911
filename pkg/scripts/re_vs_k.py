"""Pair relative error and top-K deviation as k grows, on one synthetic dataset.

    python scripts/re_vs_k.py --records 50000 --domain 1000 --avg-len 8 --ks 2 5 10 20
"""
from __future__ import annotations

import argparse
import time

from disassoc import Params, anonymize, generate_synthetic
from disassoc.metrics import metrics_run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--records", type=int, default=50_000)
    ap.add_argument("--domain", type=int, default=1_000)
    ap.add_argument("--avg-len", type=float, default=8.0)
    ap.add_argument("--ks", type=int, nargs="+", default=[2, 5, 10, 20])
    ap.add_argument("-m", type=int, default=2)
    ap.add_argument("--max-cluster-size", type=int, default=30)
    ap.add_argument("--pair-range", type=int, nargs=2, default=[200, 220])
    ap.add_argument("--topk", type=int, default=1000)
    ap.add_argument("--reconstructions", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    data = generate_synthetic(args.records, args.domain, args.avg_len, args.seed)
    print("k\tre\tre_a\ttkd\ttkd_a\ttlost\tseconds")
    for k in args.ks:
        t = time.perf_counter()
        da = anonymize(data, Params(k, args.m, max(args.max_cluster_size, 2 * k), args.seed))
        rep = metrics_run(data, da, args.topk, tuple(args.pair_range), args.reconstructions, args.seed)
        print(f"{k}\t{rep.re:.4f}\t{rep.re_a:.4f}\t{rep.tkd:.4f}\t{rep.tkd_a:.4f}\t{rep.tlost:.4f}\t"
              f"{time.perf_counter() - t:.1f}", flush=True)


if __name__ == "__main__":
    main()

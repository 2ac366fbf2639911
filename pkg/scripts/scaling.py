"""Anonymization wall time against dataset size (median of several runs).

    python scripts/scaling.py --sizes 25000 50000 100000 200000 --runs 3
"""
from __future__ import annotations

import argparse
import statistics
import time

from disassoc import Params, anonymize, generate_synthetic


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[25_000, 50_000, 100_000, 200_000])
    ap.add_argument("--domain", type=int, default=5_000)
    ap.add_argument("--avg-len", type=float, default=10.0)
    ap.add_argument("-k", type=int, default=5)
    ap.add_argument("-m", type=int, default=2)
    ap.add_argument("--max-cluster-size", type=int, default=30)
    ap.add_argument("--runs", type=int, default=3)
    ap.add_argument("--no-refine", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = Params(args.k, args.m, args.max_cluster_size, args.seed, refine=not args.no_refine)
    print("records\tmedian_s\truns_s\ts_per_1k_records")
    for n in args.sizes:
        data = generate_synthetic(n, args.domain, args.avg_len, args.seed)
        runs = []
        for _ in range(args.runs):
            t = time.perf_counter()
            anonymize(data, params)
            runs.append(time.perf_counter() - t)
        med = statistics.median(runs)
        print(f"{n}\t{med:.2f}\t{','.join(f'{r:.2f}' for r in runs)}\t{1000 * med / n:.3f}", flush=True)


if __name__ == "__main__":
    main()

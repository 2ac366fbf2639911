"""How averaging over more sampled reconstructions changes re and top-K deviation.

    python scripts/averaging.py --records 20000 --domain 1000 --avg-len 8 -k 5 --counts 1 2 5 10
"""
from __future__ import annotations

import argparse

from disassoc import Params, anonymize, generate_synthetic
from disassoc.metrics import metrics_run


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--records", type=int, default=20_000)
    ap.add_argument("--domain", type=int, default=1_000)
    ap.add_argument("--avg-len", type=float, default=8.0)
    ap.add_argument("-k", type=int, default=5)
    ap.add_argument("-m", type=int, default=2)
    ap.add_argument("--counts", type=int, nargs="+", default=[1, 2, 5, 10])
    ap.add_argument("--term-policy", choices=["single", "uniform"], default="single")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    data = generate_synthetic(args.records, args.domain, args.avg_len, args.seed)
    da = anonymize(data, Params(args.k, args.m, seed=args.seed))
    print("reconstructions\tre\ttkd")
    for n in args.counts:
        rep = metrics_run(data, da, n_reconstructions=n, seed=args.seed, term_policy=args.term_policy)
        print(f"{n}\t{rep.re:.4f}\t{rep.tkd:.4f}", flush=True)


if __name__ == "__main__":
    main()

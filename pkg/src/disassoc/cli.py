"""Command-line front end: anonymize, verify, reconstruct, metrics, synth."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .anonymize import anonymize
from .core import EmptyDataset, Params, generate_synthetic, parse_dataset_stats, serialize_dataset
from .metrics import metrics_run
from .model import MalformedFile, from_json, to_json
from .reconstruct import POLICIES, ReconstructionStuck, Reconstructor
from .verify import TooLarge, audit, guarantee_failures

EXIT_OK, EXIT_VIOLATIONS, EXIT_STRUCTURE, EXIT_USAGE, EXIT_IO = 0, 2, 3, 64, 74

log = logging.getLogger("disassoc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _read(path: str | None) -> str:
    if path in (None, "-"):
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _pair_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi") from None
    if not 0 <= lo < hi:
        raise argparse.ArgumentTypeError("need 0 <= lo < hi")
    return lo, hi


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def cmd_anonymize(args) -> int:
    data, stats = parse_dataset_stats(_read(args.input))
    if stats.duplicates_dropped or stats.lines_skipped:
        log.info("dropped %d duplicate terms, skipped %d blank lines",
                 stats.duplicates_dropped, stats.lines_skipped)
    sensitive = frozenset()
    if args.sensitive:
        tokens = [t for t in Path(args.sensitive).read_text(encoding="utf-8").split() if t]
        known = [t for t in tokens if t in data.dictionary.index]
        if len(known) < len(tokens):
            log.warning("%d sensitive tokens do not occur in the input", len(tokens) - len(known))
        sensitive = frozenset(data.dictionary.id_of(t) for t in known)
    params = Params(args.k, args.m, args.max_cluster_size, args.seed,
                    refine=not args.no_refine, sensitive_terms=sensitive)
    da = anonymize(data, params, threads=args.threads)
    _write(args.output, to_json(da, shuffle_seed=args.seed if args.shuffle else None) + "\n")
    log.info("%d records in %d root clusters", da.size, len(da.forest))
    return EXIT_OK


def cmd_verify(args) -> int:
    da = from_json(_read(args.input))
    report = audit(da)
    for v in report.violations:
        print(f"{v.kind}\t{v.location}\t{v.detail}")
    status = EXIT_OK if report.passed else EXIT_VIOLATIONS
    if args.brute_force:
        checked = skipped = 0
        for i, root in enumerate(da.forest):
            try:
                bad = guarantee_failures(root, da.k, da.m)
            except TooLarge:
                skipped += 1
                continue
            checked += 1
            for s, c in sorted(bad.items()):
                print(f"Guarantee\tforest[{i}]\tterms {list(da.dictionary.decode(s))} reach at most {c} records")
                status = EXIT_VIOLATIONS
        print(f"brute-force: {checked} clusters checked, {skipped} too large")
    print("ok" if status == EXIT_OK else "violations found")
    return status


def cmd_reconstruct(args) -> int:
    da = from_json(_read(args.input))
    out = Path(args.output or ".")
    out.mkdir(parents=True, exist_ok=True)
    sampler = Reconstructor(da)
    for i in range(args.count):
        data = sampler.sample(args.seed + i, args.term_policy)
        (out / f"recon-{args.seed}-{i}.txt").write_text(serialize_dataset(data), encoding="utf-8")
    return EXIT_OK


def cmd_metrics(args) -> int:
    orig, _ = parse_dataset_stats(_read(args.original))
    da = from_json(Path(args.anonymized).read_text(encoding="utf-8"))
    missing = [t for t in da.dictionary.tokens if t not in orig.dictionary.index]
    if missing:
        raise MalformedFile(f"{len(missing)} published terms do not occur in the original data")
    da = da.remap(orig.dictionary)
    report = metrics_run(orig, da, args.topk, args.pair_range, args.reconstructions, args.seed)
    sys.stdout.write(report.to_text())
    if args.output:
        _write(args.output, report.to_json() + "\n")
    return EXIT_OK


def cmd_synth(args) -> int:
    data = generate_synthetic(args.records, args.domain, args.avg_len, args.seed)
    _write(args.output, serialize_dataset(data))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-k", type=int, default=5)
    common.add_argument("-m", type=int, default=2)
    common.add_argument("--max-cluster-size", type=int, default=30)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-i", "--input")
    common.add_argument("-o", "--output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="disassoc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("anonymize", parents=[common], help="disassociate a transaction file")
    p.add_argument("--no-refine", action="store_true")
    p.add_argument("--shuffle", action="store_true", help="seeded random subrecord order")
    p.add_argument("--sensitive", metavar="FILE", help="one token per line; kept out of chunks")
    p.add_argument("--threads", type=_positive, default=1)
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("verify", parents=[common], help="audit a disassociated file")
    p.add_argument("--brute-force", action="store_true", help="also run the exhaustive oracle on small clusters")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reconstruct", parents=[common], help="sample possible original datasets")
    p.add_argument("--count", type=_positive, default=1)
    p.add_argument("--term-policy", choices=POLICIES, default="single")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("metrics", parents=[common], help="information loss against the original")
    p.add_argument("--original", required=True)
    p.add_argument("--anonymized", required=True)
    p.add_argument("--topk", type=_positive, default=1000)
    p.add_argument("--pair-range", type=_pair_range, default=(200, 220))
    p.add_argument("--reconstructions", type=_positive, default=1)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic transaction file")
    p.add_argument("--records", type=_positive, required=True)
    p.add_argument("--domain", type=_positive, required=True)
    p.add_argument("--avg-len", type=float, required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (MalformedFile, EmptyDataset, UnicodeDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STRUCTURE
    except ValueError as e:
        # invalid parameter combinations, e.g. k < 2 or max cluster size < k
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ReconstructionStuck as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STRUCTURE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface: `gcx <subcommand> ...`.

Exit codes: 0 success, 2 invalid input, 3 certificate check failure,
4 search target not reached, 5 internal invariant violation (red alert).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from . import bound as bounds
from .certify import CertificateError, build_certificate, check_certificate
from .core import DegenerateSequenceError, GcxError, InternalInvariantError, format_rational, nsc
from .curve import CurveError, continuize_seq, curve_zeros, discretize_curve, factor_pos_eta, nz
from .reduce import choose_functional, reduce_sequence, refine_with_index
from .search import STRATEGIES, SearchConfig, maximize_nsc, save_witness, verify_witness
from .serialize import (
    FormatError,
    cert_from_dict,
    cert_to_dict,
    curve_from_dict,
    curve_to_dict,
    load_seq,
    read_json,
    save_seq,
    seq_to_dict,
    unipotent_from_json,
    write_json,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CHECK = 3
EXIT_TARGET = 4
EXIT_ALERT = 5

log = logging.getLogger("gcx")


def _emit(data, out: str | None) -> None:
    if out:
        write_json(out, data)
        log.info("wrote %s", out)
    else:
        json.dump(data, sys.stdout, indent=2)
        sys.stdout.write("\n")


def cmd_nsc(args) -> int:
    print(nsc(load_seq(args.input)))
    return EXIT_OK


def cmd_certify(args) -> int:
    seq = load_seq(args.input)
    cert = build_certificate(seq, seed=args.seed)
    drop = cert.original_pr()[0] - cert.original_pr()[-1]
    log.info("nsc %d <= certified drop %d <= %d", nsc(seq), drop, bounds.constructive_bound(seq.k, seq.n))
    _emit(cert_to_dict(cert), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    seq = load_seq(args.input)
    cert = cert_from_dict(read_json(args.certificate))
    report = check_certificate(seq, cert)
    print(report)
    return EXIT_OK if report.ok else EXIT_CHECK


def _bound_rows(args):
    kinds = list(bounds.BoundKind) if args.kind == "all" else [bounds.BoundKind(args.kind)]
    if args.table:
        pairs = [(k, n) for n in range(2, args.table + 1) for k in range(1, n)]
    else:
        if args.k is None or args.n is None:
            raise FormatError("--k and --n are required without --table")
        pairs = [(args.k, args.n)]
    for k, n in pairs:
        for kind in kinds:
            value = bounds.bound(kind, k, n)
            strict = kind is bounds.BoundKind.THEOREM and bounds.is_strict(k)
            if kind is bounds.BoundKind.DUAL:
                strict = bounds.max_nsc_allowed(kind, k, n) < value
            yield k, n, kind.value, value, strict, bounds.max_nsc_allowed(kind, k, n)


def cmd_bound(args) -> int:
    rows = list(_bound_rows(args))
    if args.format == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(["k", "n", "kind", "value", "strict", "max_nsc"])
        for k, n, kind, value, strict, top in rows:
            writer.writerow([k, n, kind, format_rational(value), int(strict), top])
        return EXIT_OK
    if len(rows) == 1 and not args.ceiling:
        print(format_rational(rows[0][3]))
        return EXIT_OK
    for k, n, kind, value, strict, top in rows:
        rel = "<" if strict else "<="
        shown = format_rational(value)
        if args.ceiling:
            shown += f"  (nsc {rel} {shown}, so nsc <= {top})"
        print(f"k={k:<3} n={n:<3} {kind:<12} {shown}")
    return EXIT_OK


def cmd_search(args) -> int:
    cfg = SearchConfig(
        k=args.k,
        n=args.n,
        budget=args.budget,
        restarts=args.restarts,
        seed=args.seed,
        strategy=args.strategy,
        max_length=args.max_length,
        magnitude=args.magnitude,
        target=args.target,
        threads=args.threads,
    )
    result = maximize_nsc(cfg, progress_path=args.progress)
    w = result.witness
    if w is None:
        print("no witness")
        return EXIT_TARGET if args.target is not None else EXIT_OK
    _emit(w.to_dict(), args.out)
    if args.library:
        log.info("stored %s", save_witness(w, args.library))
    summary = f"nsc {w.nsc} (conjecture bound {bounds.conjecture_bound(cfg.k, cfg.n)}), {result.proposals} proposals"
    print(summary, file=sys.stdout if args.out else sys.stderr)
    if w.red_alert:
        return EXIT_ALERT
    if args.target is not None and w.nsc < args.target:
        return EXIT_TARGET
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_witness(read_json(args.input), certify=args.certify, library=args.library)
    print(report)
    if any(f.startswith("RED ALERT") for f in report.flags):
        return EXIT_ALERT
    return EXIT_OK if report.ok else EXIT_CHECK


def cmd_reduce(args) -> int:
    seq = load_seq(args.input)
    omega = choose_functional(seq, seed=args.seed)
    refined, index = refine_with_index(seq, omega)
    types, runs = reduce_sequence(refined, omega)
    data = {
        "omega": [format_rational(x) for x in omega.coefficients],
        "refined": seq_to_dict(refined),
        "sample_index": list(index),
        "move_types": [t.tag for t in types],
        "runs": [
            {"start": r.start, "stop": r.stop, "sample_map": list(r.sample_map), "reduced": seq_to_dict(r.seq)}
            for r in runs
        ],
    }
    _emit(data, args.out)
    return EXIT_OK


def cmd_curve(args) -> int:
    if args.action == "zeros":
        spec = curve_from_dict(read_json(args.input))
        zeros = curve_zeros(spec)
        print(f"nz {nz(spec)}")
        for i, _, lo, hi in zeros:
            where = format_rational(lo) if lo == hi else f"({format_rational(lo)}, {format_rational(hi)}]"
            print(f"arc {i}: {where}")
    elif args.action == "discretize":
        seq = discretize_curve(curve_from_dict(read_json(args.input)))
        log.info("length %d, nsc %d", seq.length, nsc(seq))
        if args.out:
            save_seq(args.out, seq)
        else:
            _emit(seq_to_dict(seq), None)
    elif args.action == "lift":
        spec = continuize_seq(load_seq(args.input))
        log.info("nz %d", nz(spec))
        _emit(curve_to_dict(spec), args.out)
    else:
        L = unipotent_from_json(read_json(args.input))
        fac = factor_pos_eta(L)
        if not fac.ok:
            print(f"not totally positive: {fac.reason}")
            return EXIT_CHECK
        print(" ".join(format_rational(t) for t in fac.params))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest() else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcx", description="Sign changes of leading minors along convex sequences.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nsc", help="count leading-minor sign changes")
    p.add_argument("-i", "--input", required=True)
    p.set_defaults(func=cmd_nsc)

    p = sub.add_parser("certify", help="build a prerank certificate")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("check", help="independently check a certificate")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-c", "--certificate", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bound", help="evaluate upper and lower bounds")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--kind", choices=[k.value for k in bounds.BoundKind] + ["all"], default="theorem")
    p.add_argument("--table", type=int, metavar="N_MAX", help="all 0 < k < n <= N_MAX")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--ceiling", action="store_true", help="also show the largest admissible integer nsc")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("search", help="heuristic search for sequences with many sign changes")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=STRATEGIES, default="anneal")
    p.add_argument("--target", type=int)
    p.add_argument("--max-length", type=int, default=1000)
    p.add_argument("--magnitude", type=int, default=6)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--progress", help="write a progress CSV here")
    p.add_argument("--library", help="also store the witness in this directory")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="re-verify a stored witness")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--certify", action="store_true")
    p.add_argument("--library")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", help="show the reduction of a sequence to one dimension lower")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("curve", help="convex curves and the bridge to sequences")
    p.add_argument("action", choices=["zeros", "discretize", "lift", "factor"])
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("selftest", help="run the built-in consistency suite")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InternalInvariantError as exc:
        log.error("internal invariant violated: %s", exc)
        return EXIT_ALERT
    except CertificateError as exc:
        log.error("certificate failed its own check: %s", exc)
        return EXIT_ALERT
    except (FormatError, DegenerateSequenceError, CurveError, OSError, ValueError, GcxError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

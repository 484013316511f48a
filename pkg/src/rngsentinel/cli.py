"""Command-line surface: stream auditing, manifest policy checks, attack
simulations, overhead benchmarks, and fixture generation.

Exit codes: 0 clean, 1 policy error or warning under --strict, 2 usage or
I/O error. All machine-readable output is JSON (newline-delimited for
streams). RNG_SENTINEL_THRESHOLD overrides the default warn threshold.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .attacks import run_scenario, scenario_from_json
from .auditor import AuditEvent, Auditor, AuditorConfig, Mode
from .bench import BENCH_MODES, run_bench
from .errors import SentinelError
from .generators import Algorithm, export_raw, make_generator
from .policy import evaluate_policies, load_manifest, Severity
from .seeds import OsEntropy, parse_seed_source
from .transforms import parse_spec, sample_iter, samples_from_words

EXIT_OK = 0
EXIT_FLAGGED = 1
EXIT_USAGE = 2


def _threshold_default() -> float:
    raw = os.environ.get("RNG_SENTINEL_THRESHOLD")
    if raw is None:
        return 0.01
    try:
        return float(raw)
    except ValueError:
        raise SentinelError(f"RNG_SENTINEL_THRESHOLD is not a number: {raw!r}")


def _open_input(path: str, binary: bool):
    if path == "-":
        return sys.stdin.buffer if binary else sys.stdin
    return open(path, "rb" if binary else "r")


def _raw_words(fh):
    while True:
        block = fh.read(8)
        if not block:
            return
        if len(block) != 8:
            raise SentinelError("raw input truncated mid-word")
        yield int.from_bytes(block, "little")


def _text_samples(fh):
    for line_no, line in enumerate(fh, 1):
        line = line.strip()
        if not line:
            continue
        try:
            yield float(line)
        except ValueError:
            raise SentinelError(f"line {line_no}: not a decimal number: {line!r}")


def cmd_audit(args) -> int:
    spec = parse_spec(args.spec)
    config = AuditorConfig(
        mode=Mode(args.mode),
        batch_size=args.batch_size,
        warn_threshold=args.threshold,
        stride=args.stride,
        continuous_test=args.test,
    )
    fh = _open_input(args.input, binary=args.raw)
    warn_count = 0

    def emit(records) -> None:
        nonlocal warn_count
        for record in records:
            if record.report.verdict == "warn":
                warn_count += 1
            print(json.dumps(record.to_json()), flush=True)

    try:
        with Auditor(config) as auditor:
            if args.raw:
                samples = samples_from_words(_raw_words(fh), spec)
            else:
                samples = _text_samples(fh)
            batch: list = []
            sequence = 0
            for value in samples:
                batch.append(value)
                if len(batch) == config.batch_size:
                    sequence += 1
                    auditor.submit(AuditEvent(args.input, spec, batch, sequence))
                    batch = []
                    emit(auditor.poll_reports())
            emit(auditor.drain_reports(timeout=600.0))
    finally:
        if fh not in (sys.stdin, sys.stdin.buffer):
            fh.close()
    if args.strict and warn_count:
        return EXIT_FLAGGED
    return EXIT_OK


def cmd_policy(args) -> int:
    manifest = load_manifest(args.manifest)
    violations = evaluate_policies(manifest)
    print(json.dumps([v.to_json() for v in violations], indent=2))
    has_error = any(v.severity is Severity.ERROR for v in violations)
    if args.strict and has_error:
        return EXIT_FLAGGED
    return EXIT_OK


def cmd_simulate(args) -> int:
    with open(args.scenario, "r", encoding="utf-8") as fh:
        scenario = scenario_from_json(json.load(fh))
    transcript = run_scenario(scenario)
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for entry in transcript:
            out.write(json.dumps(entry) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_bench(args) -> int:
    rows = run_bench(args.batches, modes=args.modes, repeats=args.repeats)
    for row in rows:
        print(json.dumps(row))
    return EXIT_OK


def cmd_generate(args) -> int:
    source = parse_seed_source(args.seed_source) if args.seed_source else None
    if args.seed is not None and source is None:
        gen = make_generator(Algorithm(args.algorithm), seed=args.seed)
    else:
        gen = make_generator(Algorithm(args.algorithm),
                             seed_source=source or OsEntropy(), seed=args.seed)
    if args.raw:
        export_raw(gen, args.count, sys.stdout.buffer)
        sys.stdout.buffer.flush()
        return EXIT_OK
    spec = parse_spec(args.spec)
    it = sample_iter(gen, spec)
    for _ in range(args.count):
        print(repr(next(it)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rngsentinel",
        description="Audit, policy-check, and attack randomness streams.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="statistically audit a sample stream")
    p.add_argument("input", nargs="?", default="-",
                   help="file path or - for stdin (default)")
    fmt = p.add_mutually_exclusive_group(required=True)
    fmt.add_argument("--raw", action="store_true",
                     help="input is little-endian 64-bit raw words")
    fmt.add_argument("--text", action="store_true",
                     help="input is newline-delimited decimal samples")
    p.add_argument("--spec", required=True,
                   help="target distribution, e.g. normal:0,1 uniform:0,1"
                        " uniformint:0,10 laplace:0,1")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="blocking")
    p.add_argument("--batch-size", type=int, default=100)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--test", choices=["ks", "z"], default="ks",
                   help="continuous-spec test selection")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 if any batch warns")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("policy", help="evaluate a randomness manifest")
    p.add_argument("manifest")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 on any error-severity violation")
    p.set_defaults(func=cmd_policy)

    p = sub.add_parser("simulate", help="run an attack scenario end to end")
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--output", default=None,
                   help="write the transcript here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="relative overhead of auditing modes")
    p.add_argument("--batches", type=int, default=200)
    p.add_argument("--modes", nargs="+", default=list(BENCH_MODES),
                   choices=list(BENCH_MODES))
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("generate", help="emit samples or raw words")
    p.add_argument("--algorithm", default="mt19937",
                   choices=[a.value for a in Algorithm])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seed-source", default=None,
                   help="os | time:RES | constant:V | range:LO,HI | user:V")
    p.add_argument("--spec", default="uniform:0,1")
    p.add_argument("--count", type=int, required=True)
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--raw", action="store_true",
                     help="emit little-endian 64-bit raw words")
    fmt.add_argument("--text", action="store_true",
                     help="emit newline-delimited decimal samples (default)")
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "threshold", None) is None and hasattr(args, "threshold"):
        try:
            args.threshold = _threshold_default()
        except SentinelError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    try:
        return args.func(args)
    except (SentinelError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

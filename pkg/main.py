#!/usr/bin/env python3
"""
Command-line entry point: exact TV, slice decompositions, bound checks, randomized
verification, the B_k(n) table and tightness sweeps.

Exit codes: 0 success, 1 verification violations, 2 usage/parse/validation errors,
3 dimension above the exact-enumeration limit.
"""

import sys
import logging
import argparse
from typing import List, Optional

from bhattacharyya import bhattacharyya_coefficient, quasi_symmetry, tv_bc_bound
from bounds import bk_sequence, delta1_closed_form, evaluate_bounds, tv_envelope
from core import classify_regime, l1_distance, l2_distance
from enumeration import full_slice_report
from errors import BernoulliTVError, DimensionTooLargeError
from input_document import load_input_document
from reports import (
    bk_frame,
    bounds_frame,
    format_table,
    slices_frame,
    sweep_frame,
    sweep_summary,
    verify_frame,
    write_csv,
)
from settings import Settings, get_settings, load_settings, use_settings
from verifier import SamplingRegime, TheoremId, run_all, run_sweep, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_DIMENSION = 3


def _parse_n_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("n list is empty")
    return values


def _parse_seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if seed < 0 or seed >= 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def cmd_tv(args) -> int:
    document = load_input_document(args.input)
    pair = document.to_pair()
    settings = get_settings()
    regime = classify_regime(pair)
    delta1 = delta1_closed_form(pair)

    mode = args.mode
    if mode == "all" and pair.n > settings.enumeration_limit:
        logger.warning(
            f"n={pair.n} exceeds the enumeration limit {settings.enumeration_limit}; reporting bounds only"
        )
        mode = "bounds"

    if document.label:
        print(f"label: {document.label}")
    print(f"n: {pair.n}")
    print(f"regime: {regime.tag.value}")

    if mode != "bounds":
        report = full_slice_report(pair)
        print(f"tv_exact: {report.tv_exact!r}")

    print(f"delta1: {delta1!r}")
    print(f"l1: {l1_distance(pair)!r}")
    print(f"l2: {l2_distance(pair)!r}")
    print(f"bhattacharyya: {bhattacharyya_coefficient(pair)!r}")
    print(f"tv_bc_bound: {tv_bc_bound(pair)!r}")
    print(f"quasi_symmetric: {quasi_symmetry(pair).is_quasi_symmetric}")

    envelope = tv_envelope(pair, delta1)
    print(f"tv_lower: {envelope.lower!r} ({envelope.lower_source})")
    print(f"tv_upper: {envelope.upper!r} ({envelope.upper_source})")

    if mode != "bounds":
        bounds = evaluate_bounds(pair, report)
        print()
        print(format_table(bounds_frame(bounds.entries)))
    return EXIT_OK


def cmd_slices(args) -> int:
    document = load_input_document(args.input)
    report = full_slice_report(document.to_pair())
    write_csv(slices_frame(report), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.all:
        runs = run_all(args.n_min, args.n_max, args.trials, args.seed,
                       boundary_biased=args.boundary_biased)
    else:
        runs = [run_verification(TheoremId.parse(args.theorem), args.n_min, args.n_max,
                                 args.trials, args.seed, boundary_biased=args.boundary_biased,
                                 sample_regime=args.sample_regime)]

    frame = verify_frame(runs)
    if args.csv or args.out:
        write_csv(frame, args.out)
    else:
        print(format_table(frame))

    violations = sum(run.violations for run in runs)
    if violations:
        logger.warning(f"{violations} violation(s) across {len(runs)} theorem(s)")
        return EXIT_VIOLATIONS
    logger.info(f"No violations across {len(runs)} theorem(s)")
    return EXIT_OK


def cmd_bk(args) -> int:
    write_csv(bk_frame(bk_sequence(args.n)), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = run_sweep(args.regime, args.n_list, args.trials, args.seed,
                     boundary_biased=args.boundary_biased)
    frame = sweep_frame(rows)
    write_csv(frame, args.out)
    if args.out:
        print(format_table(sweep_summary(frame)))
    return EXIT_OK


def apply_settings(args):
    """Load settings for this invocation and apply command-line overrides"""
    settings = load_settings(args.config).with_overrides(
        enumeration_limit=args.enum_limit,
        enumeration_workers=args.workers,
        verify_workers=args.workers,
    )
    use_settings(settings)
    return settings


def configure_logging(settings: Settings, level: Optional[str] = None):
    """Root handler on stderr with the configured format; --log-level wins over the config"""
    level = level or settings.log_level
    logging.basicConfig(level=level, format=settings.log_format, stream=sys.stderr)
    logging.getLogger().setLevel(level)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bernoulli-tv",
        description="Exact total variation between Bernoulli product measures and its bounds",
    )
    parser.add_argument("--config", help="TOML settings file (default: config.toml)")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--workers", type=int, help="worker threads for enumeration and verification")
    parser.add_argument("--enum-limit", type=int, help="largest n for exact enumeration")
    sub = parser.add_subparsers(dest="command", required=True)

    tv = sub.add_parser("tv", help="TV, regime, Delta_1, distances and applicable bounds")
    tv.add_argument("input", help="JSON, TOML or two-row CSV document with p and q")
    mode = tv.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--bounds", dest="mode", action="store_const", const="bounds")
    mode.add_argument("--all", dest="mode", action="store_const", const="all")
    mode.add_argument("--mode", dest="mode", choices=["exact", "bounds", "all"])
    tv.set_defaults(handler=cmd_tv, mode="all")

    slices = sub.add_parser("slices", help="CSV of Delta_k for k = 0..n with identity footer")
    slices.add_argument("input")
    slices.add_argument("--out", help="write CSV here instead of standard output")
    slices.set_defaults(handler=cmd_slices)

    verify = sub.add_parser("verify", help="seeded randomized theorem verification")
    which = verify.add_mutually_exclusive_group(required=True)
    which.add_argument("--theorem", choices=[t.value for t in TheoremId])
    which.add_argument("--all", action="store_true")
    verify.add_argument("--n-min", type=int, default=2)
    verify.add_argument("--n-max", type=int, default=10)
    verify.add_argument("--trials", type=int, default=1000)
    verify.add_argument("--seed", type=_parse_seed, required=True)
    verify.add_argument("--boundary-biased", action="store_true")
    verify.add_argument("--sample-regime", choices=[r.value for r in SamplingRegime],
                        help="sample from this regime instead of the theorem's own")
    verify.add_argument("--csv", action="store_true", help="print the summary as CSV")
    verify.add_argument("--out", help="write the CSV summary here")
    verify.set_defaults(handler=cmd_verify)

    bk = sub.add_parser("bk", help="B_k(n) by recurrence and closed form")
    bk.add_argument("--n", type=int, required=True)
    bk.add_argument("--out")
    bk.set_defaults(handler=cmd_bk)

    sweep = sub.add_parser("sweep", help="TV against Delta_1 and l1 over random pairs")
    sweep.add_argument("--regime", required=True, choices=[r.value for r in SamplingRegime])
    sweep.add_argument("--n-list", type=_parse_n_list, required=True)
    sweep.add_argument("--trials", type=int, default=100)
    sweep.add_argument("--seed", type=_parse_seed, required=True)
    sweep.add_argument("--boundary-biased", action="store_true")
    sweep.add_argument("--out")
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = apply_settings(args)
    except BernoulliTVError as e:
        configure_logging(Settings(), args.log_level)
        logger.error(f"Error: {str(e)}")
        return EXIT_USAGE
    configure_logging(settings, args.log_level)

    try:
        return args.handler(args)
    except DimensionTooLargeError as e:
        logger.error(f"Dimension error: {str(e)}")
        return EXIT_DIMENSION
    except BernoulliTVError as e:
        logger.error(f"Error: {str(e)}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"I/O error: {str(e)}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

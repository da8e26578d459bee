"""Command-line interface.

Exit codes: 0 success, 1 validation error (bad input, bad state file),
2 runtime failure.
"""

import argparse
import logging
import sys
import time
import warnings

from ._validation import ValidationError, check_alpha
from .association import build_pvalue_matrix, parse_gmt, parse_matrix, parse_pvalue_matrix
from .heatmap import render_svg
from .results import read_results, scan, write_results
from .state import StateFileError, load, prepare, save
from .twoway import DEFAULT_MAX_ITER

log = logging.getLogger("ocean_tdp")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _alpha(text):
    try:
        return check_alpha(float(text))
    except (ValueError, ValidationError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _max_iter(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def cmd_prep(args):
    t0 = time.perf_counter()
    if args.pvalues:
        if args.omic_a or args.omic_b:
            raise ValidationError("give either --pvalues or --omic-a/--omic-b, not both")
        assoc = parse_pvalue_matrix(args.pvalues, args.format)
    else:
        if not (args.omic_a and args.omic_b):
            raise ValidationError("--omic-a and --omic-b are both required without --pvalues")
        a = parse_matrix(args.omic_a, args.format, features_as_rows=args.features_as_rows)
        b = parse_matrix(args.omic_b, args.format, features_as_rows=args.features_as_rows)
        assoc = build_pvalue_matrix(a, b)
    state = prepare(assoc, args.alpha)
    save(state, args.out)
    elapsed = time.perf_counter() - t0
    print(
        f"p={state.p} q={state.q} m={state.m} alpha={state.alpha} h={state.h} cap={state.cap} "
        f"seconds={elapsed:.3f} -> {args.out}"
    )
    return EXIT_OK


def cmd_tdp(args):
    state = load(args.state)
    row_sets = parse_gmt(args.row_sets)
    col_sets = parse_gmt(args.col_sets)
    for name, sets, axis in ((args.row_set, row_sets, "row"), (args.col_set, col_sets, "column")):
        for n in name or ():
            if n not in sets:
                raise ValidationError(f"unknown {axis} set {n!r}")
    rows = scan(state, row_sets, col_sets, args.row_set, args.col_set, max_iter=args.max_iter)
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            write_results(rows, fh, args.output_format)
    else:
        write_results(rows, sys.stdout, args.output_format)
    return EXIT_OK


def cmd_heatmap(args):
    svg = render_svg(read_results(args.results), args.metric, title=args.title)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return EXIT_OK


def cmd_selftest(args):
    from .selftest import run

    if args.state:
        try:
            state = load(args.state)
        except (OSError, StateFileError) as exc:
            print(f"FAIL state file {args.state}: {exc}")
            return EXIT_VALIDATION
        print(f"PASS state file {args.state}: p={state.p} q={state.q} h={state.h}")
    failed = 0
    for check in run(full=args.full, seed=args.seed, reps=args.reps):
        failed += not check.ok
        detail = f" ({check.detail})" if check.detail else ""
        print(f"{'PASS' if check.ok else 'FAIL'} {check.name}{detail}", flush=True)
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}")
    return EXIT_OK if not failed else EXIT_RUNTIME


def build_parser():
    parser = _Parser(prog="ocean-tdp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prep", help="prepare a state file from two omics or a p-value matrix")
    p.add_argument("--omic-a", help="samples x features matrix (rows of the association matrix)")
    p.add_argument("--omic-b", help="samples x features matrix (columns of the association matrix)")
    p.add_argument("--pvalues", help="precomputed p-value matrix (header = column ids)")
    p.add_argument("--format", choices=("tsv", "csv"), help="input format (default: from extension)")
    p.add_argument("--features-as-rows", action="store_true", help="omic files are features x samples")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("tdp", help="pair/row/column TDP bounds for feature-set pairs")
    p.add_argument("--state", required=True)
    p.add_argument("--row-sets", required=True, help="GMT file of row feature sets")
    p.add_argument("--col-sets", required=True, help="GMT file of column feature sets")
    p.add_argument("--row-set", action="append", help="row set name (repeatable; default: all)")
    p.add_argument("--col-set", action="append", help="column set name (repeatable; default: all)")
    p.add_argument("--max-iter", type=_max_iter, default=DEFAULT_MAX_ITER)
    p.add_argument("--format", dest="output_format", choices=("tsv", "json"), default="tsv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_tdp)

    p = sub.add_parser("heatmap", help="SVG heatmap of a results table")
    p.add_argument("--results", required=True)
    p.add_argument("--metric", choices=("pair", "row", "col"), default="row")
    p.add_argument("--title")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("selftest", help="run built-in fixture and oracle checks")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--quick", action="store_true", default=True)
    mode.add_argument("--full", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=500, help="null-simulation replicates in --full mode")
    p.add_argument("--state", help="also check that this state file loads")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    warnings.simplefilter("default")
    try:
        return args.func(args)
    except (ValidationError, StateFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

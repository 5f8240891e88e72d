"""Command-line surface.

Subcommands: hull, membership, oracle-compare, verify, examples.
Exit codes: 0 success, 1 verification failure, 2 usage or schema error,
3 degenerate input.  Identical configuration and seed produce
byte-identical CSV/JSON/SVG artifacts.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cases import CASE_NAMES
from .hull import DomainError
from .ioutil import dumps_json
from .planar import EmptySetError, PlanarSet, SchemaError
from .tensors import parse_matrix
from .verify import SUITES, run_suite
from .workflows import classify_membership, compute_hull, example_artifacts, oracle_compare

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3


def _write(path: str | None, text: str):
    if path:
        Path(path).write_text(text)


def _load_set(path: str) -> PlanarSet:
    return PlanarSet.from_json(Path(path).read_text())


def _add_common(sub, with_input=True):
    if with_input:
        sub.add_argument("--input", required=True, help="planar set JSON file")
    sub.add_argument("--resolution", type=int, default=512, help="grid size N (>= 16)")
    sub.add_argument("--tol", type=float, default=None, help="separation tolerance override")
    sub.add_argument("--out-csv", default=None)
    sub.add_argument("--out-svg", default=None)
    sub.add_argument("--out-json", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdqc",
        description="Hulls of isotropic yield sets in the pressure/shear plane",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_hull = sub.add_parser("hull", help="compute the hull region of a planar set")
    _add_common(p_hull)

    p_mem = sub.add_parser("membership", help="classify a stress tensor against a hull")
    _add_common(p_mem)
    p_mem.add_argument(
        "--matrix",
        required=True,
        help="row-major matrix literal, rows ';', entries ',' "
        '(e.g. "1,0,0;0,0.25,0;0,0,0.25")',
    )

    p_cmp = sub.add_parser(
        "oracle-compare", help="separation hull vs lamination fixpoint"
    )
    _add_common(p_cmp)
    p_cmp.add_argument("--directions", type=int, default=720)

    p_ver = sub.add_parser("verify", help="run a periodic-field verification suite")
    p_ver.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--trials", type=int, default=None)
    p_ver.add_argument("--out-json", default=None)

    p_ex = sub.add_parser("examples", help="regenerate a named construction")
    p_ex.add_argument("--case", required=True)
    p_ex.add_argument("--resolution", type=int, default=512)
    p_ex.add_argument("--out-csv", default=None)
    p_ex.add_argument("--out-svg", default=None)
    p_ex.add_argument("--out-json", default=None)
    return parser


def _check_resolution(n: int):
    if n < 16:
        raise DomainError("--resolution must be at least 16")


def _cmd_hull(args) -> int:
    _check_resolution(args.resolution)
    h = _load_set(args.input)
    art = compute_hull(h, n_grid=args.resolution, tol=args.tol)
    _write(args.out_csv, art.region.to_csv())
    _write(args.out_svg, art.svg(title=Path(args.input).stem))
    report = dumps_json(art.report())
    _write(args.out_json, report)
    sys.stdout.write(report)
    return EXIT_OK


def _cmd_membership(args) -> int:
    _check_resolution(args.resolution)
    h = _load_set(args.input)
    sigma = parse_matrix(args.matrix)
    verdict = classify_membership(sigma, h, n_grid=args.resolution, tol=args.tol)
    report = dumps_json(verdict.as_dict())
    _write(args.out_json, report)
    sys.stdout.write(report)
    return EXIT_OK


def _cmd_oracle_compare(args) -> int:
    _check_resolution(args.resolution)
    h = _load_set(args.input)
    report = oracle_compare(
        h, n_grid=args.resolution, n_directions=args.directions, tol=args.tol
    )
    text = dumps_json(report)
    _write(args.out_json, text)
    sys.stdout.write(text)
    if report["connected"] and not report["within_tolerance"]:
        return EXIT_VERIFICATION
    return EXIT_OK


def _cmd_verify(args) -> int:
    report, failed = run_suite(args.suite, seed=args.seed, trials=args.trials)
    text = dumps_json(report)
    _write(args.out_json, text)
    sys.stdout.write(text)
    return EXIT_VERIFICATION if failed else EXIT_OK


def _cmd_examples(args) -> int:
    if args.case not in CASE_NAMES:
        sys.stderr.write(
            f"unknown case {args.case!r}; choose from {', '.join(CASE_NAMES)}\n"
        )
        return EXIT_USAGE
    _check_resolution(args.resolution)
    report, csv, svg = example_artifacts(args.case, n_grid=args.resolution)
    _write(args.out_csv or f"{args.case}.csv", csv)
    _write(args.out_svg or f"{args.case}.svg", svg)
    text = dumps_json(report)
    _write(args.out_json or f"{args.case}.json", text)
    sys.stdout.write(text)
    return EXIT_OK


_COMMANDS = {
    "hull": _cmd_hull,
    "membership": _cmd_membership,
    "oracle-compare": _cmd_oracle_compare,
    "verify": _cmd_verify,
    "examples": _cmd_examples,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except EmptySetError as exc:
        sys.stderr.write(f"degenerate input: {exc}\n")
        return EXIT_DEGENERATE
    except (SchemaError, DomainError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

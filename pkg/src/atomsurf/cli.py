"""Command-line front end: run scenarios, validate configs, list materials.

Exit codes: 0 success, 2 config schema violation, 3 quadrature
non-convergence (partial results are still written, failed rows carry a
reason), 4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .materials import MaterialError, load_material_db
from .runner import run_scenario
from .scenario import ScenarioError, load_scenario, validate_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atomsurf",
        description="surface-modified dipole couplings, collective decay "
                    "and chain transport")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker pool size (default: all cores)")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="override quadrature relative tolerance")
    parser.add_argument("--output-dir", default=".",
                        help="directory for result tables")
    parser.add_argument("--json", action="store_true",
                        help="also write a JSON mirror of each CSV")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario config")
    run.add_argument("config")
    val = sub.add_parser("validate", help="check a scenario config")
    val.add_argument("config")
    sub.add_parser("list-materials", help="show the bundled material database")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list-materials":
        try:
            db = load_material_db()
        except (MaterialError, FileNotFoundError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        for name in db.names():
            print(f"{name:10s} {db.source(name)}")
        return EXIT_OK

    if args.command == "validate":
        diagnostics = validate_config(args.config)
        if diagnostics:
            for d in diagnostics:
                print(d)
            return EXIT_CONFIG
        print("ok")
        return EXIT_OK

    # run
    try:
        scenario = load_scenario(args.config)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.tolerance is not None:
        scenario = dataclasses.replace(
            scenario,
            quadrature=dataclasses.replace(scenario.quadrature,
                                           rel_tol=args.tolerance))
    try:
        report = run_scenario(scenario, output_dir=args.output_dir,
                              threads=args.threads, json_mirror=args.json)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for p in report.paths:
        print(f"wrote {p} ({report.n_rows} rows)")
    if report.n_failed:
        print(f"{report.n_failed} sweep points failed to converge; rows "
              "are marked in the status column", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())

#!/usr/bin/env python3
"""Regenerate every bundled figure dataset into goldens/ (or a given dir).

Usage: python scripts/run_all_figures.py [output_dir] [--threads N]
"""

import argparse
import sys
import time
from pathlib import Path

from atomsurf.cli import main as cli_main

ROOT = Path(__file__).parent.parent


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("output_dir", nargs="?", default=str(ROOT / "goldens"))
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    configs = sorted((ROOT / "configs").glob("*.yaml"))
    worst = 0
    for cfg in configs:
        t0 = time.time()
        argv = ["--output-dir", args.output_dir]
        if args.threads:
            argv += ["--threads", str(args.threads)]
        code = cli_main(argv + ["run", str(cfg)])
        print(f"  {cfg.name}: exit {code} ({time.time() - t0:.1f}s)")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())

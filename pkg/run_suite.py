#!/usr/bin/env python3
"""
Desk-scale experiment suite.
Runs every experiment kind once and prints where the artifacts went.

Usage:
    python run_suite.py [--threads K] [--out DIR] [--skip-saa]

The two PDE experiments dominate the runtime; --skip-saa runs only the
analytic kinds.
"""

import argparse
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))


def main():
    parser = argparse.ArgumentParser(description="Run the desk-scale experiment suite")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--skip-saa", action="store_true")
    args = parser.parse_args()

    from src.cli import main as cli_main

    kinds = ["optimality5", "lognormal61", "dimension8", "bounds3"]
    if not args.skip_saa:
        kinds += ["example1", "example2"]

    print("=" * 60)
    print("SAA tail-bound experiments (desk scale)")
    print("=" * 60)

    codes = {}
    for kind in kinds:
        print(f"\nRunning {kind}...")
        print("-" * 40)
        codes[kind] = cli_main(
            ["run", kind, "--scale", "desk", "--threads", str(args.threads), "--out", str(args.out / kind)]
        )

    print("\n" + "=" * 60)
    print("Suite complete")
    print("=" * 60)
    for kind, code in codes.items():
        status = "ok" if code == 0 else f"exit {code}"
        print(f"  - {kind:<12} {status:>8}   {args.out / kind}")
    print()
    return max(codes.values())


if __name__ == "__main__":
    sys.exit(main())

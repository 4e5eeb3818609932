"""Run the acceptance criteria and record them in an output manifest.

    python3 scripts/run_acceptance.py --out runs/acceptance
    python3 scripts/run_acceptance.py 1 5 11
"""
import argparse
import sys

from quasilap.acceptance import run


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("criteria", nargs="*", type=int, help="criterion numbers (default: all)")
    ap.add_argument("--out", default=None, help="directory for manifest.json")
    args = ap.parse_args()
    results = run(args.criteria or None, args.out)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria pass")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

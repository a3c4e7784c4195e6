"""Measured Green-operator bands and recursion data per index chain.

    python3 scripts/band_report.py --b 1 2 3 5 --n 10
"""
import argparse
import json
import sys

from bubblediamond.cli import legendre_report


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--b", type=int, nargs="+", default=[1, 2, 3, 5])
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--json", help="also write the full reports here")
    args = p.parse_args(argv)
    full = {}
    for b in args.b:
        rep = legendre_report(b, args.n, precision=20)
        full[b] = rep
        print(f"b={b}  Green norm estimate {rep['green_norm']['estimate'][:12]}")
        for j, band in enumerate(rep["bandwidth_report"]):
            print(f"  slot {j:2d}: band {sorted(int(k) for k in band)}")
        for name, checks in rep["bound_checks"].items():
            flags = " ".join(f"{k}={v}" for k, v in checks.items())
            print(f"  {name:11s} {flags}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(full, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Score every reading of the recursions and print the residual table.

    python3 scripts/convention_table.py --b 2 --quadrature
"""
import argparse
import sys

from bubblediamond.coefficients import ConventionError
from bubblediamond.conventions import resolve_conventions


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--b", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--quadrature", action="store_true", help="add the finite-element stage")
    args = p.parse_args(argv)
    for b in args.b:
        try:
            rep = resolve_conventions(b, quadrature_levels="auto" if args.quadrature else None)
        except ConventionError as exc:
            print(exc)
            return 3
        print(f"b={b}: survivor {rep.convention.label()} (levels {rep.levels})")
        print(rep.table())
    return 0


if __name__ == "__main__":
    sys.exit(main())

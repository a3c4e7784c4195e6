"""Write the sample CSVs behind the figure panels.

    python3 scripts/figure_data.py --out figures
"""
import argparse
import os
import sys

from bubblediamond.cli import main as cli_main

PANELS = {
    "fig3": [(b, "f:0:1") for b in (1, 2, 3, 5)],
    "fig4": [(2, f"f:{j}:1") for j in range(4)],
    "fig5": [(2, s) for s in ("P:0:1", "P:0:2", "P:1:1", "P:1:2")],
    "fig6": [(b, f"legendre:{n}") for b in (1, 2) for n in range(5)],
}
LEVELS = {1: 8, 2: 6, 3: 5, 5: 5}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--out", default="figures")
    p.add_argument("--precision", default="20")
    args = p.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    for fig, panels in PANELS.items():
        for b, fn in panels:
            name = f"{fig}_b{b}_{fn.replace(':', '')}.csv"
            cmd = ["sample", "--b", str(b), "--level", str(LEVELS[b]), fn,
                   "--precision", args.precision, "--out", os.path.join(args.out, name)]
            if not fn.startswith("legendre"):
                cmd.append("--exact")
            code = cli_main(cmd)
            if code:
                return code
            print(name)
    return 0


if __name__ == "__main__":
    sys.exit(main())

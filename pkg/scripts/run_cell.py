#!/usr/bin/env python3
"""Phase separation on the idealized-cell surface (configs/cell_a05.cfg).

The full config runs to t = 5 on ~12.7k dofs; pass a shorter horizon for a
quick look, e.g.  --override t_end=0.25 --override vtk_interval=10.
"""

import argparse

from savfem.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/cell_a05.cfg")
    ap.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    args = ap.parse_args()

    argv = ["solve", "--config", args.config, "--export-surface"]
    for item in args.override:
        argv += ["--override", item]
    return cli_main(argv)


if __name__ == "__main__":
    raise SystemExit(main())

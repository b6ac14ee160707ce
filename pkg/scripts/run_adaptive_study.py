#!/usr/bin/env python3
"""Adaptive step-size behavior on the coarse-sphere 50/50 run.

Runs configs/adaptive_a05.cfg (overridable) and prints the step-size
trajectory: the controller keeps dt near the initial value through spinodal
decomposition, then grows it by orders of magnitude as the dynamics slow.
"""

import argparse

from savfem.config import load_config
from savfem.experiments import run_phase_separation


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/adaptive_a05.cfg")
    ap.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    args = ap.parse_args()

    config = load_config(args.config, args.override)
    result = run_phase_separation(config)
    dts = [r.dt for r in result.reports]
    print(f"accepted steps: {result.accepted}   rejected: {result.rejected}")
    print(f"reached t = {result.state.t:.4f}")
    print(f"dt: initial {config.dt:.3g}  final {dts[-1]:.3g}  max {max(dts):.3g}")
    marks = [0, len(dts) // 4, len(dts) // 2, 3 * len(dts) // 4, len(dts) - 1]
    for k in marks:
        print(f"  step {k + 1:4d}: t = {result.reports[k].t:8.4f}  dt = {dts[k]:.4g}")
    print(f"energy csv: {result.energy_csv}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

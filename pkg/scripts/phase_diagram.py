"""Simulated bulk density over a (ρ₋, ρ₊) grid next to the predicted phase.

    python3 scripts/phase_diagram.py --dir cooperative --n 9 --L 200 > coop.csv
"""

import argparse
import sys

import numpy as np

from tasep_entropy import Params, SimConfig
from tasep_entropy.serialization import dumps_csv
from tasep_entropy.simulator import default_threads, phase_sweep, sweep_agreement, sweep_grid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0], allow_abbrev=False)
    ap.add_argument("--dir", dest="direction", choices=["competitive", "cooperative"], default="competitive")
    ap.add_argument("--n", type=int, default=9, help="axis points in (0,1)")
    ap.add_argument("--L", type=int, default=200)
    ap.add_argument("--t-burnin", type=float, default=2e4)
    ap.add_argument("--t-measure", type=float, default=5e4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    axis = np.linspace(0.05, 0.95, args.n)
    template = SimConfig(args.L, Params(0.25, 0.75), args.t_burnin, args.t_measure, args.seed)
    rows = phase_sweep(sweep_grid(axis), args.direction, template, threads=default_threads())
    header = ["rho_minus", "rho_plus", "phase", "predicted", "measured", "stderr", "excluded", "agree"]
    sys.stdout.write(dumps_csv(header, [[getattr(r, h) for h in header] for r in rows]))
    print(f"agreement {sweep_agreement(rows):.1%}", file=sys.stderr)


if __name__ == "__main__":
    main()

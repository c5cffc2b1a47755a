"""Compare the theta'-sum tau derivative with finite differences under both hold conventions.

For each genus-1 block and a range of b scalings, print the residual of
  * the theta'-sum form against differences at fixed a - b tau / (2 pi i),
  * the fixed-a derivative against differences at fixed a,
  * the theta'-sum form against differences at fixed a.
The last column is small only at b = 0.

    python3 scripts/tau_derivative_convention.py [--config configs/default.json]
"""

import argparse
import json

import numpy as np

from whithamlab import genus1 as g1
from whithamlab import suites
from whithamlab.numerics import ToleranceConfig


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="configs/default.json")
    parser.add_argument("--samples", type=int, default=10)
    args = parser.parse_args()
    config = json.loads(open(args.config).read())
    tol = ToleranceConfig()
    print(f"{'block':8s} {'contour':8s} {'|b|':>8s} {'sum/comoving':>14s} {'fixed-a':>10s} {'sum/fixed-a':>12s}")
    for block in config["genus1"]:
        base = suites.build_genus1(block, tol)
        for scale in (0.0, 0.5, 1.0, 2.0):
            cfg = base.replace(b=base.b * scale)
            zs = g1.sample_z_g1(cfg, args.samples, np.random.default_rng(0), list(cfg.contours)).points
            for name in cfg.contours:
                if name == "small":
                    continue
                r = suites.derivative_residuals_g1(cfg, name, zs)
                print(f"{block['name']:8s} {name:8s} {abs(cfg.b):8.3f} {r['dtau']:14.2e} "
                      f"{r['dtau_fixed_a']:10.2e} {r['dtau_sum_form_fixed_a']:12.2e}")


if __name__ == "__main__":
    main()

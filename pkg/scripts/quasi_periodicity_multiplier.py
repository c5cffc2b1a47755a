"""Residual of phi(z + tau) = mult * phi(z) for mult = exp(-4 pi i eta) and exp(-2 pi i eta).

    python3 scripts/quasi_periodicity_multiplier.py [--config configs/default.json]
"""

import argparse
import itertools
import json

from whithamlab import genus1 as g1
from whithamlab import suites
from whithamlab.numerics import ToleranceConfig


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="configs/default.json")
    args = parser.parse_args()
    config = json.loads(open(args.config).read())
    tol = ToleranceConfig()
    print(f"{'block':8s} {'pair':12s} {'l':>2s} {'period 1':>10s} {'exp(-4pi i eta)':>16s} {'exp(-2pi i eta)':>16s}")
    for block in config["genus1"]:
        cfg = suites.build_genus1(block, tol)
        names = [n for n in cfg.contours if n != "small"]
        for a, b in itertools.combinations(names, 2):
            for l in range(1, cfg.n + 2):
                r = g1.quasi_periodicity_check(a, b, l, cfg, sample_count=10)
                print(f"{block['name']:8s} {a + ',' + b:12s} {l:2d} {r['period_1']:10.2e} "
                      f"{r['period_tau']:16.2e} {r['period_tau_printed_multiplier']:16.2e}")


if __name__ == "__main__":
    main()

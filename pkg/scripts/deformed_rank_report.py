"""Measured cross rank of deformed genus-0 potentials, with field counts.

Sweeps the first deformation coefficient to show whether the measured rank
depends on it.

    python3 scripts/deformed_rank_report.py [--config configs/default.json] [--block n1_loops]
"""

import argparse
import json

from whithamlab import genus0 as g0
from whithamlab import suites
from whithamlab.numerics import ToleranceConfig


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="configs/default.json")
    parser.add_argument("--block", default="n1_loops")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    config = json.loads(open(args.config).read())
    block = next(b for b in config["genus0"] if b["name"] == args.block)
    cfg = suites.build_genus0(block, ToleranceConfig())
    base = suites.build_deformation(block["deformation"])
    names = block["deformation"]["contours"]
    first = next((i, 0) for i, row in enumerate(base.v) if row)
    v0 = base.v[first[0]][first[1]]
    print(f"d = {list(base.d)}; stated field count {sum(base.d)}, listed {base.field_count}")
    print(f"{'v':>16s} {'rank':>4s} {'dropped':>7s}  normalised singular values")
    for scale in (0.0, 0.5, 1.0, 2.0):
        spec = base.with_coefficient(*first, v0 * scale)
        r = g0.deformed_cross_rank(cfg, spec, names, seed=args.seed)
        sv = r["singular_values"]
        head = " ".join(f"{x / sv[0]:.1e}" for x in sv[:6]) if sv else "-"
        print(f"{complex(spec.v[first[0]][first[1]])!s:>16s} {r['rank']:4d} {r['columns_dropped']:7d}  {head}")


if __name__ == "__main__":
    main()

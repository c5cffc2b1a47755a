"""Cross and potential span ranks with leading singular values, genus 0 and genus 1.

    python3 scripts/rank_table.py [--config configs/default.json] [--seed 0]
"""

import argparse
import json

from whithamlab import genus0 as g0
from whithamlab import genus1 as g1
from whithamlab import suites
from whithamlab.numerics import ToleranceConfig


def row(genus, name, mode, probe):
    sv = probe.singular_values / probe.singular_values[0]
    head = " ".join(f"{x:.1e}" for x in sv[: probe.expected + 2])
    print(f"{genus:6s} {name:9s} {mode:10s} {probe.rank:4d} {probe.expected:8d} {probe.gap:9.1e}  {head}")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--config", default="configs/default.json")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    config = json.loads(open(args.config).read())
    tol = ToleranceConfig()
    print(f"{'genus':6s} {'block':9s} {'mode':10s} {'rank':>4s} {'expected':>8s} {'gap':>9s}  normalised singular values")
    for block in config["genus0"]:
        cfg = suites.build_genus0(block, tol)
        names = [n for n in cfg.contours if n != "small" and "deformation" not in block]
        if len(names) < 3:
            continue
        for mode in ("cross", "potentials"):
            row("0", block["name"], mode, g0.span_probe_g0(cfg, names, mode, args.seed))
    for block in config["genus1"]:
        cfg = suites.build_genus1(block, tol)
        names = [n for n in cfg.contours if n != "small"]
        for mode in ("cross", "potentials"):
            row("1", block["name"], mode, g1.span_probe_g1(cfg, names, mode, args.seed))


if __name__ == "__main__":
    main()

"""Primitive points on x1 x2 = x3^2 that vanish for a congruence reason.

Counts every cone point in the positive octant with x = (5,5,5) mod 6, shows that none of them
is primitive, and compares with the positive predicted main term.
"""
import argparse

from conelab.cli import load_config
from conelab.harness import obstruction_probe


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bmax", type=float, default=2e4)
    args = ap.parse_args()
    cfg = load_config("obstruction")
    grid = [args.bmax / 8, args.bmax / 4, args.bmax / 2, args.bmax]
    rep = obstruction_probe(cfg.quadratic_form, cfg.weight_function, cfg.condition, grid)
    print(f"condition: x = {cfg.condition.gamma} mod {cfg.condition.L}")
    print(f"{'B':>10} {'non-primitive':>14} {'primitive':>10}")
    for B, n, p in zip(rep.B, rep.nonprimitive_counts, rep.counts):
        print(f"{B:>10.0f} {n:>14.3f} {p:>10.3f}")
    region = rep.exhaustive_region
    print(f"cone points searched: {region['nonprimitive_points']}, primitive: {region['primitive_points']}")
    print(f"predicted (1/2) S I = {rep.leading_constant:.4e}, fitted G = {rep.G_estimate:.4e}")
    print(f"verdict: {rep.verdict}")


if __name__ == "__main__":
    main()

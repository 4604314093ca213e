"""Tabulate the complete sums S_q(c) next to their factorised closed forms."""
import argparse

from conelab.arith import omega_split
from conelab.expsums import S2_factor, SumContext, eta_coefficient, partial_F, sum_S1_closed, sum_Sq
from conelab.quadform import PYTHAGOREAN


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=int, nargs=3, default=[1, 0, 0])
    ap.add_argument("--qmax", type=int, default=30)
    args = ap.parse_args()
    ctx = SumContext(PYTHAGOREAN, 1, (0, 0, 0))
    c = tuple(args.c)
    print(f"{'q':>4} {'direct':>24} {'S1 * S2':>24}")
    for q in range(1, args.qmax + 1):
        q1, q2 = omega_split(q, ctx.omega)
        a = sum_Sq(ctx, q, c, "direct")
        b = sum_S1_closed(ctx, q1, q2, c) * S2_factor(ctx, q1, q2, c)
        print(f"{q:>4} {a.real:>11.4f}{a.imag:+11.4f}i {b.real:>11.4f}{b.imag:+11.4f}i")
    eta = eta_coefficient(ctx, c)
    for X in (250, 500, 1000):
        F = partial_F(ctx, c, X)
        print(f"X = {X:>5}: F(c; X) / X = {F.real / X:+.5f}, eta = {eta.value.real:+.5f}")


if __name__ == "__main__":
    main()

"""Print n(u1(t)) next to t*g3 on t = floor(10^(i/2)), i = 1..6, for the cubic field of configs/cubic.json.

    python3 scripts/reproduce_table.py [--config configs/cubic.json] [--imax 8]
"""

import argparse
import math

from unitgaps.cli import Context, RunConfig
from unitgaps.quasi_analyzer import factorization_check, predict_expansion


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="configs/cubic.json")
    ap.add_argument("--imax", type=int, default=6)
    args = ap.parse_args()

    ctx = Context(RunConfig.load(args.config))
    us, qf = ctx.units, ctx.flow
    fmt = lambda xs: "(" + ", ".join(f"{float(x):.5f}" for x in xs) + ")"
    print(f"beta = {fmt(us.beta_float)}  theta = {fmt(qf.theta)}"
          f"  gamma = {qf.gamma:.5f}  alpha = {qf.alpha:.5f}")
    print(f"{'i':>2} {'t':>7}  {'n(u1(t))':<28} {'t*g3':<40} {'err':>9} {'err*t^2':>9} {'factorization':>13}")
    for i in range(1, args.imax + 1):
        t = math.floor(10 ** (i / 2))
        p = predict_expansion(qf, us, t)
        exact = "(" + ", ".join(str(c) for c in p.exact) + ")"
        pred = "(" + ", ".join(f"{x:.5f}" for x in p.scaled) + ")"
        e = float(p.coord_errors.max())
        res = factorization_check(qf, us, t).residual
        print(f"{i:>2} {t:>7}  {exact:<28} {pred:<40} {e:9.2e} {e * t * t:9.3f} {res:13.1e}")


if __name__ == "__main__":
    main()

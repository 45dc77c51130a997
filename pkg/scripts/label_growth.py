"""Track how the set of rescaled spacing labels grows with t.

Two views: the log grid floor(10^(i/4)) used by the acceptance suite, and a
dense integer sweep that reports every t at which a new label first appears.

    python3 scripts/label_growth.py [--config configs/cubic.json] [--dense 300]
"""

import argparse

from unitgaps.cli import Context, RunConfig
from unitgaps.gap_engine import sweep_distinct
from unitgaps.unit_flow import label_set, rescale, unit_at

LOG_GRID = [int(10 ** (i / 4)) for i in range(4, 13)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="configs/cubic.json")
    ap.add_argument("--dense", type=int, default=300, help="last t of the integer sweep (0 to skip)")
    args = ap.parse_args()

    ctx = Context(RunConfig.load(args.config))
    F, us, R = ctx.field, ctx.units, ctx.region

    L = label_set(F, us, R, LOG_GRID)
    print("log grid:")
    for t, n in L.history:
        print(f"  t={t!s:>5}  |S|={n}")
    print(f"  burn-in point: {L.burn_in()}")

    if args.dense:
        seen, first = set(), []
        for row in sweep_distinct(F, R, range(2, args.dense + 1)):
            u = unit_at(us, row.t)
            new = {rescale(F, s, u) for s in row.spacings} - seen
            if new:
                first.append((row.t, len(new)))
                seen |= new
        print(f"dense sweep t <= {args.dense}: {len(seen)} labels")
        print("  new labels at: " + ", ".join(f"{t}(+{n})" for t, n in first))


if __name__ == "__main__":
    main()

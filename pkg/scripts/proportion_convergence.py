"""max_j |p_j(t) - vol(P_j(v(t)))/vol(R)| against t, with a log-log slope.

    python3 scripts/proportion_convergence.py --config configs/cubic_simplex.json --t 50,100,200,400
"""

import argparse

import numpy as np

from unitgaps.cli import Context, RunConfig
from unitgaps.gap_engine import spectrum
from unitgaps.partition_volumes import partition_lattice, predicted_proportions
from unitgaps.unit_flow import label_set, proportions, unit_at


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default="configs/cubic_simplex.json")
    ap.add_argument("--t", default="50,100,200,400")
    ap.add_argument("--method", default="auto")
    args = ap.parse_args()

    ts = [int(x) for x in args.t.split(",")]
    ctx = Context(RunConfig.load(args.config))
    F, us, R = ctx.field, ctx.units, ctx.region
    labels = label_set(F, us, R, ts)
    diffs = []
    print(f"region={R.kind} labels={labels.J}")
    print(f"{'t':>6} {'points':>8} {'max diff':>10} {'t*diff':>8} {'budget':>9} method")
    for t in ts:
        s = spectrum(F, R, t)
        u = unit_at(us, t)
        part = partition_lattice(F, R, s, labels, u)
        v = part.shifts.normalized_float()
        v[~part.shifts.integral] = 1e9   # labels absent at this t never fire
        pred = predicted_proportions(R, v, args.method)
        p = np.array([float(x) for x in proportions(F, s, labels, u)])
        d = float(np.max(np.abs(p - pred.values)))
        diffs.append(d)
        print(f"{t:>6} {s.count:>8} {d:10.3e} {t * d:8.3f} {pred.error_budget:9.1e} {pred.method}")
    if len(ts) > 1:
        slope = np.polyfit(np.log(ts), np.log(diffs), 1)[0]
        print(f"log-log slope: {slope:.3f}")


if __name__ == "__main__":
    main()

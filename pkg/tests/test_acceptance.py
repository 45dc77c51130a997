"""Acceptance criteria 1-12 at their stated tolerances.

Each test records one ``CRITERION n: PASS|FAIL ...`` line, printed in the
terminal summary, then asserts.
"""

import json
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, LOG_GRID
from unitgaps.cli import run
from unitgaps.gap_engine import spectrum, sweep_distinct, three_gap_check
from unitgaps.numberfield import FieldElement, NumberField, matmul_exact
from unitgaps.partition_volumes import check_words, partition_lattice, predicted_proportions
from unitgaps.quasi_analyzer import (commutator_norms, exp_errors, factorization_check,
                                     orbit_point, g3_raw, predict_expansion)
from unitgaps.unit_flow import label_set, proportions, transference_constants, unit_at

CUBIC_CONFIG = str(Path(__file__).resolve().parent.parent / "configs" / "cubic.json")
TABLE_T = [3, 10, 31, 100, 316, 1000]
EXACT = {3: (-5, 8, -2), 10: (-3, 4, 0), 31: (-41, 68, -18), 100: (186, -308, 81),
         316: (-20, 74, -63), 1000: (424, -609, 61)}
TG3 = {3: (-4.80194, 7.86690, -1.97869), 10: (-3.02177, 4.01463, -0.00234),
       31: (-40.99761, 67.99839, -17.99974), 100: (186.00012, -308.00008, 81.00001),
       316: (-20.00001, 74.00001, -63.00000), 1000: (424.00000, -609.00000, 61.00000)}


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def timed_cli(capsys, *argv):
    t0 = time.perf_counter()
    code = run(list(argv))
    elapsed = time.perf_counter() - t0
    out = capsys.readouterr().out
    return code, out, elapsed


@pytest.fixture(scope="module")
def sweep300(cubic, unit_square):
    t0 = time.perf_counter()
    rows = sweep_distinct(cubic, unit_square, range(1, 301))
    return rows, time.perf_counter() - t0


def test_criterion_01_rates(capsys):
    code, out, elapsed = timed_cli(capsys, "rates", "--config", CUBIC_CONFIG)
    lines = [l for l in out.splitlines() if l and not l.startswith("#")][1:]
    beta = [float(l.rsplit(",", 1)[1]) for l in lines]
    err = max(abs(b - r) for b, r in zip(beta, [1.96080, -0.70061]))
    ok = code == 0 and err <= 1e-5 and elapsed < 1.0
    assert record(1, ok, f"beta={beta} err={err:.1e} runtime={elapsed:.2f}s")


def test_criterion_02_flow(capsys):
    code, out, elapsed = timed_cli(capsys, "flow", "--config", CUBIC_CONFIG)
    rows = [l.split(",") for l in out.splitlines() if l and not l.startswith(("#", "mode"))]
    mus = [complex(float(r[1]), float(r[2])) for r in rows]
    ref = [6.16003j, -2.20103j, -3 + 3.95900j]
    err = max(max(abs(a.real - b.real), abs(a.imag - b.imag)) for a, b in zip(mus, ref))
    k = sum(r[3] == "rotational" for r in rows)
    ok = code == 0 and err <= 1e-4 and k == 2 and elapsed < 1.0
    assert record(2, ok, f"eigenvalues err={err:.1e} k={k} runtime={elapsed:.2f}s "
                         "(order: rotational then decaying)")


def test_criterion_03_table(capsys):
    code, out, elapsed = timed_cli(capsys, "table6", "--config", CUBIC_CONFIG, "--format", "json")
    rows = json.loads(out)
    exact_ok = all(tuple(int(c) for c in r["exact"]) == EXACT[int(r["t"])] for r in rows)
    err = max(abs(float(a) - b) for r in rows for a, b in zip(r["tg3"], TG3[int(r["t"])]))
    ok = code == 0 and exact_ok and len(rows) == 6 and err <= 1e-4 and elapsed < 5.0
    assert record(3, ok, f"exact rows match={exact_ok} max |t*g3 - ref|={err:.1e} runtime={elapsed:.2f}s")


def test_criterion_04_error_law(cubic_flow, cubic_units):
    errs = {t: float(predict_expansion(cubic_flow, cubic_units, t).coord_errors.max()) for t in TABLE_T}
    within = all(errs[t] <= 10 / t for t in TABLE_T if t >= 10)
    seq = [errs[t] for t in TABLE_T if t >= 10]
    decreasing = all(b < a for a, b in zip(seq, seq[1:]))
    detail = " ".join(f"t={t}:{e:.1e}" for t, e in errs.items())
    assert record(4, within and decreasing, f"|n - t g3|_inf {detail}; <=10/t {within}; decreasing {decreasing}")


def test_criterion_05_distinct_bound(sweep300):
    rows, elapsed = sweep300
    worst = max(rows, key=lambda r: r.D)
    ok = worst.D <= 10 and elapsed < 120
    assert record(5, ok, f"max D(t)={worst.D} at t={worst.t} over t<=300; runtime={elapsed:.1f}s")


def test_criterion_06_three_gap():
    rng = random.Random(20240601)
    ns = []
    while len(ns) < 100:
        n = rng.randrange(2, 10 ** 6)
        if math.isqrt(n) ** 2 != n and n not in ns:
            ns.append(n)
    t0 = time.perf_counter()
    worst, violations = 0, 0
    for n in ns:
        a = math.isqrt(n)
        # omega = sqrt(n) - floor(sqrt(n)) in (0, 1), irrational
        F = NumberField([1, 0, -n], [[1, -a]], [f"{math.sqrt(n) - a:.12f}"])
        rep = three_gap_check(F, 500)
        worst = max(worst, rep.max_D)
        violations += len(rep.violations)
    elapsed = time.perf_counter() - t0
    ok = worst <= 3 and violations == 0 and elapsed < 60
    assert record(6, ok, f"100 quadratic irrationals, t<=500: max D={worst} violations={violations} "
                         f"runtime={elapsed:.1f}s")


def test_criterion_07_label_stability(cubic, cubic_units, unit_square):
    labels = label_set(cubic, cubic_units, unit_square, LOG_GRID)
    covered = True
    for t in LOG_GRID:
        s = spectrum(cubic, unit_square, t)
        p = proportions(cubic, s, labels, unit_at(cubic_units, t))  # raises if a spacing is missing
        covered &= sum(p) == 1
    sizes = [n for _, n in labels.history]
    half = len(LOG_GRID) // 2
    stable = len(set(sizes[half:])) == 1
    burn = labels.burn_in()
    ok = covered and stable
    assert record(7, ok, f"all spacings labelled={covered}; |S| along grid={sizes}; "
                         f"stable over final half={stable}; burn-in t={burn}")


def test_criterion_08_transference(cubic, cubic_units, sweep300):
    rows, _ = sweep300
    kp = transference_constants(cubic, cubic_units)["K_prime"]
    worst = max((cubic.sigma1_float(r.max_spacing) * r.t ** 2, r.t) for r in rows if r.D)
    ok = worst[0] <= kp
    assert record(8, ok, f"max Delta_D(t) t^2={worst[0]:.4f} at t={worst[1]} <= K'={kp:.2f}")


def test_criterion_09_dual_path(cubic, cubic_units, unit_square):
    ts = [20, 50, 100, 200]
    labels = label_set(cubic, cubic_units, unit_square, ts)
    details, ok = [], True
    for t in ts:
        s = spectrum(cubic, unit_square, t)
        part = partition_lattice(cubic, unit_square, s, labels, unit_at(cubic_units, t))
        words = check_words(part, 1)
        same = bool(np.array_equal(part.direct, part.formula))
        ok &= same
        details.append(f"t={t}: {s.count} points, {len(words)} words")
    assert record(9, ok, "formula == direct and length-2 words match; " + "; ".join(details))


def test_criterion_10_proportion_convergence(cubic, cubic_units, unit_square, cubic_simplex):
    ts = [50, 100, 200, 400]

    def diffs(region):
        labels = label_set(cubic, cubic_units, region, ts)
        out, budgets = [], []
        for t in ts:
            s = spectrum(cubic, region, t)
            u = unit_at(cubic_units, t)
            part = partition_lattice(cubic, region, s, labels, u)
            v = part.shifts.normalized_float()
            v[~part.shifts.integral] = 1e9
            pred = predicted_proportions(region, v)
            p = np.array([float(x) for x in proportions(cubic, s, labels, u)])
            out.append(float(np.max(np.abs(p - pred.values))))
            budgets.append(pred.error_budget)
        slope = float(np.polyfit(np.log(ts), np.log(out), 1)[0])
        return out, budgets, slope

    d, b, slope = diffs(cubic_simplex)
    in_range = -1.4 <= slope <= -0.6
    budget_ok = all(4 * e <= x for e, x in zip(b, d))
    _, _, box_slope = diffs(unit_square)
    ok = in_range and budget_ok
    assert record(10, ok, f"simplex R: diffs={[f'{x:.2e}' for x in d]} slope={slope:.2f} "
                          f"max volume budget={max(b):.1e}; (unit square slope={box_slope:.2f}, info)")


def test_criterion_11_linear_algebra(cubic_flow, cubic_units):
    ee = max(exp_errors(cubic_flow))
    cn = max(commutator_norms(cubic_flow).values())
    fr = [factorization_check(cubic_flow, cubic_units, t) for t in TABLE_T]
    res = max(r.residual for r in fr)
    imag = 0.0
    for t in TABLE_T:
        psi, x = orbit_point(cubic_flow, cubic_units, t)
        imag = max(imag, float(np.max(np.abs(g3_raw(cubic_flow, psi, x).imag))))
    ok = ee <= 1e-9 and cn <= 1e-10 and res <= 1e-8 and imag <= 1e-10
    assert record(11, ok, f"exp err={ee:.1e} commutator={cn:.1e} factorization={res:.1e} "
                          f"g3 imag={imag:.1e}")


def test_criterion_12_exactness(cubic):
    rng = random.Random(12)

    def rand_el():
        return FieldElement(tuple(Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for _ in range(3)))

    t0 = time.perf_counter()
    failures = 0
    for i in range(10_000):
        a, b, c = rand_el(), rand_el(), rand_el()
        kind = i % 4
        if kind == 0:
            good = cubic.mul(cubic.mul(a, b), c) == cubic.mul(a, cubic.mul(b, c))
        elif kind == 1:
            good = cubic.mul(a, b + c) == cubic.mul(a, b) + cubic.mul(a, c)
        elif kind == 2:
            good = a.is_zero() or cubic.mul(a, cubic.inv(a)) == cubic.one()
        else:
            good = cubic.mult_matrix(cubic.mul(a, b)) == matmul_exact(cubic.mult_matrix(a),
                                                                     cubic.mult_matrix(b))
        failures += not good
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 10
    assert record(12, ok, f"10000 identities, failures={failures}, runtime={elapsed:.1f}s")

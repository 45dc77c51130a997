from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unitgaps.gap_engine import ConvexRegion, spectrum
from unitgaps.partition_volumes import (PartitionMismatch, RegionExpression, check_words,
                                        classify_points, lipschitz_estimate, partition_lattice,
                                        predicted_proportions, region_partition, region_volume,
                                        shift_vectors, volume, word_counts_formula,
                                        word_counts_window, word_regions)
from unitgaps.unit_flow import LabelSet, label_set, positive_unit, rescale, unit_at


@pytest.fixture(scope="module")
def square_100(cubic, cubic_units, unit_square, square_labels):
    t = 100
    s = spectrum(cubic, unit_square, t)
    u = unit_at(cubic_units, t)
    return s, u, partition_lattice(cubic, unit_square, s, square_labels, u)


@pytest.fixture(scope="module")
def simplex_labels(cubic, cubic_units, cubic_simplex):
    return label_set(cubic, cubic_units, cubic_simplex, [10, 17, 31, 56, 100, 177, 200])


def test_shift_of_inverse_unit_is_zero(cubic, cubic_units):
    u = unit_at(cubic_units, 50)
    L = LabelSet.from_elements(cubic, [cubic.inv(positive_unit(cubic, u))])
    sv = shift_vectors(cubic, L, u, 50)
    assert sv.exact == ((0, 0),)
    assert sv.integral.all()


def test_shift_vectors_are_integral_for_observed_labels(cubic, cubic_units, square_labels):
    sv = shift_vectors(cubic, square_labels, unit_at(cubic_units, 100), 100)
    assert sv.J == square_labels.J
    assert sv.integral.any()


@pytest.mark.parametrize("t", [20, 50, 200])
def test_partition_matches_direct(cubic, cubic_units, unit_square, square_labels, t):
    s = spectrum(cubic, unit_square, t)
    part = partition_lattice(cubic, unit_square, s, square_labels, unit_at(cubic_units, t))
    assert part.sizes().sum() == s.count - 1
    assert np.array_equal(part.direct, part.formula)


def test_partition_mismatch_detected(cubic, cubic_units, unit_square, square_labels):
    s = spectrum(cubic, unit_square, 50)
    # the same labels listed in reverse make "first j" pick the wrong class
    rev = LabelSet(tuple(reversed(square_labels.elements)))
    with pytest.raises(PartitionMismatch):
        partition_lattice(cubic, unit_square, s, rev, unit_at(cubic_units, 50))


def test_golden_three_classes(golden, golden_units):
    t = 20
    s = spectrum(golden, ConvexRegion.box([0], [1]), t)
    u = unit_at(golden_units, t)
    L = LabelSet.from_elements(golden, [rescale(golden, d, u) for d in s.distinct])
    part = partition_lattice(golden, ConvexRegion.box([0], [1]), s, L, u)
    assert L.J == 3 and np.all(part.sizes() > 0)


def test_lattice_oracle_scaled_region(cubic, unit_square, square_100):
    """Classify integer points in R(t) with float arithmetic that is exact for integers."""
    s, _, part = square_100
    t = 100
    big = ConvexRegion.box([0, 0], [t, t])
    v = part.shifts.lattice.astype(float)
    v[~part.shifts.integral] = 1e9   # never lands inside
    lab = classify_points(big, v, s.points.astype(float))
    assert np.array_equal(lab[:-1], part.formula[:-1])


def test_region_partition_zero_shift(unit_square):
    parts = region_partition(unit_square, [(0, 0), (Fraction(1, 3), 0)])
    assert volume(parts[0], "exact-box").exact == 1
    assert volume(parts[1], "exact-box").exact == 0


def test_region_partition_huge_shift(unit_square):
    parts = region_partition(unit_square, [(5, 5), (-7, 0)])
    assert all(volume(p, "exact-box").exact == 0 for p in parts)
    pred = predicted_proportions(unit_square, [(5, 5), (-7, 0)])
    assert pred.total == 0


def test_exact_box_small_case(unit_square):
    v = [(Fraction(1, 2), 0), (0, Fraction(1, 4)), (Fraction(-1, 2), Fraction(-1, 2))]
    pred = predicted_proportions(unit_square, v)
    # [0,1/2)x[0,1); then [1/2,1)x[0,3/4); then [1/2,1)x[3/4,1) shifted down-left lands inside
    assert [Fraction(x).limit_denominator(100) for x in pred.values] == [Fraction(1, 2), Fraction(3, 8), Fraction(1, 8)]
    assert pred.total == 1


def test_volume_methods_agree(unit_square, square_100):
    _, _, part = square_100
    v = part.shifts.normalized()
    v = [row for row, ok in zip(v, part.shifts.integral) if ok]
    exact = predicted_proportions(unit_square, v, "exact-box")
    assert exact.total == pytest.approx(1, abs=1e-12)
    mc = predicted_proportions(unit_square, v, "monte-carlo", samples=1 << 16)
    assert np.all(np.abs(mc.values - exact.values) <= np.maximum(mc.errors, 1e-3))
    poly = predicted_proportions(unit_square, v, "polygon")
    assert np.allclose(poly.values, exact.values, atol=1e-9)
    j = int(np.argmax(exact.values))
    g = volume(region_partition(unit_square, v)[j], "grid", resolution=256)
    assert abs(g.estimate - exact.values[j]) <= g.error + 1e-12


def test_exact_box_rejects_simplex(cubic_simplex):
    with pytest.raises(ValueError):
        volume(RegionExpression(cubic_simplex, ((), (Fraction(1, 10), 0))), "exact-box")


def test_simplex_volume(cubic, cubic_simplex):
    base = region_volume(cubic_simplex)
    poly = volume(RegionExpression(cubic_simplex), "polygon")
    w = [cubic.sigma1_float(cubic.omega(j)) for j in (1, 2)]
    assert base.estimate == pytest.approx(1 / (2 * w[0] * w[1]), rel=1e-14)
    assert abs(poly.estimate - base.estimate) < 1e-9


def test_lipschitz_finite(unit_square, square_100):
    _, _, part = square_100
    v = part.shifts.normalized_float()[part.shifts.integral]
    lip = lipschitz_estimate(unit_square, v, 1e-3, trials=4, samples=1 << 14)
    assert np.isfinite(lip) and lip < 100


def test_words_formula_equals_window(square_100):
    _, _, part = square_100
    for l in (0, 1, 2):
        assert word_counts_formula(part, l) == word_counts_window(part, l)
    w0 = check_words(part, 0)
    assert {k[0]: c for k, c in w0.items()} == {j: int(c) for j, c in enumerate(part.sizes()) if c}


def test_word_regions_single_letter(unit_square):
    v = [(Fraction(1, 2), 0), (Fraction(-1, 2), 0)]
    assert volume(word_regions(unit_square, v, [0]), "exact-box").exact == Fraction(1, 2)
    # a point of P_0 moved by v_0 lands in P_1
    assert volume(word_regions(unit_square, v, [0, 1]), "exact-box").exact == Fraction(1, 2)
    assert volume(word_regions(unit_square, v, [0, 0]), "exact-box").exact == 0


def test_word_volume_marginals(unit_square, square_100):
    _, _, part = square_100
    v = [row for row, ok in zip(part.shifts.normalized(), part.shifts.integral) if ok]
    single = predicted_proportions(unit_square, v, "exact-box").values
    for j0 in np.argsort(single)[-3:]:
        total = sum(volume(word_regions(unit_square, v, [j0, j1]), "exact-box").exact
                    for j1 in range(len(v)))
        assert float(total) == pytest.approx(single[j0], abs=1e-12)


def test_simplex_counts_near_volumes(cubic, cubic_units, cubic_simplex, simplex_labels):
    for t in (100, 200):
        s = spectrum(cubic, cubic_simplex, t)
        part = partition_lattice(cubic, cubic_simplex, s, simplex_labels, unit_at(cubic_units, t))
        v = part.shifts.normalized_float()
        v[~part.shifts.integral] = 1e9
        pred = predicted_proportions(cubic_simplex, v, "polygon")
        counts = part.sizes() / (s.count - 1)
        assert np.max(np.abs(counts - pred.values)) <= 2.0 / t


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=6),
       st.integers(0, 2 ** 31))
def test_partition_pieces_disjoint(shifts, seed):
    R = ConvexRegion.unit_box(2)
    pts = np.random.default_rng(seed).uniform(-0.2, 1.2, (400, 2))
    member = np.array([p.contains(pts) for p in region_partition(R, shifts)])
    assert member.sum(axis=0).max() <= 1
    lab = classify_points(R, shifts, pts)
    for j in range(len(shifts)):
        assert np.array_equal(member[j], lab == j)

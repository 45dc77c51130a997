import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from unitgaps.numberfield import NumberField
from unitgaps.quasi_analyzer import (FlowError, build_flow, commutator_norms, commuting_logs,
                                     exp_errors, factorization_check, flow_decomposition, g3,
                                     g3_jacobian, g3_raw, growth_check, orbit_point,
                                     predict_expansion)
from unitgaps.unit_flow import solve_rates

# t * g3 on the orbit, rounded to five decimals, for t = floor(10^(i/2))
TABLE_PREDICTED = {
    3: (-4.80194, 7.86690, -1.97869),
    10: (-3.02177, 4.01463, -0.00234),
    31: (-40.99761, 67.99839, -17.99974),
    100: (186.00012, -308.00008, 81.00001),
    316: (-20.00001, 74.00001, -63.00000),
    1000: (424.00000, -609.00000, 61.00000),
}
P_ROUNDED = np.array([[-0.52319, -0.48157, 0.82671],
                      [0.83239, 0.83647, -0.55556],
                      [-0.18274, -0.26156, 0.08893]])


def explicit_logs():
    """Logs built from a closed-form eigenbasis in terms of the smallest root."""
    a = np.sort(np.roots([1, -7, 14, -7]).real)[0]
    lam = [2 - a, 2 - 4 * a + a * a, -5 + 5 * a - a * a]
    Q = np.array([[1, 1, 1],
                  [-3 + 2 * a - 3 / 7 * a * a, -a + a * a / 7, -1 - a + 2 / 7 * a * a],
                  [1 - 5 / 7 * a + a * a / 7, a / 7, 4 / 7 * a - a * a / 7]])
    Qi = np.linalg.inv(Q)

    def lg(x):
        return np.log(abs(x)) + (1j * np.pi if x < 0 else 0)

    L1 = Q @ np.diag([lg(lam[0]), lg(lam[1]), lg(lam[2])]) @ Qi
    L2 = Q @ np.diag([lg(lam[1]), lg(lam[2]), lg(lam[0])]) @ Qi
    return L1, L2, lam


def test_logs_match_closed_form(cubic_flow):
    L1, L2, _ = explicit_logs()
    assert np.allclose(cubic_flow.L_matrices[0], L1, atol=1e-10)
    assert np.allclose(cubic_flow.L_matrices[1], L2, atol=1e-10)


def test_unit_eigenvalues(cubic, cubic_flow):
    _, _, lam = explicit_logs()
    E1 = np.array([[float(x) for x in r] for r in cubic_flow.E_matrices[0]])
    assert np.allclose(sorted(np.linalg.eigvals(E1).real), sorted([lam[0]] + [
        2 - r for r in np.sort(np.roots([1, -7, 14, -7]).real)[1:]]))


def test_flow_spectrum(cubic_flow):
    mus = np.array([complex(m) for m in cubic_flow.eigenvalues])
    assert np.allclose(mus, [6.16003j, -2.20103j, -3 + 3.95900j], atol=1e-5)
    assert cubic_flow.k == 2
    assert cubic_flow.order == (1, 2, 0)
    assert np.allclose([float(x) for x in cubic_flow.theta], [6.16003 / (2 * np.pi), -2.20103 / (2 * np.pi)],
                       atol=1e-6)
    assert cubic_flow.gamma == pytest.approx(-3, abs=1e-12)
    assert cubic_flow.alpha == pytest.approx(math.exp(-2.7))
    # the decaying real part is -1 - d * log|sigma_1| beta-combination: exactly -1 - 2 = -3
    assert abs(mus[2].real + 3) < 1e-40 or abs(float(cubic_flow.eigenvalues[2].real) + 3) < 1e-15


def test_eigenvector_columns(cubic_flow):
    L = cubic_flow.L - np.eye(3)
    for i in range(3):
        col = cubic_flow.P[:, i]
        mu = complex(cubic_flow.eigenvalues[i])
        assert np.allclose(L @ col, mu * col, atol=1e-9)
        # same direction as the rounded reference column
        ref = P_ROUNDED[:, i]
        scale = col[np.argmax(abs(ref))] / ref[np.argmax(abs(ref))]
        assert np.allclose(col / scale, ref, atol=2e-5)


def test_exp_and_commutators(cubic_flow):
    assert max(exp_errors(cubic_flow)) < 1e-12
    assert max(commutator_norms(cubic_flow).values()) < 1e-12


def test_identity_gives_zero_log(cubic):
    qf = commuting_logs(cubic, [cubic.one()])
    assert np.allclose(qf.L_matrices[0], 0)


def test_generic_fallback_for_non_multiplication_matrices():
    M1 = [[2, 1], [1, 1]]
    M2 = [[5, 3], [3, 2]]    # M1^2, commuting
    qf = commuting_logs(None, [M1, M2])
    assert qf.logs_mp is None
    assert np.allclose(scipy.linalg.expm(qf.L_matrices[0]), M1, atol=1e-10)
    assert np.allclose(qf.L_matrices[1], 2 * qf.L_matrices[0], atol=1e-10)


def test_matrix_input_recognized_as_field_elements(cubic):
    E1 = [[2, 7, 21], [-4, -12, -35], [1, 3, 9]]
    qf = commuting_logs(cubic, [E1])
    assert qf.logs_mp is not None


def test_wrong_rates_rejected(cubic, cubic_units):
    qf = commuting_logs(cubic, cubic_units.generators)
    with pytest.raises(FlowError):
        flow_decomposition(qf, [-b for b in cubic_units.beta])
    with pytest.raises(FlowError):
        flow_decomposition(qf, cubic_units.beta[:1])
    with pytest.raises(FlowError):
        flow_decomposition(qf, cubic_units.beta, alpha=0.01)


@pytest.mark.parametrize("t", sorted(TABLE_PREDICTED))
def test_predicted_table(cubic_flow, cubic_units, t):
    pred = predict_expansion(cubic_flow, cubic_units, t)
    assert np.allclose(np.round(pred.scaled, 5), TABLE_PREDICTED[t], atol=1.01e-5)
    assert pred.imag < 1e-9


def test_prediction_error_decays(cubic_flow, cubic_units):
    ts = [3, 10, 31, 100, 316, 1000]
    errs = [predict_expansion(cubic_flow, cubic_units, t).error for t in ts]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    for t, e in zip(ts, errs):
        assert e <= 20 * cubic_flow.alpha ** math.log(t)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2),
       st.lists(st.floats(0, 1), min_size=2, max_size=2),
       st.integers(-3, 3), st.integers(-3, 3))
def test_g3_periodic_in_psi(cubic_flow, psi, x, a, b):
    shifted = np.array(psi) + [a, b]
    assert np.allclose(g3(cubic_flow, psi, x), g3(cubic_flow, shifted, x), atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=2),
       st.lists(st.floats(0, 1), min_size=2, max_size=2))
def test_g3_jacobian_matches_finite_differences(cubic_flow, psi, x):
    J = g3_jacobian(cubic_flow, psi, x)
    h = 1e-6
    z = np.concatenate([psi, x])
    for c in range(4):
        zp, zm = z.copy(), z.copy()
        zp[c] += h
        zm[c] -= h
        fd = (g3(cubic_flow, zp[:2], zp[2:]) - g3(cubic_flow, zm[:2], zm[2:])) / (2 * h)
        assert np.allclose(J[:, c], fd, atol=1e-5)


def test_orbit_raw_imaginary_part_vanishes(cubic_flow, cubic_units):
    for t in (7, 55, 400):
        psi, x = orbit_point(cubic_flow, cubic_units, t)
        assert np.max(np.abs(g3_raw(cubic_flow, psi, x).imag)) < 1e-12


def test_factorization(cubic_flow, cubic_units):
    rep = factorization_check(cubic_flow, cubic_units, 1)
    assert rep.residual < 1e-40
    for t in (10, 100, 1000):
        rep = factorization_check(cubic_flow, cubic_units, t)
        assert rep.residual < 1e-8 and rep.imag < 1e-9


def test_growth_bounded(cubic_units):
    assert np.allclose(growth_check(cubic_units, [1]).ratios, 1)
    full = growth_check(cubic_units, range(3, 1001, 7))
    late = growth_check(cubic_units, range(300, 1001, 7))
    # |U(t) e_i| / t stays in a fixed interval: no drift toward 0 or infinity
    assert np.all(full.lower > 0.1) and np.all(full.upper < 50)
    assert np.all(late.lower > 0.5 * full.lower) and np.all(late.upper < 2 * full.upper)
    assert np.all(late.spread < 25)


def test_golden_flow(golden_units):
    qf = build_flow(golden_units)
    rep = qf.report()
    assert rep["k"] == 1
    assert len(rep["eigenvalues"]) == 2
    assert rep["eigenvalues"][0][0] == pytest.approx(0, abs=1e-12)
    pred = predict_expansion(qf, golden_units, 1000)
    assert pred.error < 1e-3


def test_complex_cubic_flow():
    F = NumberField([1, 0, 0, -2], [[1, 0], [1, 0, 0]], ["1.259921", "1.587401"])
    us = solve_rates(F, [F.element(-1, 1, 0)])
    qf = build_flow(us)
    assert qf.k >= 1
    assert max(exp_errors(qf)) < 1e-12
    assert factorization_check(qf, us, 200).residual < 1e-8

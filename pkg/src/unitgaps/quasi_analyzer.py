"""Commuting logarithms of unit matrices and the quasiperiodic predictor g3.

Every multiplication matrix of the field is diagonalized by the same
matrix: the rows ``(sigma_i(b_0), ..., sigma_i(b_d))`` of ``V`` are left
eigenvectors with eigenvalue ``sigma_i(a)``.  So with ``P = V^-1``

    L_j = P diag(Log sigma_i(eps_j)) V

are logarithms of the unit matrices ``E_j`` that commute by construction.
``Log`` is the principal branch, with ``log|x| + i pi`` on the negative axis.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
import scipy.linalg

from .numberfield import FieldElement, NumberField
from .unit_flow import UnitSystem, log_t, unit_at

FLOW_BITS = 200
TOL_IMAG = 1e-8


class FlowError(ValueError):
    pass


def _branch_log(z) -> mpmath.mpc:
    z = mpmath.mpc(z)
    if z.imag == 0 and z.real < 0:
        return mpmath.mpc(mpmath.log(-z.real), mpmath.pi)
    return mpmath.log(z)


def _to_np(m: mpmath.matrix) -> np.ndarray:
    return np.array([[complex(m[i, j]) for j in range(m.cols)] for i in range(m.rows)])


def _exact_to_np(M) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in M])


def _mp_matrix_from_exact(M) -> mpmath.matrix:
    return mpmath.matrix([[mpmath.mpf(x.numerator) / x.denominator for x in row] for row in M])


@dataclass(frozen=True)
class QuasiFlow:
    field: NumberField | None
    E_matrices: tuple               # exact rational matrices
    L_matrices: tuple               # complex128 arrays
    logs: np.ndarray                # modes x r, logs[i, j] = Log of eigenvalue i of E_j
    P: np.ndarray                   # columns = common eigenvectors, mode order
    P_inv: np.ndarray
    cond: float
    prec: int
    # high-precision copies, absent on the generic fallback path
    logs_mp: tuple | None = None    # logs_mp[i][j]
    P_mp: mpmath.matrix | None = None
    V_mp: mpmath.matrix | None = None
    # filled by flow_decomposition
    beta: tuple | None = None
    eigenvalues: tuple | None = None      # mpc, eigenvalues of L - I in mode order
    k: int | None = None
    theta: tuple | None = None
    gamma: float | None = None
    alpha: float | None = None
    order: tuple | None = None            # mode order -> embedding index

    @property
    def L(self) -> np.ndarray:
        if self.beta is None:
            raise FlowError("flow_decomposition has not been run")
        return sum(float(b) * Lj for b, Lj in zip(self.beta, self.L_matrices))

    @property
    def r(self) -> int:
        return len(self.E_matrices)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def report(self) -> dict:
        out = {"cond_P": self.cond, "precision_bits": self.prec}
        if self.eigenvalues is not None:
            out.update({
                "eigenvalues": [[float(mu.real), float(mu.imag)] for mu in self.eigenvalues],
                "embedding_of_mode": list(self.order),
                "k": self.k,
                "theta": [float(x) for x in self.theta],
                "gamma": self.gamma,
                "alpha": self.alpha,
                "beta": [float(b) for b in self.beta],
                "convention": "rotational modes first, then decaying; each in embedding order; "
                              "Log is principal with log|x| + i*pi on the negative axis",
            })
        return out


def commuting_logs(field: NumberField | None, units, prec: int = FLOW_BITS,
                   max_cond_bits: int = 60) -> QuasiFlow:
    """Logarithms of the unit matrices; ``units`` are field elements or exact matrices.

    Matrices that are not multiplication matrices of ``field`` elements go
    through ``scipy.linalg.logm`` and a numerical eigenbasis instead.
    """
    units = list(units)
    elems = []
    for u in units:
        if isinstance(u, FieldElement):
            elems.append(u)
            continue
        M = [[Fraction(x) for x in row] for row in u]
        cand = FieldElement(tuple(row[0] for row in M)) if field is not None else None
        if cand is not None and len(M) == field.degree and field.mult_matrix(cand) == M:
            elems.append(cand)
        else:
            elems = None
            break
    if elems is None:
        return _generic_logs(units)
    E = tuple(field.mult_matrix(e) for e in elems)
    while True:
        with mpmath.workprec(prec):
            V = field.embedding_rows(prec)
            P = V ** -1
            cond = float(mpmath.mnorm(V, 1) * mpmath.mnorm(P, 1))
            n = field.degree
            logs = []
            for i in range(n):
                row = []
                for e in elems:
                    val = mpmath.fsum(V[i, c] * mpmath.mpf(e.coords[c].numerator) / e.coords[c].denominator
                                      for c in range(n))
                    if abs(val) == 0:
                        raise FlowError("unit with a vanishing embedding")
                    row.append(_branch_log(val))
                logs.append(tuple(row))
        # escalate until the basis change keeps max_cond_bits of slack
        if math.log2(max(cond, 1.0)) + max_cond_bits <= prec or prec >= 4096:
            break
        prec *= 2
    P_np, V_np = _to_np(P), _to_np(V)
    logs_np = np.array([[complex(x) for x in row] for row in logs])
    Ls = tuple(P_np @ np.diag(logs_np[:, j]) @ V_np for j in range(len(elems)))
    return QuasiFlow(field, E, Ls, logs_np, P_np, V_np, cond, prec,
                     tuple(logs), P, V)


def _generic_logs(mats) -> QuasiFlow:
    E = tuple(tuple(tuple(Fraction(x) for x in row) for row in M) for M in mats)
    En = [_exact_to_np(M) for M in E]
    # a generic combination shares the eigenbasis of all commuting matrices
    rng = np.random.default_rng(0)
    comb = sum(c * M for c, M in zip(rng.uniform(1, 2, len(En)), En))
    _, P = np.linalg.eig(comb)
    P_inv = np.linalg.inv(P)
    Ls, logs = [], []
    for M in En:
        Lj = scipy.linalg.logm(M.astype(complex))
        Ls.append(Lj)
        logs.append(np.diag(P_inv @ Lj @ P))
    cond = float(np.linalg.cond(P, 1))
    return QuasiFlow(None, E, tuple(Ls), np.array(logs).T, P, P_inv, cond, 53)


def flow_decomposition(qf: QuasiFlow, beta, tol_imag: float = TOL_IMAG,
                       alpha: float | None = None) -> QuasiFlow:
    """Eigenvalues of ``L - I`` split into rotational and decaying modes."""
    if isinstance(beta, UnitSystem):
        beta = beta.beta
    beta = tuple(beta)
    if len(beta) != qf.r:
        raise FlowError(f"{len(beta)} rates for {qf.r} unit matrices")
    if qf.logs_mp is not None:
        with mpmath.workprec(qf.prec):
            mus = [mpmath.fsum(mpmath.mpf(b) * lg for b, lg in zip(beta, row)) - 1
                   for row in qf.logs_mp]
    else:
        mus = [mpmath.mpc(complex(sum(float(b) * lg for b, lg in zip(beta, row)) - 1))
               for row in qf.logs]
    rot = [i for i, mu in enumerate(mus) if abs(mu.real) <= tol_imag]
    bad = [i for i, mu in enumerate(mus) if mu.real > tol_imag]
    if bad:
        raise FlowError(f"eigenvalue {complex(mus[bad[0]])} has positive real part; "
                        "check the rates or generators")
    if not rot:
        raise FlowError("no purely imaginary eigenvalue (k = 0)")
    dec = [i for i in range(len(mus)) if i not in rot]
    order = tuple(rot + dec)
    gamma = max((float(mus[i].real) for i in dec), default=-math.inf)
    if alpha is None:
        alpha = math.exp(0.9 * gamma) if dec else 0.0
    elif dec and not (math.exp(gamma) < alpha < 1):
        raise FlowError(f"alpha={alpha} must lie strictly between e^gamma={math.exp(gamma)} and 1")
    with mpmath.workprec(qf.prec):
        theta = tuple(mus[i].imag / (2 * mpmath.pi) for i in rot)
    perm = list(order)
    logs_mp = None if qf.logs_mp is None else tuple(qf.logs_mp[i] for i in perm)
    P_mp = V_mp = None
    if qf.P_mp is not None:
        P_mp = mpmath.matrix([[qf.P_mp[a, i] for i in perm] for a in range(qf.n)])
        V_mp = mpmath.matrix([[qf.V_mp[i, a] for a in range(qf.n)] for i in perm])
    return dataclasses.replace(
        qf, logs=qf.logs[perm], P=qf.P[:, perm], P_inv=qf.P_inv[perm], logs_mp=logs_mp,
        P_mp=P_mp, V_mp=V_mp, beta=beta, eigenvalues=tuple(mus[i] for i in perm),
        k=len(rot), theta=theta, gamma=gamma, alpha=alpha, order=order)


def _require(qf: QuasiFlow):
    if qf.k is None:
        raise FlowError("flow_decomposition has not been run")


def g3_raw(qf: QuasiFlow, psi, x) -> np.ndarray:
    """Complex vector whose real part is g3; see ``g3``."""
    _require(qf)
    psi = np.asarray(psi, dtype=float).reshape(qf.k)
    x = np.asarray(x, dtype=float).reshape(qf.r)
    c = np.zeros(qf.n, dtype=complex)
    c[:qf.k] = np.exp(2j * np.pi * psi)
    z = np.exp(-(qf.logs @ x))
    return qf.P @ (z * c * qf.P_inv[:, 0])


def g3(qf: QuasiFlow, psi, x) -> np.ndarray:
    """``Re(exp(-sum x_j L_j) P diag(e^{2 pi i psi}, 0) P^-1 e_1)``."""
    return g3_raw(qf, psi, x).real


def g3_jacobian(qf: QuasiFlow, psi, x) -> np.ndarray:
    """Analytic derivative of g3, columns ordered (psi_1..psi_k, x_1..x_r)."""
    _require(qf)
    psi = np.asarray(psi, dtype=float).reshape(qf.k)
    x = np.asarray(x, dtype=float).reshape(qf.r)
    c = np.zeros(qf.n, dtype=complex)
    c[:qf.k] = np.exp(2j * np.pi * psi)
    w = np.exp(-(qf.logs @ x)) * c * qf.P_inv[:, 0]
    jac_psi = qf.P[:, :qf.k] * (2j * np.pi * w[:qf.k])
    jac_x = -(qf.P * w) @ qf.logs
    return np.hstack([jac_psi, jac_x]).real


def orbit_point(qf: QuasiFlow, us: UnitSystem, t) -> tuple[np.ndarray, np.ndarray]:
    """``(theta log t mod 1, {beta log t})`` computed at the flow's precision."""
    _require(qf)
    lt = log_t(t, max(qf.prec, us.prec))
    with mpmath.workprec(max(qf.prec, us.prec)):
        psi = [mpmath.frac(th * lt) for th in qf.theta]
    _, x = us.fractional_rates(t)
    return np.array([float(p) for p in psi]), np.array([float(v) for v in x])


@dataclass(frozen=True)
class Prediction:
    t: Fraction
    exact: tuple          # n(u_1(t)) as Fractions
    prediction: np.ndarray  # g3 on the orbit point
    error: float          # || n/t - prediction ||_inf
    imag: float           # largest imaginary part of the raw expression

    @property
    def scaled(self) -> np.ndarray:
        return float(self.t) * self.prediction

    @property
    def coord_errors(self) -> np.ndarray:
        return np.abs(np.array([float(c) for c in self.exact]) - self.scaled)


def predict_expansion(qf: QuasiFlow, us: UnitSystem, t) -> Prediction:
    tq = Fraction(t)
    if tq < 1:
        raise ValueError("t must be >= 1")
    psi, x = orbit_point(qf, us, tq)
    raw = g3_raw(qf, psi, x)
    exact = unit_at(us, tq).coords
    err = max(abs(float(c / tq) - p) for c, p in zip(exact, raw.real))
    return Prediction(tq, exact, raw.real, err, float(np.max(np.abs(raw.imag))))


@dataclass(frozen=True)
class FactorizationReport:
    t: Fraction
    residual: float   # ||U - A U~||_F / ||U||_F
    imag: float       # max |Im(A U~)| / ||U||_F
    prec: int


def factorization_check(qf: QuasiFlow, us: UnitSystem, t, tol: float = 1e-8,
                        max_prec: int = 1600) -> FactorizationReport:
    """Compare exact U(t) with ``A(t) exp(log t L)`` from matrix exponentials.

    The exponentials are evaluated by mpmath's own scaling-and-squaring, not
    through the eigenbasis, so this is an independent check of the logs.
    """
    _require(qf)
    tq = Fraction(t)
    U = us.field.mult_matrix(unit_at(us, tq)) if us.field is not None else None
    prec = qf.prec
    flow = qf
    while True:
        rep = _factorization_once(flow, us, tq, U, prec)
        if rep.residual <= tol or flow.P_mp is None or prec >= max_prec:
            return rep
        prec *= 2
        flow = flow_decomposition(commuting_logs(qf.field, qf.E_matrices, prec), qf.beta,
                                  alpha=qf.alpha)


def _factorization_once(qf, us, tq, U, prec) -> FactorizationReport:
    _, x = us.fractional_rates(tq)
    if qf.P_mp is None:
        lt = math.log(tq)
        A = scipy.linalg.expm(-sum(float(xj) * Lj for xj, Lj in zip(x, qf.L_matrices)))
        Ut = scipy.linalg.expm(lt * qf.L)
        prod = A @ Ut
        Un = _exact_to_np(U)
        res = np.linalg.norm(Un - prod) / np.linalg.norm(Un)
        return FactorizationReport(tq, float(res), float(np.max(np.abs(prod.imag)) / np.linalg.norm(Un)), 53)
    with mpmath.workprec(prec):
        n = qf.n
        lt = log_t(tq, prec)

        def logmat(coeffs):
            D = mpmath.diag([mpmath.fsum(c * qf.logs_mp[i][j] for j, c in enumerate(coeffs))
                             for i in range(n)])
            return qf.P_mp * D * qf.V_mp

        A = mpmath.expm(logmat([-xj for xj in x]))
        Ut = mpmath.expm(logmat([mpmath.mpf(b) * lt for b in qf.beta]))
        prod = A * Ut
        Um = _mp_matrix_from_exact(U)
        diff = Um - prod
        normU = mpmath.mnorm(Um, "f")
        res = mpmath.mnorm(diff, "f") / normU
        imag = max(abs(prod[i, j].imag) for i in range(n) for j in range(n)) / normU
    return FactorizationReport(tq, float(res), float(imag), prec)


def exp_errors(qf: QuasiFlow) -> list:
    """Relative ``||expm(L_j) - E_j||_F`` using scipy's Pade exponential."""
    out = []
    for Lj, Ej in zip(qf.L_matrices, qf.E_matrices):
        En = _exact_to_np(Ej)
        out.append(float(np.linalg.norm(scipy.linalg.expm(Lj) - En) / np.linalg.norm(En)))
    return out


def commutator_norms(qf: QuasiFlow) -> dict:
    """``||L_i L_j - L_j L_i|| / (||L_i|| ||L_j||)`` for each pair."""
    out = {}
    Ls = qf.L_matrices
    for i in range(len(Ls)):
        for j in range(i + 1, len(Ls)):
            c = Ls[i] @ Ls[j] - Ls[j] @ Ls[i]
            denom = np.linalg.norm(Ls[i]) * np.linalg.norm(Ls[j])
            out[(i, j)] = float(np.linalg.norm(c) / denom) if denom else 0.0
    return out


@dataclass(frozen=True)
class GrowthReport:
    ts: tuple
    ratios: np.ndarray   # len(ts) x n, |U(t) e_i| / t
    lower: np.ndarray
    upper: np.ndarray

    @property
    def spread(self) -> np.ndarray:
        return self.upper / self.lower


def growth_check(us: UnitSystem, t_grid: Sequence) -> GrowthReport:
    """Euclidean norms of the exact columns of U(t), divided by t."""
    rows = []
    for t in t_grid:
        tq = Fraction(t)
        U = us.field.mult_matrix(unit_at(us, tq))
        n = len(U)
        rows.append([math.sqrt(sum(float(U[a][i]) ** 2 for a in range(n))) / float(tq)
                     for i in range(n)])
    arr = np.array(rows)
    return GrowthReport(tuple(Fraction(t) for t in t_grid), arr, arr.min(axis=0), arr.max(axis=0))


def build_flow(us: UnitSystem, prec: int = FLOW_BITS, tol_imag: float = TOL_IMAG,
               alpha: float | None = None) -> QuasiFlow:
    """``commuting_logs`` followed by ``flow_decomposition`` for a unit system."""
    qf = commuting_logs(us.field, us.generators, prec)
    return flow_decomposition(qf, us.beta, tol_imag, alpha)

"""Unit rescaling, label sets, and spacing statistics.

``u_1(t) = eps_1^floor(beta_1 log t) ... eps_r^floor(beta_r log t)`` shrinks
like ``t^-d`` at the trivial embedding and grows like ``t`` elsewhere, so
dividing each spacing by it lands in a finite label set.  Because the
generators may be negative at sigma_1, spacings are divided by the
sign-normalized unit ``|u_1(t)| = sign(sigma_1(u_1)) u_1``; labels are then
positive and their order matches the order of the spacings they label.
"""

from __future__ import annotations

import functools
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .gap_engine import ConvexRegion, GapSpectrum, spectrum
from .numberfield import FieldElement, FieldError, NumberField, to_fraction

RATE_BITS = 200
NEAR_INTEGER = 1e-9


class UnitSystemError(ValueError):
    pass


class IncompleteLabelSet(ValueError):
    """A rescaled spacing is missing from the label set."""

    def __init__(self, t, missing):
        self.t = t
        self.missing = missing
        super().__init__(f"t={t}: {len(missing)} rescaled spacing(s) not in the label set, "
                         f"e.g. {missing[0]}")


class LabelSetTooLarge(ValueError):
    def __init__(self, volume, estimate, cap, half_width_product=None):
        self.volume = volume
        self.estimate = estimate
        self.cap = cap
        self.half_width_product = half_width_product
        hw = "" if half_width_product is None else f" (half-width product {half_width_product:.6g})"
        super().__init__(f"box volume {volume:.6g}{hw} holds about {estimate:.3g} "
                         f"module points (cap {cap})")


def log_t(t, bits: int = RATE_BITS) -> mpmath.mpf:
    q = to_fraction(t)
    with mpmath.workprec(bits):
        return mpmath.log(mpmath.mpf(q.numerator) / q.denominator)


@dataclass
class UnitSystem:
    field: NumberField
    generators: tuple
    log_matrix: mpmath.matrix     # (r1+r2) x r, column j = phi(eps_j)
    beta: tuple                   # mpf at RATE_BITS
    target: tuple                 # (-d, 1, ..., 1)
    solve_rows: tuple             # embedding rows used for the square solve
    prec: int = RATE_BITS
    _powers: dict = field(default_factory=dict, repr=False)

    @property
    def r(self) -> int:
        return len(self.generators)

    @property
    def beta_float(self) -> np.ndarray:
        return np.array([float(b) for b in self.beta])

    def residual(self) -> float:
        """Max-norm of ``A_full beta - b_full`` over all places."""
        with mpmath.workprec(self.prec):
            res = 0
            for i in range(self.log_matrix.rows):
                s = mpmath.fsum(self.log_matrix[i, j] * self.beta[j] for j in range(self.r))
                res = max(res, abs(s - self.target[i]))
            return float(res)

    def fractional_rates(self, t) -> tuple[tuple, tuple]:
        """Exponents ``floor(beta_j log t)`` and fractional parts ``{beta_j log t}``."""
        lt = log_t(t, self.prec)
        ints, fracs = [], []
        with mpmath.workprec(self.prec):
            for b in self.beta:
                x = b * lt
                fl = int(mpmath.floor(x))
                frac = x - fl
                if min(frac, 1 - frac) < NEAR_INTEGER and lt != 0:
                    warnings.warn(f"beta log t = {mpmath.nstr(x, 15)} is within {NEAR_INTEGER} "
                                  f"of an integer at t={t}; exponent may be unstable",
                                  RuntimeWarning, stacklevel=3)
                ints.append(fl)
                fracs.append(frac)
        return tuple(ints), tuple(fracs)

    def exponents(self, t) -> tuple:
        return self.fractional_rates(t)[0]

    def generator_power(self, j: int, k: int) -> FieldElement:
        key = (j, k)
        if key not in self._powers:
            self._powers[key] = self.field.power(self.generators[j], k)
        return self._powers[key]


def solve_rates(field: NumberField, generators: Sequence[FieldElement],
                prec: int = RATE_BITS) -> UnitSystem:
    """Rate vector beta with ``sum_j beta_j phi(eps_j) = (-d, 1, ..., 1)``."""
    gens = tuple(generators)
    r = field.r1 + field.r2 - 1
    if len(gens) != r:
        raise UnitSystemError(f"unit rank is {r} but {len(gens)} generators were given")
    if r == 0:
        raise UnitSystemError("unit group has rank 0; no rescaling flow exists")
    for g in gens:
        nm = field.norm(g)
        if abs(nm) != 1:
            raise UnitSystemError(f"generator {g} has norm {nm}, not +-1")
    nplaces = field.n_embeddings
    with mpmath.workprec(prec + 20):
        cols = [field.log_embedding(g, prec + 20) for g in gens]
        A = mpmath.matrix(nplaces, r)
        for j, col in enumerate(cols):
            for i, v in enumerate(col):
                A[i, j] = v
        # hyperplane check on each column
        for j, col in enumerate(cols):
            h = mpmath.fsum(col[:field.r1]) + 2 * mpmath.fsum(col[field.r1:])
            if abs(h) > 1e-10:
                raise UnitSystemError(f"generator {j} does not lie on the unit hyperplane")
        target = tuple([mpmath.mpf(-field.d)] + [mpmath.mpf(1)] * (nplaces - 1))
        # drop one place at a time, last place first, until the minor is invertible
        scale = max(1, max(abs(A[i, j]) for i in range(nplaces) for j in range(r)))
        beta = None
        for drop in range(nplaces - 1, -1, -1):
            rows = tuple(i for i in range(nplaces) if i != drop)
            sub = mpmath.matrix([[A[i, j] for j in range(r)] for i in rows])
            if abs(mpmath.det(sub)) <= mpmath.mpf(10) ** -30 * scale ** r:
                continue
            rhs = mpmath.matrix([target[i] for i in rows])
            beta = mpmath.lu_solve(sub, rhs)
            break
        if beta is None:
            raise UnitSystemError("generators are multiplicatively dependent")
    us = UnitSystem(field, gens, A, tuple(beta[j] for j in range(r)), target, rows, prec)
    if us.residual() > 1e-9:
        raise UnitSystemError(f"rate solve residual {us.residual():.3g} too large")
    return us


def unit_at(us: UnitSystem, t) -> FieldElement:
    """Exact ``u_1(t)``."""
    u = us.field.one()
    for j, k in enumerate(us.exponents(t)):
        if k:
            u = us.field.mul(u, us.generator_power(j, k))
    return u


def unit_matrix(us: UnitSystem, t):
    """Exact matrix U(t) of multiplication by ``u_1(t)``."""
    return us.field.mult_matrix(unit_at(us, t))


def positive_unit(field: NumberField, u1: FieldElement) -> FieldElement:
    """``u_1`` multiplied by the sign of ``sigma_1(u_1)``."""
    return -u1 if field.sign_of(u1) < 0 else u1


def rescale(field: NumberField, delta: FieldElement, u1: FieldElement) -> FieldElement:
    """``delta / |u_1|``."""
    return field.mul(delta, field.inv(positive_unit(field, u1)))


def rescaled_spacings(field: NumberField, s: GapSpectrum, u1: FieldElement) -> list:
    """Every spacing of ``s`` divided by ``|u_1|``, in spacing order."""
    distinct = rescaled_distinct(field, s, u1)
    return [distinct[k] for k in s.spacing_index]


def rescaled_distinct(field: NumberField, s: GapSpectrum, u1: FieldElement) -> list:
    if u1.is_zero():
        raise FieldError("rescaling unit is zero")
    inv = field.inv(positive_unit(field, u1))
    return [field.mul(delta, inv) for delta in s.distinct]


def _sort_elements(field: NumberField, elems) -> list:
    approx = {e: field.sigma1_float(e) for e in elems}

    def cmp(a, b):
        if a == b:
            return 0
        da, db = approx[a], approx[b]
        if abs(da - db) > 1e-9 * (abs(da) + abs(db)) + 1e-300:
            return -1 if da < db else 1
        return field.compare(a, b)

    return sorted(elems, key=functools.cmp_to_key(cmp))


@dataclass(frozen=True)
class LabelSet:
    elements: tuple
    provenance: str = "empirical"
    # (t, size of the accumulated set after t) for empirical builds
    history: tuple = ()

    @property
    def J(self) -> int:
        return len(self.elements)

    def index(self) -> dict:
        return {e: i for i, e in enumerate(self.elements)}

    def burn_in(self):
        """First scale after which the accumulated set stopped growing."""
        if not self.history:
            return None
        final = self.history[-1][1]
        for t, size in self.history:
            if size == final:
                return t
        return None

    @classmethod
    def from_elements(cls, field: NumberField, elems, provenance="empirical", history=()):
        uniq = list(dict.fromkeys(elems))
        for e in uniq:
            if field.sign_of(e) <= 0:
                raise ValueError(f"label {e} is not positive")
        return cls(tuple(_sort_elements(field, uniq)), provenance, tuple(history))


def label_set(field: NumberField, us: UnitSystem, region: ConvexRegion, t_schedule,
              mode: str = "empirical", *, box=None, cap: int = 200_000) -> LabelSet:
    """Accumulate the finite label set over a schedule of scales.

    ``mode="theoretical-box"`` instead lists every element of the integer
    module whose Minkowski image lies in ``[-K_i, K_i]`` (``box`` gives the
    half-widths; see ``transference_constants``).
    """
    if mode == "theoretical-box":
        if box is None:
            box = transference_constants(field, us)["box"]
        return theoretical_labels(field, box, cap)
    if mode != "empirical":
        raise ValueError(f"unknown label mode {mode!r}")
    seen: dict = {}
    history = []
    for t in t_schedule:
        s = spectrum(field, region, t)
        if s.count >= 2:
            for e in rescaled_distinct(field, s, unit_at(us, t)):
                seen.setdefault(e, None)
        history.append((to_fraction(t), len(seen)))
    return LabelSet.from_elements(field, list(seen), "empirical", history)


def transference_constants(field: NumberField, us: UnitSystem | None = None) -> dict:
    """Explicit spacing and label-box constants for a totally real cubic field.

    ``K`` bounds ``||m . omega|| >= 1 / (K t^2)`` for ``0 < |m| <= t``;
    every spacing then satisfies ``Delta <= K' / t^2`` with
    ``K' = (floor(K) + 1)^3 / (4 K)``.  With a unit system, ``box`` holds the
    half-widths ``K_i`` bounding the Minkowski image of every rescaled spacing.
    """
    if field.d != 2 or field.r1 != 3:
        raise ValueError("explicit constants are implemented for totally real cubic fields")
    with mpmath.workprec(120):
        om = [field.embedding_values(field.omega(j), 100) for j in (1, 2)]
        a1 = abs(om[0][0]) + abs(om[1][0])
        facs = [mpmath.mpf(1) / 2 + a1 + abs(om[0][i]) + abs(om[1][i]) for i in (1, 2)]
        K = facs[0] * facs[1]
        k_prime = (mpmath.floor(K) + 1) ** 3 / (4 * K)
        out = {"K": float(K), "K_prime": float(k_prime), "row_factors": [float(f) for f in facs]}
        if us is not None:
            grow = []
            for i in range(3):
                p = mpmath.mpf(1)
                for j in range(us.r):
                    p *= max(mpmath.mpf(1), mpmath.exp(us.log_matrix[i, j]))
                grow.append(p)
            box = [k_prime * grow[0], facs[0] * grow[1], facs[1] * grow[2]]
            out["box"] = [float(b) for b in box]
            out["half_width_product"] = float(box[0] * box[1] * box[2])
            out["box_volume"] = float(8 * box[0] * box[1] * box[2])
    return out


def theoretical_labels(field: NumberField, half_widths, cap: int = 200_000) -> LabelSet:
    """Positive elements of ``Z + Z omega_1 + ... + Z omega_d`` with Minkowski image in the box."""
    n = field.degree
    basis = [field.one()] + [field.omega(j) for j in range(1, n)]
    B = np.array([field.minkowski(b) for b in basis]).T  # columns = images of basis
    K = np.asarray(half_widths, dtype=float)
    volume = float(np.prod(2 * K))
    covol = abs(float(np.linalg.det(B)))
    estimate = volume / covol
    if estimate > cap:
        raise LabelSetTooLarge(volume, estimate, cap, float(np.prod(K)))
    Binv = np.linalg.inv(B)
    reach = np.ceil(np.abs(Binv) @ K).astype(np.int64) + 1
    axes = [np.arange(-c, c + 1) for c in reach]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    img = grid @ B.T
    keep = np.all(np.abs(img) <= K * (1 + 1e-12), axis=1) & (img[:, 0] > 0)
    elems = [FieldElement(tuple(int(c) for c in row)) for row in grid[keep]]
    return LabelSet.from_elements(field, elems, "theoretical-box")


def spacing_labels(field: NumberField, s: GapSpectrum, labels: LabelSet, u1) -> np.ndarray:
    """Label index of every spacing ``delta_i``; raises when a label is missing."""
    idx = labels.index()
    resc = rescaled_distinct(field, s, u1)
    missing = [e for e in resc if e not in idx]
    if missing:
        raise IncompleteLabelSet(s.t, missing)
    per_distinct = np.array([idx[e] for e in resc], dtype=np.int64)
    return per_distinct[s.spacing_index]


def proportions(field: NumberField, s: GapSpectrum, labels: LabelSet, u1) -> list:
    """Exact ``p_j(t) = |M_j(t)| / (|M(t)| - 1)`` over the labels in order."""
    lab = spacing_labels(field, s, labels, u1)
    counts = np.bincount(lab, minlength=labels.J)
    total = s.count - 1
    return [Fraction(int(c), total) for c in counts]


@dataclass
class RatioStats:
    ratios: list          # exact ratios delta_i / delta_{i-1}, sorted
    frequencies: list     # Fractions over |M(t)| - 2


def ratio_stats(field: NumberField, s: GapSpectrum) -> RatioStats:
    if s.count < 3:
        raise ValueError("ratios need at least three points")
    pairs = Counter(zip(s.spacing_index[:-1].tolist(), s.spacing_index[1:].tolist()))
    by_ratio: Counter = Counter()
    for (a, b), c in pairs.items():
        rho = field.mul(s.distinct[b], field.inv(s.distinct[a]))
        by_ratio[rho] += c
    ordered = _sort_elements(field, list(by_ratio))
    total = s.count - 2
    return RatioStats(ordered, [Fraction(by_ratio[r], total) for r in ordered])


def word_stats(field: NumberField, s: GapSpectrum, labels: LabelSet, u1, l: int) -> dict:
    """Frequencies of length-(l+1) label words over the ``|M(t)| - l - 1`` windows."""
    if l < 0:
        raise ValueError("word length parameter l must be >= 0")
    if s.count < l + 2:
        raise ValueError("spectrum too short for the requested word length")
    lab = spacing_labels(field, s, labels, u1)
    n_windows = len(lab) - l
    windows = np.lib.stride_tricks.sliding_window_view(lab, l + 1)
    counts = Counter(map(tuple, windows.tolist()))
    return {w: Fraction(c, n_windows) for w, c in sorted(counts.items())}

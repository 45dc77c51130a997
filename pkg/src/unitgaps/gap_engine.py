"""Fractional-part spectra of ``m . omega`` over dilated convex regions.

The hot path works on integer arrays: the fractional part of ``m . omega`` has
coordinates ``(-floor(m . omega), m_1, ..., m_d)`` in the field basis, so every
spacing is an exact integer vector.  Sorting uses doubles with rigorous
per-point error bounds; overlapping error intervals are re-sorted with exact
comparisons.
"""

from __future__ import annotations

import bisect
import functools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .numberfield import FieldElement, NumberField, to_fraction

_U = 2.0 ** -53


class RegionError(ValueError):
    pass


class SpectrumError(ValueError):
    pass


@dataclass(frozen=True)
class ConvexRegion:
    """Bounded convex region R in R^d; R(t) is its dilation by t.

    kind "box": half-open ``lower_i <= x_i < upper_i``.
    kind "simplex": ``x_i >= 0`` and ``x . omega < 1`` with omega from ``field``.
    kind "halfspaces": rows ``(a, b, strict)`` meaning ``a . x < b`` (or ``<=``).
    """

    kind: str
    dim: int
    lower: tuple = ()
    upper: tuple = ()
    halfspaces: tuple = ()
    field: NumberField | None = None

    @classmethod
    def box(cls, lower: Sequence, upper: Sequence) -> "ConvexRegion":
        lo = tuple(to_fraction(x) for x in lower)
        hi = tuple(to_fraction(x) for x in upper)
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise RegionError("box needs lower < upper on every axis")
        return cls("box", len(lo), lower=lo, upper=hi)

    @classmethod
    def unit_box(cls, d: int) -> "ConvexRegion":
        return cls.box([0] * d, [1] * d)

    @classmethod
    def simplex(cls, field: NumberField) -> "ConvexRegion":
        w, _ = field.sigma1_basis_float()
        if np.any(w <= 0):
            raise RegionError("simplex region is unbounded unless every omega_j > 0")
        return cls("simplex", field.d, field=field)

    @classmethod
    def from_halfspaces(cls, rows: Sequence) -> "ConvexRegion":
        parsed = []
        for row in rows:
            a, b = row[0], row[1]
            strict = bool(row[2]) if len(row) > 2 else True
            parsed.append((tuple(to_fraction(x) for x in a), to_fraction(b), strict))
        dim = len(parsed[0][0])
        region = cls("halfspaces", dim, halfspaces=tuple(parsed))
        region.bounding_box()  # raises when unbounded
        return region

    # --- geometry ---

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "box":
            return (np.array([float(x) for x in self.lower]),
                    np.array([float(x) for x in self.upper]))
        if self.kind == "simplex":
            w, err = self.field.sigma1_basis_float()
            return np.zeros(self.dim), 1.0 / (w - err)
        from scipy.optimize import linprog

        A = np.array([[float(x) for x in a] for a, _, _ in self.halfspaces])
        b = np.array([float(b) for _, b, _ in self.halfspaces])
        lo, hi = np.empty(self.dim), np.empty(self.dim)
        for k in range(self.dim):
            c = np.zeros(self.dim)
            c[k] = 1.0
            for sign, out in ((1.0, lo), (-1.0, hi)):
                res = linprog(sign * c, A_ub=A, b_ub=b, bounds=[(None, None)] * self.dim)
                if res.status == 3:
                    raise RegionError("halfspace region is unbounded")
                if res.status != 0:
                    raise RegionError(f"halfspace region is empty or infeasible: {res.message}")
                out[k] = sign * res.fun
        return lo, hi

    def volume_hint(self) -> float | None:
        if self.kind == "box":
            return float(np.prod([float(b - a) for a, b in zip(self.lower, self.upper)]))
        return None

    def contains_points(self, x: np.ndarray) -> np.ndarray:
        """Float membership of points ``x`` (shape (n, d)) in R itself."""
        x = np.atleast_2d(x)
        if self.kind == "box":
            lo, hi = self.bounding_box()
            return np.all((x >= lo) & (x < hi), axis=1)
        if self.kind == "simplex":
            w, _ = self.field.sigma1_basis_float()
            return np.all(x >= 0, axis=1) & (x @ w < 1.0)
        mask = np.ones(len(x), dtype=bool)
        for a, b, strict in self.halfspaces:
            v = x @ np.array([float(c) for c in a])
            mask &= (v < float(b)) if strict else (v <= float(b))
        return mask

    def contains_lattice(self, m: np.ndarray, t) -> np.ndarray:
        """Exact membership of integer vectors ``m`` in R(t)."""
        m = np.atleast_2d(np.asarray(m, dtype=np.int64))
        t = to_fraction(t)
        if self.kind == "box":
            mask = np.ones(len(m), dtype=bool)
            for k in range(self.dim):
                lo, hi = self.lower[k] * t, self.upper[k] * t
                # m >= lo  <=>  m >= ceil(lo);  m < hi  <=>  m <= ceil(hi) - 1
                lo_i = -((-lo.numerator) // lo.denominator)
                hi_i = -((-hi.numerator) // hi.denominator) - 1
                mask &= (m[:, k] >= lo_i) & (m[:, k] <= hi_i)
            return mask
        if self.kind == "simplex":
            mask = np.all(m >= 0, axis=1)
            vals, err = _dot_with_error(self.field, m)
            tf = float(t)
            sure_in = vals + err < tf * (1 - 4 * _U)
            sure_out = vals - err > tf * (1 + 4 * _U)
            unsure = mask & ~sure_in & ~sure_out
            inside = sure_in.copy()
            for idx in np.flatnonzero(unsure):
                el = FieldElement((-t,) + tuple(int(c) for c in m[idx]))
                inside[idx] = self.field.sign_of(el) < 0
            return mask & inside
        mask = np.ones(len(m), dtype=bool)
        for a, b, strict in self.halfspaces:
            # exact: scale to integers
            den = np.lcm.reduce([x.denominator for x in a] + [b.denominator * t.denominator])
            ai = np.array([int(x * den) for x in a], dtype=object)
            rhs = b * t * den
            lhs = m.astype(object) @ ai
            mask &= (lhs < rhs) if strict else (lhs <= rhs)
        return mask.astype(bool)

    def lattice_bounds(self, t) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.bounding_box()
        tf = float(to_fraction(t))
        return np.floor(lo * tf).astype(np.int64) - 1, np.ceil(hi * tf).astype(np.int64) + 1


def _dot_with_error(field: NumberField, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Doubles near ``sigma_1(m . omega)`` and rigorous error bounds."""
    w, werr = field.sigma1_basis_float()
    mf = m.astype(np.float64)
    vals = mf @ w
    absm = np.abs(mf)
    d = m.shape[1]
    gamma = (d + 2) * _U / (1 - (d + 2) * _U)
    err = absm @ werr + 2 * gamma * (absm @ np.abs(w)) + 2.0 ** -1070
    return vals, err


def iter_lattice(region: ConvexRegion, t, chunk_rows: int = 1 << 16) -> Iterator[np.ndarray]:
    """Stream the integer vectors of R(t) in lexicographic chunks."""
    if to_fraction(t) < 1:
        raise RegionError("scale t must be >= 1")
    lo, hi = region.lattice_bounds(t)
    d = region.dim
    if d == 1:
        cand = np.arange(lo[0], hi[0] + 1, dtype=np.int64)[:, None]
        yield cand[region.contains_lattice(cand, t)]
        return
    inner = [np.arange(lo[k], hi[k] + 1, dtype=np.int64) for k in range(1, d)]
    tail = np.stack(np.meshgrid(*inner, indexing="ij"), axis=-1).reshape(-1, d - 1)
    rows_per = max(1, chunk_rows // max(1, len(tail)))
    for start in range(lo[0], hi[0] + 1, rows_per):
        heads = np.arange(start, min(start + rows_per, hi[0] + 1), dtype=np.int64)
        cand = np.concatenate([np.repeat(heads, len(tail))[:, None],
                               np.tile(tail, (len(heads), 1))], axis=1)
        keep = region.contains_lattice(cand, t)
        if keep.any():
            yield cand[keep]


def enumerate_lattice(region: ConvexRegion, t) -> np.ndarray:
    """All integer vectors in R(t), as an ``(n, d)`` int64 array."""
    chunks = list(iter_lattice(region, t))
    if not chunks:
        return np.zeros((0, region.dim), dtype=np.int64)
    return np.concatenate(chunks)


def fractional_parts(field: NumberField, m: np.ndarray):
    """Certified floors and values of ``{m . omega}``.

    Returns ``(floors, values, errors)`` with ``values[i]`` within
    ``errors[i]`` of the true fractional part.
    """
    m = np.atleast_2d(np.asarray(m, dtype=np.int64))
    vals, err = _dot_with_error(field, m)
    floors = np.floor(vals)
    zero = ~np.any(m, axis=1)
    ok = (vals - err > floors) & (vals + err < floors + 1)
    ok |= zero
    for idx in np.flatnonzero(~ok):
        el = FieldElement((0,) + tuple(int(c) for c in m[idx]))
        floors[idx] = field.floor_sigma1(el)
    floors = floors.astype(np.int64)
    y = vals - floors
    yerr = err + 2 * _U * np.maximum(1.0, np.abs(vals))
    y[zero] = 0.0
    yerr[zero] = 0.0
    return floors, y, yerr


def _certified_order(field: NumberField, m: np.ndarray, floors: np.ndarray,
                     y: np.ndarray, yerr: np.ndarray) -> np.ndarray:
    order = np.argsort(y, kind="stable")
    lo = (y - yerr)[order]
    hi = (y + yerr)[order]
    # clusters of transitively overlapping error intervals
    run_hi = np.maximum.accumulate(hi)
    breaks = np.flatnonzero(lo[1:] > run_hi[:-1]) + 1
    starts = np.concatenate([[0], breaks])
    ends = np.concatenate([breaks, [len(order)]])
    big = np.flatnonzero(ends - starts > 1)
    if len(big) == 0:
        return order

    def elem(i):
        return FieldElement((-int(floors[i]),) + tuple(int(c) for c in m[i]))

    def cmp(i, j):
        return field.sign_of(elem(i) - elem(j))

    order = order.copy()
    for k in big:
        s, e = starts[k], ends[k]
        block = sorted(order[s:e].tolist(), key=functools.cmp_to_key(cmp))
        order[s:e] = block
    return order


@dataclass
class GapSpectrum:
    """Sorted fractional parts ``y_1 < ... < y_N`` of ``m . omega`` over M(t)."""

    field: NumberField
    t: Fraction
    points: np.ndarray        # (N, d) lattice vectors, sorted by fractional part
    floors: np.ndarray        # (N,) floor(m . omega)
    values: np.ndarray        # (N,) doubles near y_i
    errors: np.ndarray        # (N,) rigorous bounds on |values - y_i|
    spacings: np.ndarray = field(init=False)   # (N-1, d+1) exact coordinates of delta_i
    distinct: list = field(init=False)         # exact Delta_1 < ... < Delta_D
    spacing_index: np.ndarray = field(init=False)  # delta_i == distinct[spacing_index[i]]

    def __post_init__(self):
        coords = self.coords_array()
        self.spacings = np.diff(coords, axis=0)
        if len(self.spacings) == 0:
            self.distinct = []
            self.spacing_index = np.zeros(0, dtype=np.int64)
            return
        uniq, inverse = np.unique(self.spacings, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        elems = [FieldElement(tuple(int(c) for c in row)) for row in uniq]
        approx = [float(np.mean(np.diff(self.values)[inverse == k])) for k in range(len(uniq))]
        f = self.field
        slack = 4 * float(np.max(self.errors)) * (1 + 1e-6) + 4 * _U

        def cmp(a, b):
            if a == b:
                return 0
            da, db = approx[a], approx[b]
            if abs(da - db) > slack:
                return -1 if da < db else 1
            return f.sign_of(elems[a] - elems[b])

        rank = sorted(range(len(uniq)), key=functools.cmp_to_key(cmp))
        pos = np.empty(len(uniq), dtype=np.int64)
        pos[rank] = np.arange(len(uniq))
        self.distinct = [elems[k] for k in rank]
        self.spacing_index = pos[inverse]

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def D(self) -> int:
        return len(self.distinct)

    def coords_array(self) -> np.ndarray:
        """Exact coordinates ``(-floor, m_1, ..., m_d)`` of every fractional part."""
        return np.concatenate([-self.floors[:, None], self.points], axis=1)

    def fractional_part(self, i: int) -> FieldElement:
        return FieldElement(tuple(int(c) for c in self.coords_array()[i]))

    def spacing(self, i: int) -> FieldElement:
        return FieldElement(tuple(int(c) for c in self.spacings[i]))

    def spacing_values(self) -> np.ndarray:
        return np.diff(self.values)


def spectrum(field: NumberField, region: ConvexRegion, t, points: np.ndarray | None = None
             ) -> GapSpectrum:
    """Sorted spectrum Y(t) with exact spacings and distinct spacing values."""
    t = to_fraction(t)
    if region.dim != field.d:
        raise SpectrumError(f"region dimension {region.dim} != d = {field.d}")
    m = enumerate_lattice(region, t) if points is None else np.asarray(points, dtype=np.int64)
    floors, y, yerr = fractional_parts(field, m)
    order = _certified_order(field, m, floors, y, yerr)
    return GapSpectrum(field, t, m[order], floors[order], y[order], yerr[order])


def distinct_spacings(s: GapSpectrum) -> list:
    if s.count < 2:
        raise SpectrumError("need at least two points for spacings")
    return list(s.distinct)


def check_injective(s: GapSpectrum) -> bool:
    coords = s.coords_array()
    return len(np.unique(coords, axis=0)) == len(coords)


def check_telescoping(s: GapSpectrum) -> bool:
    """``sum(delta_i) == y_N - y_1`` exactly and the total is below 1."""
    if s.count < 2:
        return True
    total = FieldElement(tuple(int(c) for c in s.spacings.sum(axis=0)))
    span = s.fractional_part(s.count - 1) - s.fractional_part(0)
    return total == span and s.field.sign_of(total - s.field.one()) < 0


def check_float_order(s: GapSpectrum) -> bool:
    """The certified order agrees with exact comparison on every adjacent pair."""
    coords = s.coords_array()
    for i in range(s.count - 1):
        if s.field.sign_of(FieldElement(tuple(int(c) for c in coords[i + 1] - coords[i]))) <= 0:
            return False
    return True


@dataclass
class SweepRow:
    t: Fraction
    count: int
    D: int
    max_spacing: FieldElement | None
    max_spacing_value: float
    spacings: tuple = ()


def _entry_times(region: ConvexRegion, m: np.ndarray, ts: list) -> np.ndarray:
    entry = np.full(len(m), len(ts), dtype=np.int64)
    for k in range(len(ts) - 1, -1, -1):
        inside = region.contains_lattice(m, ts[k])
        entry[inside] = k
    return entry


def sweep_distinct(field: NumberField, region: ConvexRegion, ts: Sequence) -> list[SweepRow]:
    """D(t) and the largest spacing for every t in an increasing schedule.

    Uses one certified sort at the largest t and inserts points in order of
    the first scale at which they enter R(t); requires nested dilations.
    """
    ts = sorted(to_fraction(t) for t in ts)
    big = spectrum(field, region, ts[-1])
    entry = _entry_times(region, big.points, ts)
    coords = big.coords_array()
    vals = big.values
    by_entry = np.argsort(entry, kind="stable")
    gaps: Counter = Counter()
    gap_val: dict = {}
    ranks: list[int] = []
    rows = []
    pos = 0
    for k, t in enumerate(ts):
        while pos < len(by_entry) and entry[by_entry[pos]] <= k:
            r = int(by_entry[pos])
            pos += 1
            at = bisect.bisect_left(ranks, r)
            left = ranks[at - 1] if at > 0 else None
            right = ranks[at] if at < len(ranks) else None
            if left is not None and right is not None:
                key = tuple((coords[right] - coords[left]).tolist())
                gaps[key] -= 1
                if gaps[key] == 0:
                    del gaps[key]
            for a, b in ((left, r), (r, right)):
                if a is not None and b is not None:
                    key = tuple((coords[b] - coords[a]).tolist())
                    gaps[key] += 1
                    gap_val.setdefault(key, float(vals[b] - vals[a]))
            ranks.insert(at, r)
        if gaps:
            top = max(gaps, key=lambda g: gap_val[g])
            rows.append(SweepRow(t, len(ranks), len(gaps), FieldElement(top), gap_val[top],
                                 tuple(FieldElement(g) for g in gaps)))
        else:
            rows.append(SweepRow(t, len(ranks), 0, None, 0.0))
    return rows


@dataclass
class ThreeGapReport:
    max_D: int
    violations: list
    per_t: list


def three_gap_check(omega, t_max: int) -> ThreeGapReport:
    """D(t) <= 3 for d = 1 over integer t = 1..t_max.

    ``omega`` is either a quadratic-or-higher ``NumberField`` with d = 1 or a
    real number (floats are taken as the exact rationals they represent).
    Points are ``{k omega}`` for ``0 <= k < t``; coincident points are merged.
    """
    ts = list(range(1, t_max + 1))
    if isinstance(omega, NumberField):
        if omega.d != 1:
            raise SpectrumError("three gap check needs d = 1")
        rows = sweep_distinct(omega, ConvexRegion.box([0], [1]), ts)
        per_t = [r.D for r in rows]
    else:
        w = to_fraction(omega)
        vals = [(k * w) % 1 for k in range(t_max)]
        per_t = []
        ordered: list = []
        gaps: Counter = Counter()
        for t in ts:
            y = vals[t - 1]
            at = bisect.bisect_left(ordered, y)
            if not (at < len(ordered) and ordered[at] == y):
                left = ordered[at - 1] if at > 0 else None
                right = ordered[at] if at < len(ordered) else None
                if left is not None and right is not None:
                    gaps[right - left] -= 1
                    if gaps[right - left] == 0:
                        del gaps[right - left]
                if left is not None:
                    gaps[y - left] += 1
                if right is not None:
                    gaps[right - y] += 1
                ordered.insert(at, y)
            per_t.append(len(gaps))
    violations = [t for t, D in zip(ts, per_t) if D > 3]
    return ThreeGapReport(max(per_t) if per_t else 0, violations, per_t)


@dataclass
class EnergyLevel:
    energy: FieldElement      # m_0 + m . omega
    m: tuple
    value: float


def energy_window(field: NumberField, E) -> list[EnergyLevel]:
    """Energies ``m_0 + m . omega`` in ``[E, E+1)`` with all ``m_i >= 0``, sorted.

    Each admissible ``m`` with ``m . omega < E + 1`` contributes the unique
    ``m_0 >= 0`` placing the energy in the window, when one exists.
    """
    E = to_fraction(E)
    if E < 0:
        raise SpectrumError("window start must be >= 0")
    region = ConvexRegion.simplex(field)
    m = enumerate_lattice(region, E + 1)
    one = field.one()
    levels = []
    vals, err = _dot_with_error(field, m)
    for row, v, e in zip(m, vals, err):
        x = FieldElement((0,) + tuple(int(c) for c in row))
        # m0 = max(0, ceil(E - x))
        shifted = FieldElement((E,) + (0,) * field.d) - x
        fl = field.floor_sigma1(shifted)
        m0 = fl + 1 if field.sign_of(shifted - one.scale(fl)) != 0 else fl
        m0 = max(0, m0)
        energy = x + one.scale(m0)
        if field.sign_of(energy - one.scale(E + 1)) < 0:
            levels.append(EnergyLevel(energy, tuple(int(c) for c in row), float(v) + m0))

    def cmp(a, b):
        if abs(a.value - b.value) > 1e-9:
            return -1 if a.value < b.value else 1
        return field.sign_of(a.energy - b.energy)

    levels.sort(key=functools.cmp_to_key(cmp))
    return levels


def spacing_bound_check(s: GapSpectrum, k_prime: float) -> bool:
    """True iff every spacing is at most ``K' / t^d``."""
    if s.count < 2:
        return True
    bound = float(k_prime) / float(s.t) ** s.field.d
    worst = max(s.spacing_values()[s.spacing_index == s.D - 1])
    return worst + float(np.max(s.errors)) * 2 <= bound

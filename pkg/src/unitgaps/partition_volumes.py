"""Lattice partitions by spacing label, their region limits, and volumes.

With ``v_j = m(s_j |u_1(t)|)`` (the omega-coordinates of the j-th spacing), a
point ``m`` of ``M(t)`` is followed by a spacing of label j exactly when
``m + v_j`` lies in ``M(t)`` and ``m + v_i`` does not for every smaller
label ``i < j``.  Dividing by t gives the regions

    P_j(v) = [R  n  (R - v_j)]  minus  union_{i<j} (R - v_i)

whose volumes predict the label proportions up to O(1/t).
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .gap_engine import ConvexRegion, GapSpectrum
from .numberfield import FieldElement, NumberField, to_fraction
from .unit_flow import LabelSet, positive_unit, spacing_labels


class PartitionMismatch(RuntimeError):
    """The formula and direct classifications disagree."""


@dataclass(frozen=True)
class ShiftVectors:
    t: Fraction
    exact: tuple        # per label: tuple of Fractions, m(s_j |u_1(t)|)
    integral: np.ndarray  # per label: whether exact is an integer vector

    @property
    def J(self) -> int:
        return len(self.exact)

    @property
    def lattice(self) -> np.ndarray:
        """Integer shifts; rows of non-integral labels are zero and must be masked."""
        out = np.zeros((self.J, len(self.exact[0]) if self.exact else 0), dtype=np.int64)
        for j, (row, ok) in enumerate(zip(self.exact, self.integral)):
            if ok:
                out[j] = [int(c) for c in row]
        return out

    def normalized(self) -> tuple:
        """Exact ``v_j / t``."""
        return tuple(tuple(c / self.t for c in row) for row in self.exact)

    def normalized_float(self) -> np.ndarray:
        return np.array([[float(c) for c in row] for row in self.normalized()])


def shift_vectors(field: NumberField, labels: LabelSet, u1: FieldElement, t) -> ShiftVectors:
    """``m(s_j |u_1|)`` computed as an element product and as ``S_j U e_1``; both must agree."""
    up = positive_unit(field, u1)
    U = field.mult_matrix(up)
    Ue1 = [row[0] for row in U]
    rows, ok = [], []
    for s in labels.elements:
        prod = field.mul(s, up).coords
        S = field.mult_matrix(s)
        via_matrix = tuple(sum(S[a][b] * Ue1[b] for b in range(len(Ue1))) for a in range(len(S)))
        if prod != via_matrix:
            raise PartitionMismatch(f"shift for label {s} differs between product and matrix paths")
        m = prod[1:]
        rows.append(m)
        ok.append(all(c.denominator == 1 for c in m))
    return ShiftVectors(to_fraction(t), tuple(rows), np.array(ok, dtype=bool))


@dataclass
class LatticePartition:
    direct: np.ndarray    # label per point (by sorted order), -1 for the final point
    formula: np.ndarray   # label from the shift formula, -1 when unclassified
    shifts: ShiftVectors
    index_of: dict = dc_field(repr=False, default_factory=dict)

    @property
    def J(self) -> int:
        return self.shifts.J

    def classes(self) -> list:
        """Point indices of each M_j(t)."""
        return [np.flatnonzero(self.formula == j) for j in range(self.J)]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.formula[self.formula >= 0], minlength=self.J)


def formula_classes(region: ConvexRegion, points: np.ndarray, t, shifts: ShiftVectors) -> np.ndarray:
    """First label j (ascending) with ``m + v_j`` inside ``R(t)``; -1 if none."""
    out = np.full(len(points), -1, dtype=np.int64)
    pending = np.arange(len(points))
    vs = shifts.lattice
    for j in range(shifts.J):
        if not shifts.integral[j] or len(pending) == 0:
            continue
        hit = region.contains_lattice(points[pending] + vs[j], t)
        out[pending[hit]] = j
        pending = pending[~hit]
    return out


def partition_lattice(field: NumberField, region: ConvexRegion, s: GapSpectrum,
                      labels: LabelSet, u1: FieldElement) -> LatticePartition:
    """Classify every point both directly and by the shift formula; raise on any difference."""
    shifts = shift_vectors(field, labels, u1, s.t)
    direct = np.full(s.count, -1, dtype=np.int64)
    if s.count >= 2:
        direct[:-1] = spacing_labels(field, s, labels, u1)
    formula = formula_classes(region, s.points, s.t, shifts)
    if s.count:
        formula[-1] = -1  # the largest point is excluded by convention
    bad = np.flatnonzero(direct != formula)
    if len(bad):
        i = bad[0]
        raise PartitionMismatch(f"t={s.t}: point {s.points[i].tolist()} labelled {direct[i]} "
                                f"directly but {formula[i]} by the shift formula "
                                f"({len(bad)} disagreements)")
    index_of = {tuple(p): i for i, p in enumerate(s.points.tolist())}
    return LatticePartition(direct, formula, shifts, index_of)


def word_counts_formula(part: LatticePartition, l: int) -> dict:
    """Counts of ``M_{j0..jl}(t)``: follow ``m -> m + v_{j0} -> ...`` through the classes."""
    lab = part.formula
    vs = part.shifts.lattice
    counts: dict = {}
    pts = list(part.index_of)  # in point order
    for i, m in enumerate(pts):
        word = []
        cur = i
        for _ in range(l + 1):
            j = lab[cur]
            if j < 0:
                word = None
                break
            word.append(int(j))
            nxt = tuple(int(a + b) for a, b in zip(pts[cur], vs[j]))
            cur = part.index_of.get(nxt)
            if cur is None:
                word = None
                break
        if word is not None:
            w = tuple(word)
            counts[w] = counts.get(w, 0) + 1
    return dict(sorted(counts.items()))


def word_counts_window(part: LatticePartition, l: int) -> dict:
    """Sliding-window counts over the direct label sequence."""
    seq = part.direct[:-1]
    counts: dict = {}
    for i in range(len(seq) - l):
        w = tuple(int(x) for x in seq[i:i + l + 1])
        counts[w] = counts.get(w, 0) + 1
    return dict(sorted(counts.items()))


def check_words(part: LatticePartition, l: int) -> dict:
    a, b = word_counts_formula(part, l), word_counts_window(part, l)
    if a != b:
        diff = sorted(set(a.items()) ^ set(b.items()))
        raise PartitionMismatch(f"length-{l + 1} word counts disagree, e.g. {diff[:3]}")
    return a


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class RegionExpression:
    """``n_{a in include} (R - a)`` minus ``u_{b in exclude} (R - b)``."""

    base: ConvexRegion
    include: tuple = ((),)
    exclude: tuple = ()
    empty: bool = False

    def __post_init__(self):
        d = self.base.dim
        zero = tuple(Fraction(0) for _ in range(d))
        norm = lambda vs: tuple(tuple(to_fraction(c) if not isinstance(c, float) else c for c in v)
                                if len(v) else zero for v in vs)
        object.__setattr__(self, "include", tuple(dict.fromkeys(norm(self.include))))
        object.__setattr__(self, "exclude", tuple(dict.fromkeys(norm(self.exclude))))

    @property
    def dim(self) -> int:
        return self.base.dim

    def shifted(self, c) -> "RegionExpression":
        """``self - c``: shift every translate by ``c``."""
        add = lambda v: tuple(a + b for a, b in zip(v, c))
        return RegionExpression(self.base, tuple(map(add, self.include)),
                                tuple(map(add, self.exclude)), self.empty)

    def __and__(self, other: "RegionExpression") -> "RegionExpression":
        # (A1 \ B1) n (A2 \ B2) = (A1 n A2) \ (B1 u B2)
        return RegionExpression(self.base, self.include + other.include,
                                self.exclude + other.exclude, self.empty or other.empty)

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.empty:
            return np.zeros(len(x), dtype=bool)
        mask = np.ones(len(x), dtype=bool)
        for a in self.include:
            mask &= self.base.contains_points(x + np.array([float(c) for c in a]))
        for b in self.exclude:
            if not mask.any():
                break
            mask &= ~self.base.contains_points(x + np.array([float(c) for c in b]))
        return mask

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.base.bounding_box()
        lo_all, hi_all = lo.copy() - np.inf, hi.copy() + np.inf
        for a in self.include:
            af = np.array([float(c) for c in a])
            lo_all = np.maximum(lo_all, lo - af)
            hi_all = np.minimum(hi_all, hi - af)
        return lo_all, hi_all

    def to_json(self) -> dict:
        return {"include": [[str(c) for c in a] for a in self.include],
                "exclude": [[str(c) for c in b] for b in self.exclude],
                "empty": self.empty}


def region_partition(region: ConvexRegion, v) -> list:
    """``P_1(v), ..., P_J(v)`` for normalized shifts ``v`` (rows in label order)."""
    v = [tuple(row) for row in v]
    return [RegionExpression(region, ((), v[j]), tuple(v[:j])) for j in range(len(v))]


def word_regions(region: ConvexRegion, v, word: Sequence[int]) -> RegionExpression:
    """``P_{j0} n (P_{j1} - v_{j0}) n (P_{j2} - v_{j0} - v_{j1}) n ...``."""
    parts = region_partition(region, v)
    d = region.dim
    c = tuple(Fraction(0) for _ in range(d))
    expr = None
    for j in word:
        piece = parts[j].shifted(c)
        expr = piece if expr is None else expr & piece
        c = tuple(a + b for a, b in zip(c, v[j]))
    return expr


# ---------------------------------------------------------------- volumes

@dataclass(frozen=True)
class VolumeResult:
    estimate: float
    error: float        # certified bound (exact-box, polygon, grid) or 3-sigma CI (monte-carlo)
    method: str
    exact: Fraction | None = None
    samples: int | None = None

    def to_json(self) -> dict:
        out = {"estimate": self.estimate, "error": self.error, "method": self.method}
        if self.exact is not None:
            out["exact"] = str(self.exact)
        if self.samples is not None:
            out["samples"] = self.samples
        return out


def region_volume(region: ConvexRegion) -> VolumeResult:
    if region.kind == "box":
        v = math.prod((b - a for a, b in zip(region.lower, region.upper)), start=Fraction(1))
        return VolumeResult(float(v), 0.0, "exact-box", v)
    if region.kind == "simplex":
        w, err = region.field.sigma1_basis_float()
        vol = 1.0 / (math.factorial(region.dim) * float(np.prod(w)))
        rel = float(np.sum(err / w)) + 1e-15
        return VolumeResult(vol, vol * rel * 2, "simplex-formula")
    if region.dim == 2:
        return volume(RegionExpression(region), "polygon")
    return volume(RegionExpression(region), "monte-carlo")


def _box_of(region: ConvexRegion, shift) -> tuple:
    return (tuple(l - a for l, a in zip(region.lower, shift)),
            tuple(u - a for u, a in zip(region.upper, shift)))


def _exact_box_volume(expr: RegionExpression) -> Fraction:
    R = expr.base
    d = R.dim
    lo = [max(R.lower[k] - a[k] for a in expr.include) for k in range(d)]
    hi = [min(R.upper[k] - a[k] for a in expr.include) for k in range(d)]
    if any(h <= l for l, h in zip(lo, hi)):
        return Fraction(0)
    holes = []
    for b in expr.exclude:
        blo, bhi = _box_of(R, b)
        hlo = [max(x, y) for x, y in zip(blo, lo)]
        hhi = [min(x, y) for x, y in zip(bhi, hi)]
        if all(h > l for l, h in zip(hlo, hhi)):
            holes.append((hlo, hhi))
    total = math.prod((h - l for l, h in zip(lo, hi)), start=Fraction(1))
    if not holes:
        return total
    # coordinate compression: union of holes inside the intersection box
    cuts = [sorted({lo[k], hi[k]} | {h[0][k] for h in holes} | {h[1][k] for h in holes})
            for k in range(d)]
    covered = np.zeros([len(c) - 1 for c in cuts], dtype=bool)
    for hlo, hhi in holes:
        sl = tuple(slice(bisect.bisect_left(cuts[k], hlo[k]), bisect.bisect_left(cuts[k], hhi[k]))
                   for k in range(d))
        covered[sl] = True
    widths = [[c[i + 1] - c[i] for i in range(len(c) - 1)] for c in cuts]
    hole = Fraction(0)
    for idx in zip(*np.nonzero(covered)):
        hole += math.prod((widths[k][i] for k, i in enumerate(idx)), start=Fraction(1))
    return total - hole


def _base_polygon(region: ConvexRegion):
    from shapely.geometry import Polygon, box

    if region.kind == "box":
        return box(*[float(x) for x in region.lower], *[float(x) for x in region.upper])
    if region.kind == "simplex":
        w, _ = region.field.sigma1_basis_float()
        return Polygon([(0, 0), (1 / w[0], 0), (0, 1 / w[1])])
    lo, hi = region.bounding_box()
    pad = 1.0 + float(np.max(hi - lo))
    poly = box(*(lo - pad), *(hi + pad))
    for a, b, _ in region.halfspaces:
        a = np.array([float(c) for c in a])
        b = float(b)
        # clip by a.x <= b: big polygon on the allowed side
        big = 1e3 * pad
        n = a / np.linalg.norm(a)
        p0 = n * (b / np.linalg.norm(a))
        tang = np.array([-n[1], n[0]])
        half = Polygon([p0 + big * tang, p0 - big * tang,
                        p0 - big * tang - big * n, p0 + big * tang - big * n])
        poly = poly.intersection(half)
    return poly


def _polygon_of(expr: RegionExpression):
    from shapely import affinity
    from shapely.ops import unary_union

    base = _base_polygon(expr.base)
    tr = lambda a: affinity.translate(base, -float(a[0]), -float(a[1]))
    shape = base
    for a in expr.include:
        shape = shape.intersection(tr(a))
        if shape.is_empty:
            return shape
    if expr.exclude:
        shape = shape.difference(unary_union([tr(b) for b in expr.exclude]))
    return shape


def volume(expr: RegionExpression, method: str = "monte-carlo", samples: int = 1 << 20,
           seed: int = 0, resolution: int = 512) -> VolumeResult:
    """Volume of a region expression with an error bound.

    ``exact-box``: rational, exact, axis boxes only.  ``polygon``: shapely
    clipping in the plane.  ``monte-carlo``: eight independently scrambled
    Sobol sets, error = 3 standard errors.  ``grid``: midpoint rule, error =
    volume of cells whose corners disagree.
    """
    if expr.empty:
        return VolumeResult(0.0, 0.0, method, Fraction(0) if method == "exact-box" else None)
    if method == "exact-box":
        if expr.base.kind != "box" or any(isinstance(c, float) for v in expr.include + expr.exclude
                                          for c in v):
            raise ValueError("exact-box volumes need an axis box and rational shifts")
        v = _exact_box_volume(expr)
        return VolumeResult(float(v), 0.0, method, v)
    if method == "polygon":
        if expr.dim != 2:
            raise ValueError("polygon volumes are planar only")
        shape = _polygon_of(expr)
        area = float(shape.area)
        return VolumeResult(area, 1e-12 * (1 + len(expr.include) + len(expr.exclude)), method)
    lo, hi = expr.bounding_box()
    if np.any(hi <= lo):
        return VolumeResult(0.0, 0.0, method)
    box_vol = float(np.prod(hi - lo))
    if method == "monte-carlo":
        from scipy.stats import qmc

        reps = 8
        per = max(1, samples // reps)
        m = max(1, int(round(math.log2(per))))
        fr = []
        for k in range(reps):
            pts = qmc.Sobol(expr.dim, scramble=True, seed=seed * 1009 + k).random_base2(m)
            fr.append(expr.contains(lo + pts * (hi - lo)).mean())
        fr = np.array(fr)
        est = box_vol * fr.mean()
        err = box_vol * 3 * fr.std(ddof=1) / math.sqrt(reps)
        return VolumeResult(float(est), float(err), method, samples=reps * (1 << m))
    if method == "grid":
        n = resolution
        axes = [np.linspace(l, h, n + 1) for l, h in zip(lo, hi)]
        mids = [(a[:-1] + a[1:]) / 2 for a in axes]
        cell = box_vol / n ** expr.dim
        centers = np.stack(np.meshgrid(*mids, indexing="ij"), -1).reshape(-1, expr.dim)
        inside = expr.contains(centers).reshape([n] * expr.dim)
        corners = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, expr.dim)
        cin = expr.contains(corners).reshape([n + 1] * expr.dim)
        mixed = np.zeros([n] * expr.dim, dtype=bool)
        for off in np.ndindex(*([2] * expr.dim)):
            sl = tuple(slice(o, o + n) for o in off)
            mixed |= cin[sl] != inside
        return VolumeResult(float(inside.sum() * cell), float(mixed.sum() * cell), method)
    raise ValueError(f"unknown volume method {method!r}")


def _auto_method(region: ConvexRegion, v) -> str:
    if region.kind == "box" and not any(isinstance(c, float) for row in v for c in row):
        return "exact-box"
    if region.dim == 2:
        return "polygon"
    return "monte-carlo"


@dataclass(frozen=True)
class PredictedProportions:
    values: np.ndarray   # vol(P_j) / vol(R)
    errors: np.ndarray   # propagated bounds
    method: str

    @property
    def total(self) -> float:
        return float(self.values.sum())

    @property
    def error_budget(self) -> float:
        return float(self.errors.max()) if len(self.errors) else 0.0


def predicted_proportions(region: ConvexRegion, v, method: str = "auto",
                          samples: int = 1 << 20, seed: int = 0) -> PredictedProportions:
    """``vol(P_j(v)) / vol(R)`` for each label."""
    v = [tuple(row) for row in v]
    if method == "auto":
        method = _auto_method(region, v)
    base = region_volume(region)
    if method == "monte-carlo":
        return _sampled_proportions(region, v, base, samples, seed)
    vals, errs = [], []
    for expr in region_partition(region, v):
        r = volume(expr, method, samples, seed)
        vals.append(r.estimate / base.estimate)
        errs.append(r.error / base.estimate + r.estimate * base.error / base.estimate ** 2)
    return PredictedProportions(np.array(vals), np.array(errs), method)


def classify_points(region: ConvexRegion, v, x: np.ndarray) -> np.ndarray:
    """Label j of each point of R under the region partition; -1 outside R or unclassified."""
    out = np.full(len(x), -1, dtype=np.int64)
    pending = np.flatnonzero(region.contains_points(x))
    for j, row in enumerate(v):
        if len(pending) == 0:
            break
        hit = region.contains_points(x[pending] + np.array([float(c) for c in row]))
        out[pending[hit]] = j
        pending = pending[~hit]
    return out


def _sampled_proportions(region, v, base, samples, seed) -> PredictedProportions:
    # one shared point set classifies all labels at once: O(J n) membership tests
    from scipy.stats import qmc

    lo, hi = region.bounding_box()
    box_vol = float(np.prod(hi - lo))
    reps = 8
    m = max(1, int(round(math.log2(max(1, samples // reps)))))
    J = len(v)
    fr = np.zeros((reps, J))
    for k in range(reps):
        pts = lo + qmc.Sobol(region.dim, scramble=True, seed=seed * 1009 + k).random_base2(m) * (hi - lo)
        lab = classify_points(region, v, pts)
        fr[k] = np.bincount(lab[lab >= 0], minlength=J) / len(pts)
    vals = box_vol * fr.mean(axis=0) / base.estimate
    errs = box_vol * 3 * fr.std(axis=0, ddof=1) / math.sqrt(reps) / base.estimate
    return PredictedProportions(vals, errs, "monte-carlo")


def lipschitz_estimate(region: ConvexRegion, v, eta: float, trials: int = 8,
                       samples: int = 1 << 16, seed: int = 0) -> float:
    """Largest observed ``sum_j vol(P_j(v) sym-diff P_j(v')) / eta`` over random ``||v - v'||_inf <= eta``."""
    from scipy.stats import qmc

    rng = np.random.default_rng(seed)
    vf = np.array([[float(c) for c in row] for row in v])
    lo, hi = region.bounding_box()
    box_vol = float(np.prod(hi - lo))
    m = max(1, int(round(math.log2(samples))))
    x = lo + qmc.Sobol(region.dim, scramble=True, seed=seed).random_base2(m) * (hi - lo)
    ref = classify_points(region, vf, x)
    worst = 0.0
    for _ in range(trials):
        vp = vf + rng.uniform(-eta, eta, vf.shape)
        lab = classify_points(region, vp, x)
        # each disagreeing point lies in two symmetric differences
        worst = max(worst, 2 * box_vol * float(np.mean(lab != ref)) / eta)
    return worst


# ---------------------------------------------------------------- export

def partition_csv(part: LatticePartition, points: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    d = points.shape[1]
    w.writerow([f"m{k + 1}" for k in range(d)] + ["label"])
    for p, lab in zip(points.tolist(), part.formula.tolist()):
        w.writerow(p + [lab])
    return buf.getvalue()


def volume_report(pred: PredictedProportions, labels: LabelSet, v) -> str:
    return json.dumps({
        "method": pred.method,
        "total": pred.total,
        "error_budget": pred.error_budget,
        "labels": [
            {"label": str(s), "shift": [str(c) for c in row], "proportion": float(p), "error": float(e)}
            for s, row, p, e in zip(labels.elements, v, pred.values, pred.errors)
        ],
    }, indent=2)

"""Exact arithmetic in a number field with certified embeddings.

A field is described by the minimal polynomial of a primitive element and by
polynomials expressing the generators omega_1..omega_d in that element.
Elements are stored by their exact rational coordinates in the basis
``1, omega_1, ..., omega_d``.  Embeddings are enclosed in rational disks that
can be refined to any precision; real roots are refined by bisection with
exact sign evaluation, complex roots by Newton steps certified with the
``deg * |f(z)| / |f'(z)|`` inclusion radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

DEFAULT_BITS = 80


class FieldError(ValueError):
    """Invalid field description or an operation undefined for the input."""


def to_fraction(x) -> Fraction:
    """Parse ints, Fractions, and decimal/fraction strings exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


@dataclass(frozen=True)
class FieldElement:
    """Coordinates ``(n_0, ..., n_d)`` of ``n_0 + n_1 omega_1 + ... + n_d omega_d``."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(to_fraction(c) for c in self.coords))

    @classmethod
    def of(cls, *values) -> "FieldElement":
        return cls(tuple(values))

    @classmethod
    def zero(cls, n: int) -> "FieldElement":
        return cls((0,) * n)

    @classmethod
    def one(cls, n: int) -> "FieldElement":
        return cls((1,) + (0,) * (n - 1))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def m(self) -> tuple:
        """Truncated expansion: the coefficients of omega_1..omega_d."""
        return self.coords[1:]

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "FieldElement":
        return FieldElement(tuple(-a for a in self.coords))

    def scale(self, q) -> "FieldElement":
        q = to_fraction(q)
        return FieldElement(tuple(q * a for a in self.coords))

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"

    @classmethod
    def parse(cls, text: str) -> "FieldElement":
        return cls(tuple(text.strip().strip("()").split(",")))


@dataclass(frozen=True)
class Disk:
    """Closed disk ``|z - center| <= radius`` in the complex plane (mpmath values).

    ``prec`` is the working precision used when reading parts of the center;
    mpmath rounds ``mpc.real`` to the ambient precision otherwise.
    """

    center: mpmath.mpc
    radius: mpmath.mpf
    prec: int = 53

    @property
    def is_real(self) -> bool:
        return self.center.imag == 0

    @property
    def lo(self) -> mpmath.mpf:
        with mpmath.workprec(self.prec):
            return self.center.real - self.radius

    @property
    def hi(self) -> mpmath.mpf:
        with mpmath.workprec(self.prec):
            return self.center.real + self.radius

    def contains(self, z) -> bool:
        with mpmath.workprec(self.prec):
            return abs(mpmath.mpc(z) - self.center) <= self.radius

    def __add__(self, other: "Disk") -> "Disk":
        prec = max(self.prec, other.prec)
        with mpmath.workprec(prec):
            return Disk(self.center + other.center, self.radius + other.radius, prec)

    def __mul__(self, other: "Disk") -> "Disk":
        prec = max(self.prec, other.prec)
        with mpmath.workprec(prec):
            r = (abs(self.center) * other.radius + abs(other.center) * self.radius
                 + self.radius * other.radius)
            return Disk(self.center * other.center, r * (1 + mpmath.mpf(2) ** (8 - prec)), prec)


# --- exact polynomial helpers (ascending coefficient lists of Fractions) ---

def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _pmul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _pmod(p, f):
    """Remainder of p modulo the monic polynomial f."""
    p = _trim(p)
    n = len(f) - 1
    while len(p) > n:
        c = p[-1]
        shift = len(p) - 1 - n
        for k in range(n + 1):
            p[shift + k] -= c * f[k]
        p = _trim(p)
    return p + [Fraction(0)] * (n - len(p))


def _peval(p, x):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _cpeval(p, z):
    """Evaluate a rational polynomial at a complex rational ``z = (re, im)``."""
    zr, zi = z
    ar, ai = Fraction(0), Fraction(0)
    for c in reversed(p):
        ar, ai = ar * zr - ai * zi + c, ar * zi + ai * zr
    return ar, ai


def _derivative(p):
    return [k * p[k] for k in range(1, len(p))]


def _taylor_abs_bound(p, z, r):
    """Upper bound on ``|p(z + h) - p(z)|`` over ``|h| <= r`` (exact rationals)."""
    bound = Fraction(0)
    q = list(p)
    fact = 1
    rk = Fraction(1)
    for k in range(1, len(p)):
        q = _derivative(q)
        fact *= k
        rk *= r
        qr, qi = _cpeval(q, z)
        bound += (abs(qr) + abs(qi)) / fact * rk
    return bound


def solve_exact(a, b):
    """Solve ``a x = b`` over the rationals by Gaussian elimination."""
    n = len(a)
    m = [list(row) + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise FieldError("singular matrix")
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                fac = m[r][col] / pv
                row_c = m[col]
                m[r] = [x - fac * y for x, y in zip(m[r], row_c)]
    return [m[i][n] / m[i][i] for i in range(n)]


def det_exact(a) -> Fraction:
    n = len(a)
    m = [list(map(Fraction, row)) for row in a]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        pv = m[col][col]
        det *= pv
        for r in range(col + 1, n):
            if m[r][col] != 0:
                fac = m[r][col] / pv
                m[r] = [x - fac * y for x, y in zip(m[r], m[col])]
    return det


def inverse_exact(a):
    n = len(a)
    cols = [solve_exact(a, [Fraction(int(i == j)) for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def matmul_exact(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0))
             for j in range(len(b[0]))] for i in range(len(a))]


def _mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    p, q = mpmath.libmp.to_rational(mpmath.mpf(x)._mpf_)
    return Fraction(int(p), int(q))


def _fraction_to_mpf(q: Fraction) -> mpmath.mpf:
    return mpmath.mpf(q.numerator) / q.denominator


@dataclass(frozen=True)
class _Root:
    """Isolating enclosure of one root of the minimal polynomial.

    Real roots keep a bracketing interval ``[lo, hi]`` with a sign change;
    complex roots keep a rational disk with ``center = (re, im)``.
    """

    real: bool
    lo: Fraction | None = None
    hi: Fraction | None = None
    center: tuple | None = None
    radius: Fraction | None = None
    # isolating rectangle (re_lo, re_hi, im_lo, im_hi) for complex roots
    rect: tuple | None = None

    def disk(self):
        if self.real:
            return ((self.lo + self.hi) / 2, Fraction(0)), (self.hi - self.lo) / 2
        return self.center, self.radius


class NumberField:
    """Degree ``d+1`` number field with basis ``1, omega_1, ..., omega_d``.

    Parameters
    ----------
    minpoly : integer coefficients of the primitive element's minimal
        polynomial, highest degree first.
    omega_defs : for each omega_j, rational coefficients (highest degree
        first) of a polynomial expressing it in the primitive element.
    omega_approx : numeric hints for omega_1..omega_d selecting the trivial
        embedding sigma_1; defaults to the smallest real root.
    """

    def __init__(self, minpoly: Sequence, omega_defs: Sequence[Sequence],
                 omega_approx: Sequence | None = None, *, hint_tol: float = 1e-6):
        coeffs = [to_fraction(c) for c in minpoly]
        if any(c.denominator != 1 for c in coeffs):
            raise FieldError("minimal polynomial must have integer coefficients")
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
        if len(coeffs) < 2:
            raise FieldError("minimal polynomial must have degree >= 1")
        self.minpoly = tuple(int(c) for c in coeffs)
        lead = coeffs[0]
        self._f = [c / lead for c in reversed(coeffs)]  # monic, ascending
        self.degree = len(self._f) - 1
        self.d = self.degree - 1
        n = self.degree

        x = sympy.Symbol("x")
        poly = sympy.Poly(list(self.minpoly), x)
        if sympy.degree(sympy.gcd(poly, poly.diff(x)), x) > 0:
            raise FieldError("minimal polynomial has repeated roots")
        if not poly.is_irreducible:
            raise FieldError("minimal polynomial is reducible over Q")

        if len(omega_defs) != self.d:
            raise FieldError(f"need {self.d} generator definitions, got {len(omega_defs)}")
        basis = [[Fraction(1)]]
        for od in omega_defs:
            p = [to_fraction(c) for c in reversed(list(od))]
            basis.append(_pmod(p, self._f))
        basis[0] = _pmod(basis[0], self._f)
        # columns = power-basis coordinates of each basis element
        self._to_power = [[basis[j][i] for j in range(n)] for i in range(n)]
        if det_exact(self._to_power) == 0:
            raise FieldError("1, omega_1, ..., omega_d is not a Q-basis")
        self._from_power = inverse_exact(self._to_power)
        self._basis_power = basis

        self._tensor = [[self._from_power_coords(_pmod(_pmul(basis[i], basis[j]), self._f))
                         for j in range(n)] for i in range(n)]

        self._roots = self._isolate(poly, omega_approx, hint_tol)
        self.r1 = sum(1 for r in self._roots if r.real)
        self.r2 = len(self._roots) - self.r1
        self._refined: dict = {}

    # --- construction helpers ---

    def _from_power_coords(self, p) -> tuple:
        p = list(p) + [Fraction(0)] * (self.degree - len(p))
        return tuple(sum((self._from_power[i][k] * p[k] for k in range(self.degree)), Fraction(0))
                     for i in range(self.degree))

    def _power_poly(self, a: FieldElement):
        n = self.degree
        return [sum((self._to_power[i][j] * a.coords[j] for j in range(n)), Fraction(0))
                for i in range(n)]

    def _isolate(self, poly, omega_approx, hint_tol):
        reals, complexes = poly.intervals(all=True)
        real_roots = [_Root(True, lo=Fraction(str(a)), hi=Fraction(str(b))) for (a, b), _ in reals]
        real_roots = [self._refine_real(r, DEFAULT_BITS) for r in real_roots]

        def q(v):
            return Fraction(str(v))

        approx = mpmath.polyroots([int(c) for c in self.minpoly], maxsteps=200, extraprec=200)
        complex_roots = []
        for (z0, z1), _ in complexes:
            re0, im0 = q(sympy.re(z0)), q(sympy.im(z0))
            re1, im1 = q(sympy.re(z1)), q(sympy.im(z1))
            if im1 <= 0:
                continue  # keep one representative per conjugate pair
            rect = (re0, re1, im0, im1)
            inside = [z for z in approx
                      if mpmath.im(z) > 0
                      and re0 <= _mpf_to_fraction(mpmath.re(z)) <= re1
                      and im0 <= _mpf_to_fraction(mpmath.im(z)) <= im1]
            if len(inside) != 1:
                raise FieldError("complex root isolation failed")
            root = _Root(False, rect=rect, center=(Fraction(0), Fraction(0)), radius=Fraction(0))
            complex_roots.append(self._refine_complex(root, DEFAULT_BITS, inside[0]))
        complex_roots.sort(key=lambda r: (r.center[0], r.center[1]))

        if not real_roots:
            raise FieldError("field has no real embedding; sigma_1 must be real")
        real_roots.sort(key=lambda r: r.lo)
        if omega_approx is None:
            first = 0
        else:
            hints = [float(to_fraction(h)) for h in omega_approx]
            if len(hints) != self.d:
                raise FieldError("need one numeric hint per generator")
            matches = []
            for idx, r in enumerate(real_roots):
                mid = (r.lo + r.hi) / 2
                vals = [float(_peval(self._basis_power[j + 1], mid)) for j in range(self.d)]
                if all(abs(v - h) <= hint_tol * max(1.0, abs(h)) for v, h in zip(vals, hints)):
                    matches.append(idx)
            if not matches:
                raise FieldError("no real embedding matches the omega hints")
            if len(matches) > 1:
                raise FieldError("ambiguous root selection: several embeddings match the hints")
            first = matches[0]
        ordered = [real_roots[first]] + [r for i, r in enumerate(real_roots) if i != first]
        return ordered + complex_roots

    def _refine_real(self, root: _Root, bits: int) -> _Root:
        lo, hi = root.lo, root.hi
        f = self._f
        slo = _peval(f, lo) > 0
        target = Fraction(1, 2 ** bits)
        while hi - lo > 2 * target:
            mid = (lo + hi) / 2
            v = _peval(f, mid)
            if v == 0:
                raise FieldError("rational root in minimal polynomial")
            if (v > 0) == slo:
                lo = mid
            else:
                hi = mid
        return _Root(True, lo=lo, hi=hi)

    def _refine_complex(self, root: _Root, bits: int, start=None) -> _Root:
        re0, re1, im0, im1 = root.rect
        f = self._f
        df = _derivative(f)
        n = self.degree
        prec = bits + 30
        z = mpmath.mpc(start) if start is not None else mpmath.mpc(
            _fraction_to_mpf(root.center[0]), _fraction_to_mpf(root.center[1]))
        coeffs = [int(c) for c in self.minpoly]
        while True:
            with mpmath.workprec(prec):
                for _ in range(200):
                    fz = mpmath.polyval(coeffs, z)
                    dfz = mpmath.polyval([c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])], z)
                    step = fz / dfz
                    z = z - step
                    if abs(step) < mpmath.mpf(2) ** (-prec + 8):
                        break
                # mpc.real rounds to the ambient precision
                c = (_mpf_to_fraction(z.real), _mpf_to_fraction(z.imag))
            fr, fi = _cpeval(f, c)
            dr, di = _cpeval(df, c)
            den = max(abs(dr), abs(di))
            if den == 0:
                raise FieldError("derivative vanishes at complex root")
            radius = n * (abs(fr) + abs(fi)) / den
            inside = (re0 <= c[0] - radius and c[0] + radius <= re1
                      and im0 <= c[1] - radius and c[1] + radius <= im1)
            if radius <= Fraction(1, 2 ** bits) and inside:
                return _Root(False, center=c, radius=radius, rect=root.rect)
            prec *= 2
            if prec > 1 << 16:
                raise FieldError("complex root refinement did not converge")

    def _root(self, i: int, bits: int) -> _Root:
        key = (i, bits)
        cached = self._refined.get(key)
        if cached is not None:
            return cached
        base = self._roots[i]
        if bits <= DEFAULT_BITS:
            return base
        if base.real:
            out = self._refine_real(base, bits)
        else:
            out = self._refine_complex(base, bits)
        self._refined[key] = out
        return out

    # --- basic structure ---

    @property
    def n_embeddings(self) -> int:
        """Number of infinite places ``r1 + r2``."""
        return self.r1 + self.r2

    @property
    def signature(self) -> tuple[int, int]:
        return self.r1, self.r2

    def element(self, *coords) -> FieldElement:
        if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
            coords = tuple(coords[0])
        if len(coords) != self.degree:
            raise FieldError(f"expected {self.degree} coordinates")
        return FieldElement(tuple(coords))

    def one(self) -> FieldElement:
        return FieldElement.one(self.degree)

    def zero(self) -> FieldElement:
        return FieldElement.zero(self.degree)

    def omega(self, j: int) -> FieldElement:
        """Basis element omega_j (1-based)."""
        c = [0] * self.degree
        c[j] = 1
        return FieldElement(tuple(c))

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        n = self.degree
        out = [Fraction(0)] * n
        T = self._tensor
        for i, ai in enumerate(a.coords):
            if not ai:
                continue
            Ti = T[i]
            for j, bj in enumerate(b.coords):
                if not bj:
                    continue
                c = ai * bj
                for k, t in enumerate(Ti[j]):
                    if t:
                        out[k] += c * t
        return FieldElement(tuple(out))

    def mult_matrix(self, a: FieldElement) -> list[list[Fraction]]:
        """Matrix of multiplication by ``a``; column j holds ``n(a * b_j)``."""
        n = self.degree
        cols = [self.mul(a, FieldElement.one(n) if j == 0 else self.omega(j)).coords
                for j in range(n)]
        return [[cols[j][i] for j in range(n)] for i in range(n)]

    def inv(self, a: FieldElement) -> FieldElement:
        if a.is_zero():
            raise FieldError("zero has no inverse")
        e1 = [Fraction(1)] + [Fraction(0)] * (self.degree - 1)
        return FieldElement(tuple(solve_exact(self.mult_matrix(a), e1)))

    def power(self, a: FieldElement, k: int) -> FieldElement:
        if k < 0:
            a, k = self.inv(a), -k
        result = self.one()
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return result

    def norm(self, a: FieldElement) -> Fraction:
        return det_exact(self.mult_matrix(a))

    # --- embeddings ---

    def _exact_enclosure(self, a: FieldElement, i: int, bits: int):
        """Exact rational disk ``(center, radius)`` containing ``sigma_i(a)``."""
        p = self._power_poly(a)
        c, r = self._root(i, bits).disk()
        val = _cpeval(p, c)
        return val, _taylor_abs_bound(p, c, r)

    def embed(self, a: FieldElement, i: int, precision: int = DEFAULT_BITS) -> Disk:
        """Certified disk of radius at most ``2**-precision`` containing ``sigma_i(a)``.

        ``i`` is 0-based over the ``r1 + r2`` places; for complex places the
        member with positive imaginary part of the primitive root is used.
        """
        if not 0 <= i < self.n_embeddings:
            raise FieldError(f"embedding index {i} out of range")
        if precision < 24:
            raise FieldError("precision below the 24-bit floor")
        if all(c == 0 for c in a.coords[1:]):
            with mpmath.workprec(precision + 40):
                return Disk(mpmath.mpc(_fraction_to_mpf(a.coords[0])), mpmath.mpf(0), precision + 40)
        target = Fraction(1, 2 ** precision)
        bits = max(precision + 8, DEFAULT_BITS)
        while True:
            (cr, ci), r = self._exact_enclosure(a, i, bits)
            if r <= target / 2:
                break
            bits += max(8, bits // 2)
        with mpmath.workprec(precision + 40):
            center = mpmath.mpc(_fraction_to_mpf(cr), _fraction_to_mpf(ci))
            slack = (abs(center) + 1) * mpmath.mpf(2) ** (-(precision + 36))
            return Disk(center, _fraction_to_mpf(r) + slack, precision + 40)

    def embedding_values(self, a: FieldElement, bits: int = DEFAULT_BITS) -> list:
        """High-precision values ``sigma_i(a)`` for the ``r1 + r2`` places (mpmath)."""
        return [self.embed(a, i, bits).center for i in range(self.n_embeddings)]

    def embedding_rows(self, bits: int = DEFAULT_BITS):
        """All ``d+1`` complex embeddings of the basis as an mpmath matrix.

        Rows follow real places first, then each complex place followed by its
        conjugate.  Row i is ``(sigma_i(1), sigma_i(omega_1), ...)``, a left
        eigenvector of every multiplication matrix.
        """
        n = self.degree
        basis = [self.one()] + [self.omega(j) for j in range(1, n)]
        rows = []
        with mpmath.workprec(bits + 40):
            for i in range(self.n_embeddings):
                vals = [self.embed(b, i, bits).center for b in basis]
                rows.append(vals)
                if i >= self.r1:
                    rows.append([mpmath.conj(v) for v in vals])
            return mpmath.matrix(rows)

    def all_embeddings(self, a: FieldElement, bits: int = DEFAULT_BITS) -> list:
        """Values of ``a`` under all ``d+1`` complex embeddings, ordered as ``embedding_rows``."""
        out = []
        with mpmath.workprec(bits + 40):
            for i in range(self.n_embeddings):
                v = self.embed(a, i, bits).center
                out.append(v)
                if i >= self.r1:
                    out.append(mpmath.conj(v))
        return out

    def minkowski(self, a: FieldElement) -> np.ndarray:
        """Real embeddings followed by (Re, Im) of one member of each complex pair."""
        vals = self.embedding_values(a, 60)
        out = [float(v.real) for v in vals[: self.r1]]
        for v in vals[self.r1:]:
            out.extend([float(v.real), float(v.imag)])
        return np.array(out)

    def log_embedding(self, u: FieldElement, bits: int = DEFAULT_BITS) -> list:
        """``(log|sigma_1(u)|, ..., log|sigma_{r1+r2}(u)|)`` as mpmath numbers."""
        if u.is_zero():
            raise FieldError("log embedding undefined at zero")
        vals = self.embedding_values(u, bits)
        with mpmath.workprec(bits):
            return [mpmath.log(abs(v)) for v in vals]

    def sign_of(self, a: FieldElement) -> int:
        """Exact sign of ``sigma_1(a)``."""
        if a.is_zero():
            return 0
        if not any(a.coords[1:]):
            return 1 if a.coords[0] > 0 else -1
        p = self._power_poly(a)
        bits = 64
        while True:
            c, r = self._root(0, bits).disk()
            val = _peval(p, c[0])
            rad = _taylor_abs_bound(p, c, r)
            if abs(val) > rad:
                return 1 if val > 0 else -1
            bits *= 2

    def compare(self, a: FieldElement, b: FieldElement) -> int:
        return self.sign_of(a - b)

    def floor_sigma1(self, a: FieldElement) -> int:
        """Exact ``floor(sigma_1(a))``."""
        if not any(a.coords[1:]):
            return math.floor(a.coords[0])
        p = self._power_poly(a)
        bits = 64
        while True:
            c, r = self._root(0, bits).disk()
            val = _peval(p, c[0])
            rad = _taylor_abs_bound(p, c, r)
            lo, hi = val - rad, val + rad
            fl = math.floor(lo)
            if hi < fl + 1:
                return fl
            bits *= 2

    def sigma1_float(self, a: FieldElement) -> float:
        (cr, _), _ = self._exact_enclosure(a, 0, DEFAULT_BITS)
        return float(cr)

    def sigma1_basis_float(self) -> tuple[np.ndarray, np.ndarray]:
        """Doubles ``w_j`` near ``sigma_1(omega_j)`` and rigorous bounds on ``|w_j - sigma_1(omega_j)|``."""
        cached = self._refined.get("sigma1_float")
        if cached is not None:
            return cached[0].copy(), cached[1].copy()
        w, err = [], []
        for j in range(1, self.degree):
            (cr, _), r = self._exact_enclosure(self.omega(j), 0, DEFAULT_BITS)
            wj = float(cr)
            w.append(wj)
            e = abs(Fraction(wj) - cr) + r
            err.append(float(e) * (1 + 2 ** -50) + 2 ** -1074)
        out = (np.array(w), np.array(err))
        self._refined["sigma1_float"] = out
        return out[0].copy(), out[1].copy()

    def __repr__(self) -> str:
        return (f"NumberField(minpoly={list(self.minpoly)}, degree={self.degree}, "
                f"signature=({self.r1}, {self.r2}))")


def make_field(minpoly, omega_defs, omega_approx=None, **kwargs) -> NumberField:
    return NumberField(minpoly, omega_defs, omega_approx, **kwargs)


def mult_matrix(field: NumberField, a: FieldElement):
    return field.mult_matrix(a)


def unit_group_rank(field: NumberField) -> int:
    return field.r1 + field.r2 - 1


def as_matrix_float(m: Iterable[Iterable[Fraction]]) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in m])

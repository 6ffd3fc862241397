"""Exact Gaussian-rational scalars and dense elimination.

Exact matrices are numpy object arrays whose entries are ``gmpy2.mpq`` (real
values) or :class:`GaussRational` (values with a nonzero imaginary part).  The
mixed representation keeps real-valued work at gmpy2 speed while the complex
case still goes through ordinary numpy operators.

Inversion and row reduction clear denominators and run fraction-free
Gauss-Jordan elimination over Z or Z[i], so intermediate entries stay
bounded by minors of the input and no gcd is taken until the very end.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Integral, Rational

import gmpy2
import numpy as np
from gmpy2 import mpq, mpz

ZERO = mpq(0)
ONE = mpq(1)


class GaussRational:
    """A Gaussian rational ``re + i*im`` with ``im != 0``.

    Use :func:`gauss` to build values; it collapses to ``mpq`` when the
    imaginary part vanishes, which keeps equality and hashing consistent.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = mpq(re)
        self.im = mpq(im)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, GaussRational):
            return gauss(self.re + other.re, self.im + other.im)
        if _is_real(other):
            return GaussRational(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GaussRational):
            return gauss(self.re - other.re, self.im - other.im)
        if _is_real(other):
            return GaussRational(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if _is_real(other):
            return GaussRational(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GaussRational):
            return gauss(self.re * other.re - self.im * other.im,
                         self.re * other.im + self.im * other.re)
        if _is_real(other):
            return gauss(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GaussRational):
            return self * other.inverse()
        if _is_real(other):
            return gauss(self.re / other, self.im / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if _is_real(other):
            return self.inverse() * other
        return NotImplemented

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def inverse(self):
        norm = self.re * self.re + self.im * self.im
        return GaussRational(self.re / norm, -self.im / norm)

    def conjugate(self):
        return GaussRational(self.re, -self.im)

    # comparisons ----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, GaussRational):
            return self.re == other.re and self.im == other.im
        if _is_real(other):
            return False
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return True

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    def __repr__(self):
        return f"GaussRational({self.re}, {self.im})"


def _is_real(x) -> bool:
    return isinstance(x, (Rational, type(ZERO), Integral))


def gauss(re, im=0):
    """Exact value ``re + i*im``; ``mpq`` when ``im == 0``."""
    im = mpq(im)
    if im == 0:
        return mpq(re)
    return GaussRational(re, im)


def real_part(x):
    return x.re if isinstance(x, GaussRational) else mpq(x)


def imag_part(x):
    return x.im if isinstance(x, GaussRational) else ZERO


def to_exact(x):
    """Convert a Python number (int, Fraction, mpq, float, complex) or a
    ``"p/q"`` string to an exact scalar.  Floats convert by their exact
    binary value."""
    if isinstance(x, GaussRational):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, complex):
        return gauss(mpq(x.real), mpq(x.imag))
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, (np.integer,)):
        return mpq(int(x))
    if isinstance(x, (np.floating,)):
        return mpq(float(x))
    if isinstance(x, np.complexfloating):
        return gauss(mpq(float(x.real)), mpq(float(x.imag)))
    return mpq(x)


def parse_rational(text: str):
    text = text.strip()
    if "/" in text:
        p, q = text.split("/", 1)
        return mpq(int(p), int(q))
    return mpq(int(text))


def format_rational(q) -> str:
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


def exact_array(values) -> np.ndarray:
    """Object array of exact scalars with the same shape as ``values``."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = to_exact(x)
    return out


def zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(ZERO)
    return out


def eye(size: int) -> np.ndarray:
    out = zeros((size, size))
    for i in range(size):
        out[i, i] = ONE
    return out


def to_complex(arr: np.ndarray) -> np.ndarray:
    return np.array([complex(x) for x in arr.flat], dtype=complex).reshape(arr.shape)


def abs_squared(x):
    """Exact squared modulus."""
    if isinstance(x, GaussRational):
        return x.re * x.re + x.im * x.im
    return mpq(x) * mpq(x)


def max_abs(arr: np.ndarray) -> float:
    """Max-modulus of an exact array as a float (0.0 iff exactly zero)."""
    if arr.size == 0:
        return 0.0
    best = max(abs_squared(x) for x in arr.flat)
    return float(gmpy2.sqrt(best)) if best else 0.0


def is_zero(arr: np.ndarray) -> bool:
    return all(x == 0 for x in arr.flat)


# ---------------------------------------------------------------------------
# fraction-free elimination
# ---------------------------------------------------------------------------

def _integer_parts(arr: np.ndarray):
    """Write ``arr = (re + i*im) / den`` with mpz object arrays ``re``, ``im``.

    ``im`` is None when every entry is real.
    """
    flat = list(arr.flat)
    complex_entries = any(isinstance(x, GaussRational) for x in flat)
    den = mpz(1)
    for x in flat:
        den = gmpy2.lcm(den, real_part(x).denominator)
        if complex_entries:
            den = gmpy2.lcm(den, imag_part(x).denominator)

    def scale(q):
        return q.numerator * (den // q.denominator)

    re = np.array([scale(real_part(x)) for x in flat], dtype=object).reshape(arr.shape)
    im = None
    if complex_entries:
        im = np.array([scale(imag_part(x)) for x in flat], dtype=object).reshape(arr.shape)
    return re, im, den


def _eliminate_real(a: np.ndarray) -> list[int]:
    """In-place fraction-free Gauss-Jordan over Z.  Returns pivot columns;
    pivot ``i`` sits in row ``i``."""
    rows, cols = a.shape
    prev = mpz(1)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c] != 0)
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        piv = a[r, c]
        others = np.r_[0:r, r + 1:rows]
        if others.size:
            block = a[others] * piv - np.outer(a[others, c], a[r])
            if prev != 1:
                block = block // prev
            a[others] = block
        prev = piv
        pivots.append(c)
        r += 1
    return pivots


def _eliminate_gauss(ar: np.ndarray, ai: np.ndarray) -> list[int]:
    """In-place fraction-free Gauss-Jordan over Z[i] on ``ar + i*ai``."""
    rows, cols = ar.shape
    qr, qi = mpz(1), mpz(0)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero((ar[r:, c] != 0) | (ai[r:, c] != 0))
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            ar[[r, p]] = ar[[p, r]]
            ai[[r, p]] = ai[[p, r]]
        pr, pi = ar[r, c], ai[r, c]
        others = np.r_[0:r, r + 1:rows]
        if others.size:
            xr, xi = ar[others], ai[others]
            cr, ci = ar[others, c], ai[others, c]
            rr, ri = ar[r], ai[r]
            yr = xr * pr - xi * pi - (np.outer(cr, rr) - np.outer(ci, ri))
            yi = xr * pi + xi * pr - (np.outer(cr, ri) + np.outer(ci, rr))
            if qi != 0 or qr != 1:
                norm = qr * qr + qi * qi
                yr, yi = (yr * qr + yi * qi) // norm, (yi * qr - yr * qi) // norm
            ar[others] = yr
            ai[others] = yi
        qr, qi = pr, pi
        pivots.append(c)
        r += 1
    return pivots


def _gauss_quotient(nr, ni, dr, di, scale):
    """Exact value ``scale * (nr + i ni) / (dr + i di)``."""
    norm = dr * dr + di * di
    re = mpq(nr * dr + ni * di, norm) * scale
    im = mpq(ni * dr - nr * di, norm) * scale
    return gauss(re, im)


def rank(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    re, im, _ = _integer_parts(arr)
    if im is None:
        return len(_eliminate_real(re))
    return len(_eliminate_gauss(re, im))


def inverse(arr: np.ndarray):
    """Return ``(inverse, rank)``; ``inverse`` is None when singular."""
    size = arr.shape[0]
    if arr.shape != (size, size):
        raise ValueError("inverse of a non-square matrix")
    if size == 0:
        return zeros((0, 0)), 0
    re, im, den = _integer_parts(arr)
    ident = np.array([mpz(int(i == j)) for i in range(size) for j in range(size)],
                     dtype=object).reshape(size, size)
    if im is None:
        a = np.concatenate([re, ident], axis=1)
        pivots = _eliminate_real(a)
        rk = sum(1 for c in pivots if c < size)
        if rk < size:
            return None, rk
        out = np.empty((size, size), dtype=object)
        scale = mpq(den)
        for i in range(size):
            d = a[i, i]
            for j in range(size):
                out[i, j] = mpq(a[i, size + j], d) * scale
        return out, size
    zero_block = np.array([mpz(0)] * (size * size), dtype=object).reshape(size, size)
    ar = np.concatenate([re, ident], axis=1)
    ai = np.concatenate([im, zero_block], axis=1)
    pivots = _eliminate_gauss(ar, ai)
    rk = sum(1 for c in pivots if c < size)
    if rk < size:
        return None, rk
    out = np.empty((size, size), dtype=object)
    scale = mpq(den)
    for i in range(size):
        dr, di = ar[i, i], ai[i, i]
        for j in range(size):
            out[i, j] = _gauss_quotient(ar[i, size + j], ai[i, size + j], dr, di, scale)
    return out, size


def rref(arr: np.ndarray):
    """Reduced row echelon form and pivot columns."""
    rows, cols = arr.shape
    if arr.size == 0:
        return zeros((rows, cols)), []
    re, im, _ = _integer_parts(arr)
    out = zeros((rows, cols))
    if im is None:
        pivots = _eliminate_real(re)
        for i, c in enumerate(pivots):
            d = re[i, c]
            for j in range(cols):
                out[i, j] = mpq(re[i, j], d)
        return out, pivots
    pivots = _eliminate_gauss(re, im)
    for i, c in enumerate(pivots):
        dr, di = re[i, c], im[i, c]
        for j in range(cols):
            out[i, j] = _gauss_quotient(re[i, j], im[i, j], dr, di, ONE)
    return out, pivots

"""Three-layer block matrices over M_k(C), in exact or floating arithmetic.

A :class:`LayeredMatrix` stores an element of M_m(M_n(M_k(C))) as one dense
scalar matrix.  The scalar at outer index i, middle index p and inner index r
(all zero-based) lives at flat index ``(i*n + p)*k + r``, on rows and columns
alike.  Reshaping the data to ``(m, n, k, cols, n_cols, k)`` therefore gives
a view indexed by (outer, middle, inner) on both sides, which is how most of
the block bookkeeping below is done.

Two arithmetic modes exist:

* ``"float"``: complex128 arrays; every comparison takes a tolerance.
* ``"exact"``: object arrays of Gaussian rationals (see ``_exact``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _exact as E
from .errors import (
    DimensionMismatch,
    ExactModeUnsupported,
    InvalidSubalgebra,
    NegativeEigenvalue,
    NotHermitian,
    NotInvertible,
    SchemaError,
)

DEFAULT_TOL = 1e-10
MODES = ("exact", "float")


def _coerce(values, mode: Optional[str]) -> np.ndarray:
    arr = values if isinstance(values, np.ndarray) else np.asarray(values, dtype=object)
    if mode is None:
        # python ints/fractions/strings read as exact, anything floating as float
        mode = "exact" if arr.dtype == object and not any(
            isinstance(x, (float, complex, np.floating, np.complexfloating)) for x in arr.flat) else "float"
    if mode == "exact":
        if arr.dtype == object and all(isinstance(x, (E.GaussRational, type(E.ZERO))) for x in arr.flat):
            return arr.copy()
        return E.exact_array(arr)
    if mode == "float":
        if arr.dtype == object:
            return E.to_complex(arr)
        return np.array(arr, dtype=complex)
    raise ValueError(f"unknown mode {mode!r}")


def scalar_array(values, mode: Optional[str] = None) -> np.ndarray:
    """A plain scalar matrix in the requested mode (inferred from dtype if None)."""
    return _coerce(values, mode)


def array_mode(arr: np.ndarray) -> str:
    return "exact" if arr.dtype == object else "float"


def eye_like(size: int, mode: str) -> np.ndarray:
    return E.eye(size) if mode == "exact" else np.eye(size, dtype=complex)


def zeros_like_mode(shape, mode: str) -> np.ndarray:
    return E.zeros(shape) if mode == "exact" else np.zeros(shape, dtype=complex)


@dataclass(frozen=True, eq=False)
class LayeredMatrix:
    """An m x cols outer matrix of n x n_cols middle blocks of k x k cells."""

    data: np.ndarray
    m: int
    n: int
    k: int
    cols: int = field(default=None)  # type: ignore[assignment]
    n_cols: int = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.cols is None:
            object.__setattr__(self, "cols", self.m)
        if self.n_cols is None:
            object.__setattr__(self, "n_cols", self.n)
        if min(self.m, self.n, self.k, self.cols, self.n_cols) < 0 or self.k == 0:
            raise DimensionMismatch("layer sizes must be nonnegative (k >= 1)")
        data = self.data
        if not isinstance(data, np.ndarray) or data.dtype not in (np.complex128, np.dtype(object)):
            data = _coerce(data, None)
        elif data.flags.writeable:
            data = data.copy()
        expected = (self.m * self.n * self.k, self.cols * self.n_cols * self.k)
        if data.ndim != 2 or data.shape != expected:
            raise DimensionMismatch(f"data shape {data.shape} does not match layers {expected}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    # basic properties ------------------------------------------------------
    @property
    def mode(self) -> str:
        return array_mode(self.data)

    @property
    def shape(self):
        return self.data.shape

    @property
    def is_square(self) -> bool:
        return self.m == self.cols and self.n == self.n_cols

    def view6(self) -> np.ndarray:
        return self.data.reshape(self.m, self.n, self.k, self.cols, self.n_cols, self.k)

    def _like(self, data, m=None, n=None, cols=None, n_cols=None) -> "LayeredMatrix":
        m = self.m if m is None else m
        cols = self.cols if cols is None else cols
        n = self.n if n is None else n
        n_cols = self.n_cols if n_cols is None else n_cols
        return LayeredMatrix(data, m, n, self.k, cols, n_cols)

    # block access (0-based) ------------------------------------------------
    def take(self, rows: Sequence[int], cols: Sequence[int]) -> "LayeredMatrix":
        """Select outer block rows and columns (zero-based index lists)."""
        v = self.view6()[np.asarray(rows, dtype=int)][:, :, :, np.asarray(cols, dtype=int)]
        r, c = len(rows), len(cols)
        return self._like(v.reshape(r * self.n * self.k, c * self.n_cols * self.k), m=r, cols=c)

    def block(self, i: int, j: int) -> "LayeredMatrix":
        """Outer block (i, j), one-based."""
        if not (1 <= i <= self.m and 1 <= j <= self.cols):
            raise DimensionMismatch(f"outer block ({i},{j}) out of range")
        return self.take([i - 1], [j - 1])

    def middle(self, rows: slice, cols: slice) -> "LayeredMatrix":
        """Restrict every outer block to a middle-layer rectangle."""
        v = self.view6()[:, rows, :, :, cols, :]
        n, nc = v.shape[1], v.shape[4]
        return self._like(v.reshape(self.m * n * self.k, self.cols * nc * self.k), n=n, n_cols=nc)

    # arithmetic --------------------------------------------------------------
    def _check_same(self, other: "LayeredMatrix"):
        if (self.m, self.n, self.k, self.cols, self.n_cols) != (other.m, other.n, other.k, other.cols, other.n_cols):
            raise DimensionMismatch("layer dimensions differ")

    def __add__(self, other: "LayeredMatrix") -> "LayeredMatrix":
        self._check_same(other)
        a, b = _common(self.data, other.data)
        return self._like(a + b)

    def __sub__(self, other: "LayeredMatrix") -> "LayeredMatrix":
        self._check_same(other)
        a, b = _common(self.data, other.data)
        return self._like(a - b)

    def __neg__(self) -> "LayeredMatrix":
        return self._like(-self.data)

    def scale(self, c) -> "LayeredMatrix":
        if self.mode == "exact":
            return self._like(self.data * E.to_exact(c))
        return self._like(self.data * complex(c))

    def __matmul__(self, other: "LayeredMatrix") -> "LayeredMatrix":
        return layered_multiply(self, other)

    def conj_transpose(self) -> "LayeredMatrix":
        if self.mode == "exact":
            data = np.array([x.conjugate() for x in self.data.T.flat], dtype=object).reshape(self.data.T.shape)
        else:
            data = self.data.conj().T
        return LayeredMatrix(data, self.cols, self.n_cols, self.k, self.m, self.n)

    def to_mode(self, mode: str) -> "LayeredMatrix":
        if mode == self.mode:
            return self
        return self._like(_coerce(self.data, mode))

    def __repr__(self):
        return (f"LayeredMatrix(m={self.m}, n={self.n}, k={self.k}, cols={self.cols}, "
                f"n_cols={self.n_cols}, mode={self.mode!r})")


def _common(a: np.ndarray, b: np.ndarray):
    """Bring two arrays to a common mode; mixing exact with float gives float."""
    if a.dtype == b.dtype:
        return a, b
    if a.dtype == object:
        return E.to_complex(a), b
    return a, E.to_complex(b)


def layered(data, m: int, n: int, k: int, mode: Optional[str] = None,
            cols: Optional[int] = None, n_cols: Optional[int] = None) -> LayeredMatrix:
    """Build a LayeredMatrix from any array-like, converting to ``mode``."""
    return LayeredMatrix(_coerce(data, mode), m, n, k, cols, n_cols)


def identity(m: int, n: int, k: int, mode: str = "float") -> LayeredMatrix:
    return LayeredMatrix(eye_like(m * n * k, mode), m, n, k)


def zeros(m: int, n: int, k: int, mode: str = "float", cols: Optional[int] = None,
          n_cols: Optional[int] = None) -> LayeredMatrix:
    c = m if cols is None else cols
    nc = n if n_cols is None else n_cols
    return LayeredMatrix(zeros_like_mode((m * n * k, c * nc * k), mode), m, n, k, c, nc)


def block_matrix(grid: Sequence[Sequence[LayeredMatrix]]) -> LayeredMatrix:
    """Assemble a grid of LayeredMatrix blocks along the outer layer."""
    first = grid[0][0]
    n, k, nc = first.n, first.k, first.n_cols
    mode = "exact" if all(b.mode == "exact" for row in grid for b in row) else "float"
    rows6 = []
    for row in grid:
        if len({b.m for b in row}) != 1:
            raise DimensionMismatch("blocks in one row need equal outer heights")
        for b in row:
            if (b.n, b.k, b.n_cols) != (n, k, nc):
                raise DimensionMismatch("blocks must share middle and inner layers")
        rows6.append(np.concatenate([b.to_mode(mode).view6() for b in row], axis=3))
    widths = {r.shape[3] for r in rows6}
    if len(widths) != 1:
        raise DimensionMismatch("block rows have different outer widths")
    full = np.concatenate(rows6, axis=0)
    m, c = full.shape[0], full.shape[3]
    return LayeredMatrix(full.reshape(m * n * k, c * nc * k), m, n, k, c, nc)


# ---------------------------------------------------------------------------
# core operations
# ---------------------------------------------------------------------------

def layered_multiply(A: LayeredMatrix, B: LayeredMatrix) -> LayeredMatrix:
    if A.cols != B.m or A.n_cols != B.n or A.k != B.k:
        raise DimensionMismatch(
            f"cannot multiply ({A.m}x{A.cols}, n {A.n}x{A.n_cols}) by ({B.m}x{B.cols}, n {B.n}x{B.n_cols})")
    a, b = _common(A.data, B.data)
    return LayeredMatrix(a.dot(b), A.m, A.n, A.k, B.cols, B.n_cols)


@dataclass(frozen=True)
class InvertibilityReport:
    invertible: bool
    inverse: Optional[LayeredMatrix]
    smallest_singular_value: Optional[float] = None
    largest_singular_value: Optional[float] = None
    rank_deficiency: Optional[int] = None


def invert_array(data: np.ndarray, tol: float = DEFAULT_TOL):
    """Return ``(inverse or None, smin, smax, rank_deficiency)`` for a square array."""
    size = data.shape[0]
    if data.shape != (size, size):
        raise DimensionMismatch("inverse of a non-square matrix")
    if data.dtype == object:
        inv, rk = E.inverse(data)
        return inv, None, None, size - rk
    if size == 0:
        return np.zeros((0, 0), dtype=complex), None, None, 0
    sv = np.linalg.svd(data, compute_uv=False)
    smin, smax = float(sv[-1]), float(sv[0])
    if smin < tol * max(1.0, smax):
        return None, smin, smax, None
    return np.linalg.inv(data), smin, smax, None


def layered_invert(A: LayeredMatrix, tol: float = DEFAULT_TOL) -> InvertibilityReport:
    if not A.is_square:
        raise DimensionMismatch("layered_invert needs a square matrix")
    inv, smin, smax, deficiency = invert_array(A.data, tol)
    inverse = None if inv is None else LayeredMatrix(inv, A.m, A.n, A.k)
    return InvertibilityReport(inv is not None, inverse, smin, smax, deficiency)


def require_inverse(A: LayeredMatrix, tol: float = DEFAULT_TOL, what: str = "matrix") -> LayeredMatrix:
    report = layered_invert(A, tol)
    if not report.invertible:
        raise NotInvertible(f"{what} is not invertible")
    return report.inverse


def interleaved_direct_sum(A: LayeredMatrix, B: LayeredMatrix) -> LayeredMatrix:
    """Outer-blockwise direct sum: block (i,j) becomes diag(A_ij, B_ij)."""
    if A.m != B.m or A.cols != B.cols or A.k != B.k:
        raise DimensionMismatch("interleaved direct sum needs equal outer shape and k")
    a, b = _common(A.data, B.data)
    mode = array_mode(a)
    m, c, k = A.m, A.cols, A.k
    n, nc = A.n + B.n, A.n_cols + B.n_cols
    out = zeros_like_mode((m, n, k, c, nc, k), mode)
    out[:, :A.n, :, :, :A.n_cols, :] = a.reshape(A.view6().shape)
    out[:, A.n:, :, :, A.n_cols:, :] = b.reshape(B.view6().shape)
    return LayeredMatrix(out.reshape(m * n * k, c * nc * k), m, n, k, c, nc)


def hermitian_sqrt(P: LayeredMatrix, tol: float = DEFAULT_TOL) -> LayeredMatrix:
    """Positive semidefinite square root of a Hermitian matrix (float only)."""
    if P.mode == "exact":
        raise ExactModeUnsupported("hermitian_sqrt is float-only")
    if not P.is_square:
        raise DimensionMismatch("hermitian_sqrt needs a square matrix")
    data = P.data
    if data.size and np.max(np.abs(data - data.conj().T)) > tol * max(1.0, np.max(np.abs(data))):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    herm = (data + data.conj().T) / 2
    w, V = np.linalg.eigh(herm)
    if w.size and w.min() < -tol:
        raise NegativeEigenvalue(f"eigenvalue {w.min():.3e} below -tol")
    root = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    return P._like((root + root.conj().T) / 2)


# ---------------------------------------------------------------------------
# subalgebras of M_k
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SubalgebraSpec:
    """A unital subalgebra of M_k(C).

    ``tag`` is one of ``"full"``, ``"scalars"``, ``"block_diagonal"`` and
    ``"basis"``.  Block-diagonal partitions are lists of one-based index
    groups, e.g. ``[[1], [2]]``.
    """

    tag: str = "full"
    k: Optional[int] = None
    partition: tuple = ()
    basis: tuple = ()
    tolerance: float = DEFAULT_TOL

    @classmethod
    def full(cls, tolerance: float = DEFAULT_TOL) -> "SubalgebraSpec":
        return cls("full", tolerance=tolerance)

    @classmethod
    def scalars(cls, tolerance: float = DEFAULT_TOL) -> "SubalgebraSpec":
        return cls("scalars", tolerance=tolerance)

    @classmethod
    def block_diagonal(cls, partition, tolerance: float = DEFAULT_TOL) -> "SubalgebraSpec":
        groups = []
        start = 1
        for part in partition:
            if isinstance(part, (int, np.integer)):
                groups.append(tuple(range(start, start + int(part))))
                start += int(part)
            else:
                groups.append(tuple(int(x) for x in part))
        flat = sorted(x for g in groups for x in g)
        if not flat or flat != list(range(1, len(flat) + 1)):
            raise InvalidSubalgebra("partition must cover 1..k exactly once")
        return cls("block_diagonal", k=len(flat), partition=tuple(groups), tolerance=tolerance)

    @classmethod
    def from_basis(cls, matrices, tolerance: float = DEFAULT_TOL) -> "SubalgebraSpec":
        mats = [np.asarray(b) for b in matrices]
        if not mats:
            raise InvalidSubalgebra("basis must be nonempty")
        k = mats[0].shape[0]
        if any(b.shape != (k, k) for b in mats):
            raise InvalidSubalgebra("basis matrices must all be k x k")
        mode = "exact" if all(b.dtype == object for b in mats) else "float"
        mats = tuple(_coerce(b, mode) for b in mats)
        spec = cls("basis", k=k, basis=mats, tolerance=tolerance)
        if not spec.contains_cell(eye_like(k, mode)):
            raise InvalidSubalgebra("span does not contain the identity")
        for x in mats:
            for y in mats:
                if not spec.contains_cell(x.dot(y)):
                    raise InvalidSubalgebra("span is not closed under products")
        return spec

    def contains_cell(self, cell: np.ndarray) -> bool:
        """Membership of a single k x k scalar matrix."""
        tol = self.tolerance
        exact = cell.dtype == object

        def small(x) -> bool:
            if exact:
                return all(v == 0 for v in np.ravel(x))
            return bool(np.all(np.abs(x) <= tol))

        k = cell.shape[0]
        if self.tag == "full":
            return True
        if self.tag == "scalars":
            diag = np.diagonal(cell)
            off = cell - np.diag(diag) if not exact else cell - _exact_diag(diag)
            return small(off) and small(diag - diag[0])
        if self.tag == "block_diagonal":
            label = np.empty(k, dtype=int)
            for g, group in enumerate(self.partition):
                for x in group:
                    label[x - 1] = g
            mask = label[:, None] != label[None, :]
            return small(cell[mask])
        if self.tag == "basis":
            if exact and all(b.dtype == object for b in self.basis):
                stack = np.array([b.ravel() for b in self.basis] + [cell.ravel()], dtype=object)
                return E.rank(stack) == E.rank(stack[:-1])
            basis = np.array([E.to_complex(b).ravel() if b.dtype == object else b.ravel() for b in self.basis]).T
            vec = E.to_complex(cell).ravel() if exact else cell.ravel()
            q, r = np.linalg.qr(basis)
            keep = np.abs(np.diag(r)) > tol * max(1.0, np.max(np.abs(r))) if r.size else []
            q = q[:, keep]
            resid = vec - q @ (q.conj().T @ vec)
            return bool(np.max(np.abs(resid), initial=0.0) <= tol * max(1.0, np.max(np.abs(vec), initial=0.0)))
        raise InvalidSubalgebra(f"unknown subalgebra tag {self.tag!r}")


def _exact_diag(diag) -> np.ndarray:
    out = E.zeros((len(diag), len(diag)))
    for i, x in enumerate(diag):
        out[i, i] = x
    return out


def subalgebra_contains(X: LayeredMatrix, spec: SubalgebraSpec) -> bool:
    """True iff every k x k inner cell of X lies in the subalgebra."""
    if spec.k is not None and spec.k != X.k:
        raise DimensionMismatch(f"subalgebra acts on k={spec.k}, matrix has k={X.k}")
    if spec.tag == "full":
        return True
    k = X.k
    cells = X.data.reshape(X.m * X.n, k, X.cols * X.n_cols, k)
    for a in range(cells.shape[0]):
        for b in range(cells.shape[2]):
            if not spec.contains_cell(cells[a, :, b, :]):
                return False
    return True


# ---------------------------------------------------------------------------
# scalar lifts
# ---------------------------------------------------------------------------

def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = _common(a, b)
    return np.kron(a, b)


def middle_lift(s: np.ndarray, k: int) -> np.ndarray:
    """s acting on the middle layer of a single outer block: s (x) I_k."""
    return kron(s, eye_like(k, array_mode(s)))


def amplify(a: np.ndarray, n: int) -> np.ndarray:
    """An element a of M_k at level n: I_n (x) a."""
    return kron(eye_like(n, array_mode(a)), a)


def scalar_similarity_lift(s, m: int, k: int, tol: float = DEFAULT_TOL) -> LayeredMatrix:
    """The matrix s^{(+)m} in layered form: I_m (x) s (x) I_k."""
    s = scalar_array(s)
    n = s.shape[0]
    if s.shape != (n, n):
        raise DimensionMismatch("similarity matrix must be square")
    inv, *_ = invert_array(s, tol)
    if inv is None:
        raise NotInvertible("similarity matrix is singular")
    mode = array_mode(s)
    return LayeredMatrix(kron(eye_like(m, mode), middle_lift(s, k)), m, n, k)


# ---------------------------------------------------------------------------
# comparisons
# ---------------------------------------------------------------------------

def max_abs(arr: np.ndarray) -> float:
    if arr.dtype == object:
        return E.max_abs(arr)
    return float(np.max(np.abs(arr), initial=0.0))


def max_norm(A: LayeredMatrix) -> float:
    return max_abs(A.data)


def residual(A, B) -> float:
    """Max-modulus of A - B (arrays or LayeredMatrix); exact zero stays 0.0."""
    a = A.data if isinstance(A, LayeredMatrix) else A
    b = B.data if isinstance(B, LayeredMatrix) else B
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    a, b = _common(a, b)
    return max_abs(a - b)


def allclose(A, B, tol: float = DEFAULT_TOL) -> bool:
    """Exact equality in exact mode, max-modulus within ``tol`` otherwise."""
    a = A.data if isinstance(A, LayeredMatrix) else A
    b = B.data if isinstance(B, LayeredMatrix) else B
    if a.dtype == object and b.dtype == object:
        return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))
    return residual(a, b) <= tol


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _encode_scalar(x, exact: bool):
    if exact:
        return [E.format_rational(E.real_part(x)), E.format_rational(E.imag_part(x))]
    return [float(x.real), float(x.imag)]


def matrix_to_json(A: LayeredMatrix) -> dict:
    exact = A.mode == "exact"
    out = {"m": A.m, "n": A.n, "k": A.k, "mode": A.mode}
    if A.cols != A.m:
        out["cols"] = A.cols
    if A.n_cols != A.n:
        out["n_cols"] = A.n_cols
    out["data"] = [_encode_scalar(x, exact) for x in A.data.flat]
    return out


def _decode_scalar(pair, exact: bool):
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise SchemaError("each data entry must be a [re, im] pair")
    re, im = pair
    if exact:
        try:
            return E.gauss(E.to_exact(re), E.to_exact(im))
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad exact scalar {pair!r}") from exc
    try:
        return complex(float(re), float(im))
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"bad float scalar {pair!r}") from exc


def matrix_from_json(obj: dict, mode: Optional[str] = None) -> LayeredMatrix:
    """Parse the matrix JSON object; ``mode`` overrides the stored mode."""
    if not isinstance(obj, dict):
        raise SchemaError("matrix must be a JSON object")
    try:
        m, n, k = int(obj["m"]), int(obj["n"]), int(obj["k"])
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"matrix object needs m, n, k, data: {exc}") from exc
    stored = obj.get("mode", "float")
    if stored not in MODES:
        raise SchemaError(f"unknown mode {stored!r}")
    cols = int(obj.get("cols", m))
    n_cols = int(obj.get("n_cols", n))
    rows_total, cols_total = m * n * k, cols * n_cols * k
    if not isinstance(data, list) or len(data) != rows_total * cols_total:
        raise SchemaError(f"expected {rows_total * cols_total} data entries")
    exact = stored == "exact"
    values = [_decode_scalar(p, exact) for p in data]
    arr = np.array(values, dtype=object if exact else complex).reshape(rows_total, cols_total)
    A = LayeredMatrix(arr, m, n, k, cols, n_cols)
    return A.to_mode(mode) if mode else A

"""Points of the nc Grassmannian and the nc flag manifold.

A point of Gr^(d;m)_n is held through one invertible representative ``rep``
(an m x m outer LayeredMatrix at level n).  Two representatives are
equivalent when ``rep_tau^{-1} rep_sigma`` lies in the subgroup of frames

    [[X, 0],
     [Y, Z]]        X in GL_{m-d}, Z in GL_d,

i.e. the outer block with rows 1..m-d and columns m-d+1..m vanishes.

Operations that provably keep representatives invertible (direct sums,
similarities, pinches, shifts, affine embeddings) skip the invertibility
check; every other construction verifies it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from . import _exact as E
from .algebra import (
    DEFAULT_TOL,
    LayeredMatrix,
    array_mode,
    block_matrix,
    identity,
    interleaved_direct_sum,
    invert_array,
    layered_invert,
    layered_multiply,
    max_abs,
    scalar_array,
    scalar_similarity_lift,
    zeros,
)
from .errors import DimensionMismatch, IndexOutOfRange, NotInvertible


class _Point:
    __slots__ = ("_rep", "_memo")

    def _init_rep(self, rep: LayeredMatrix, tol: float, check: bool):
        if not isinstance(rep, LayeredMatrix):
            raise TypeError("rep must be a LayeredMatrix")
        if not rep.is_square:
            raise DimensionMismatch("representative must be square")
        self._rep = rep
        self._memo: dict = {}
        if check:
            report = layered_invert(rep, tol)
            if not report.invertible:
                raise NotInvertible("representative is not invertible")
            self._memo["inverse"] = report.inverse

    @property
    def rep(self) -> LayeredMatrix:
        return self._rep

    @property
    def m(self) -> int:
        return self._rep.m

    @property
    def n(self) -> int:
        return self._rep.n

    @property
    def k(self) -> int:
        return self._rep.k

    @property
    def mode(self) -> str:
        return self._rep.mode

    def rep_inverse(self) -> LayeredMatrix:
        inv = self._memo.get("inverse")
        if inv is None:
            inv = layered_invert(self._rep, 0.0).inverse
            if inv is None:
                raise NotInvertible("representative is not invertible")
            self._memo["inverse"] = inv
        return inv

    def cached(self, key, compute):
        """Memoize a derived quantity on this (immutable) point."""
        try:
            return self._memo[key]
        except KeyError:
            value = compute()
            self._memo[key] = value
            return value


class GrassPoint(_Point):
    """A point of Gr^(d;m)_n(M_k) given by an invertible representative."""

    __slots__ = ("_d",)

    def __init__(self, d: int, rep: LayeredMatrix, *, tol: float = DEFAULT_TOL, check: bool = True):
        if not 0 <= d <= rep.m:
            raise DimensionMismatch(f"d={d} outside [0, {rep.m}]")
        self._d = int(d)
        self._init_rep(rep, tol, check)

    @property
    def d(self) -> int:
        return self._d

    @property
    def dims(self):
        return (self.d, self.m, self.n, self.k)

    def __eq__(self, other):
        if not isinstance(other, GrassPoint):
            return NotImplemented
        return self.dims == other.dims and gr_equiv(self, other)

    def __hash__(self):
        return hash(("GrassPoint",) + self.dims)

    def __repr__(self):
        d, m, n, k = self.dims
        return f"GrassPoint(d={d}, m={m}, n={n}, k={k}, mode={self.mode!r})"


def _trusted(d: int, rep: LayeredMatrix) -> GrassPoint:
    return GrassPoint(d, rep, check=False)


def _zero_block(G: np.ndarray, rows: slice, cols: slice, tol: float) -> bool:
    block = G[rows, cols]
    if G.dtype == object:
        return all(x == 0 for x in block.flat)
    return max_abs(block) <= tol * max_abs(G)


def _gamma(sigma: _Point, tau: _Point) -> LayeredMatrix:
    return layered_multiply(tau.rep_inverse(), sigma.rep)


def gr_equiv(sigma: GrassPoint, tau: GrassPoint, tol: float = DEFAULT_TOL) -> bool:
    """Decide sigma ~ tau by testing the zero block of rep(tau)^{-1} rep(sigma)."""
    if sigma.dims != tau.dims:
        raise DimensionMismatch(f"points live in different Grassmannians: {sigma.dims} vs {tau.dims}")
    d, m, n, k = sigma.dims
    G = _gamma(sigma, tau).data
    s = (m - d) * n * k
    if not _zero_block(G, slice(0, s), slice(s, None), tol):
        return False
    # with the corner zero, invertibility of G forces invertible diagonal blocks
    for part in (slice(0, s), slice(s, None)):
        if G[part, part].size and invert_array(G[part, part], tol)[0] is None:
            return False
    return True


# ---------------------------------------------------------------------------
# canonical forms
# ---------------------------------------------------------------------------

def _float_rref(M: np.ndarray, tol: float):
    A = np.array(M, dtype=complex)
    rows, cols = A.shape
    scale = max(1.0, max_abs(A))
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(A[r:, c])))
        if abs(A[p, c]) <= tol * scale:
            A[r:, c] = 0
            continue
        A[[r, p]] = A[[p, r]]
        A[r] /= A[r, c]
        others = [i for i in range(rows) if i != r]
        A[others] -= np.outer(A[others, c], A[r])
        pivots.append(c)
        r += 1
    A[r:] = 0
    return A, pivots


def rref(M: np.ndarray, tol: float = DEFAULT_TOL):
    """Reduced row echelon form (exact or float) and the pivot columns."""
    if M.dtype == object:
        return E.rref(M)
    return _float_rref(M, tol)


def column_echelon_basis(M: np.ndarray, tol: float = DEFAULT_TOL):
    """Reduced column echelon basis of the column space of M, with pivot rows."""
    R, pivots = rref(M.T, tol)
    return R[: len(pivots)].T, pivots


def gr_canonicalize(sigma: GrassPoint, tol: float = DEFAULT_TOL) -> LayeredMatrix:
    """The unique echelon representative of the class of sigma.

    The class is determined by the column span V of the last d*n*k scalar
    columns.  The returned frame has the reduced column echelon basis of V in
    those columns and, in front, the unit vectors e_i for the rows i that are
    not pivots of V.  This relies on the inner algebra being all of M_k.
    """
    d, m, n, k = sigma.dims
    data = sigma.rep.data
    size = m * n * k
    V, pivots = column_echelon_basis(data[:, (m - d) * n * k:], tol)
    mode = array_mode(data)
    ident = E.eye(size) if mode == "exact" else np.eye(size, dtype=complex)
    rest = [i for i in range(size) if i not in set(pivots)]
    frame = np.concatenate([ident[:, rest], V], axis=1)
    return LayeredMatrix(frame, m, n, k)


def column_space_equiv(sigma: GrassPoint, tau: GrassPoint, tol: float = DEFAULT_TOL) -> bool:
    """Classical check: equal spans of the last d*n*k columns (rank tests)."""
    if sigma.dims != tau.dims:
        raise DimensionMismatch("points live in different Grassmannians")
    d, m, n, k = sigma.dims
    s = (m - d) * n * k
    a = sigma.rep.data[:, s:]
    b = tau.rep.data[:, s:]
    if a.dtype == object and b.dtype == object:
        ra, rb = E.rank(a), E.rank(b)
        return ra == rb == E.rank(np.concatenate([a, b], axis=1))
    a, b = E.to_complex(a) if a.dtype == object else a, E.to_complex(b) if b.dtype == object else b

    def rank(x):
        sv = np.linalg.svd(x, compute_uv=False)
        return int(np.sum(sv > tol * max(1.0, sv[0] if sv.size else 1.0)))

    ra, rb = rank(a), rank(b)
    return ra == rb == rank(np.concatenate([a, b], axis=1))


# ---------------------------------------------------------------------------
# affine charts
# ---------------------------------------------------------------------------

def affine_embed(X: LayeredMatrix) -> GrassPoint:
    """X (outer (m-d) x d) maps to the class of [[0, I_d], [I_{m-d}, X]]."""
    md, d, n, k = X.m, X.cols, X.n, X.k
    if X.n_cols != n:
        raise DimensionMismatch("affine coordinates need square middle blocks")
    mode = X.mode
    rep = block_matrix([
        [zeros(d, n, k, mode, cols=md), identity(d, n, k, mode)],
        [identity(md, n, k, mode), X],
    ])
    return _trusted(d, rep)


def affine_extract(sigma: GrassPoint, tol: float = DEFAULT_TOL) -> Optional[LayeredMatrix]:
    """Affine coordinate of sigma, or None when sigma is not in the chart."""
    d, m, n, k = sigma.dims
    A = sigma.rep
    top, bottom = list(range(d)), list(range(d, m))
    left, right = list(range(m - d)), list(range(m - d, m))
    A11, A12 = A.take(top, left), A.take(top, right)
    A21, A22 = A.take(bottom, left), A.take(bottom, right)
    inv12 = layered_invert(A12, tol) if d else None
    if d and not inv12.invertible:
        return None
    if not d:
        return A22
    X = layered_multiply(A22, inv12.inverse)
    if m - d and not layered_invert(A21 - layered_multiply(X, A11), tol).invertible:
        return None
    return X


def matrix_unit_block(rows: int, cols: int, u: int, v: int, X: LayeredMatrix) -> LayeredMatrix:
    """e_{u,v} (x) X: a rows x cols outer matrix with X at (u, v), one-based."""
    if not (1 <= u <= rows and 1 <= v <= cols):
        raise IndexOutOfRange(f"({u},{v}) outside {rows}x{cols}")
    if X.m != 1 or X.cols != 1:
        raise DimensionMismatch("X must be a single outer block")
    out = np.array(zeros(rows, X.n, X.k, X.mode, cols=cols, n_cols=X.n_cols).view6())
    out[u - 1, :, :, v - 1, :, :] = X.view6()[0, :, :, 0, :, :]
    return LayeredMatrix(out.reshape(rows * X.n * X.k, cols * X.n_cols * X.k),
                         rows, X.n, X.k, cols, X.n_cols)


# ---------------------------------------------------------------------------
# nc structure
# ---------------------------------------------------------------------------

def direct_sum(sigma: GrassPoint, sigma2: GrassPoint) -> GrassPoint:
    if (sigma.d, sigma.m, sigma.k) != (sigma2.d, sigma2.m, sigma2.k):
        raise DimensionMismatch("direct sum needs equal (d, m, k)")
    return _trusted(sigma.d, interleaved_direct_sum(sigma.rep, sigma2.rep))


def similarity(s, sigma: GrassPoint, tol: float = DEFAULT_TOL) -> GrassPoint:
    """s . sigma = s^{(+)m} rep, for an invertible n x n scalar matrix s."""
    s = scalar_array(s, sigma.mode)
    if s.shape != (sigma.n, sigma.n):
        raise DimensionMismatch(f"similarity matrix must be {sigma.n}x{sigma.n}")
    lift = scalar_similarity_lift(s, sigma.m, sigma.k, tol)
    return _trusted(sigma.d, layered_multiply(lift, sigma.rep))


def left_act(g: LayeredMatrix, sigma: GrassPoint, tol: float = DEFAULT_TOL) -> GrassPoint:
    if (g.m, g.n, g.k, g.cols, g.n_cols) != (sigma.m, sigma.n, sigma.k, sigma.m, sigma.n):
        raise DimensionMismatch("acting matrix must match the point's layers")
    if not layered_invert(g, tol).invertible:
        raise NotInvertible("acting matrix is not invertible")
    return _trusted(sigma.d, layered_multiply(g, sigma.rep))


def coupling_block(X, n: int, n2: int, k: int, mode: str) -> LayeredMatrix:
    if isinstance(X, LayeredMatrix):
        if (X.m, X.cols, X.n, X.n_cols, X.k) != (1, 1, n, n2, k):
            raise DimensionMismatch(f"coupling must be one {n}x{n2} middle block over k={k}")
        return X
    arr = scalar_array(X, mode)
    if arr.shape != (n * k, n2 * k):
        raise DimensionMismatch(f"coupling must be {n * k}x{n2 * k}")
    return LayeredMatrix(arr, 1, n, k, 1, n2)


def pinch(sigma: GrassPoint, sigma2: GrassPoint, u: int, v: int, X) -> GrassPoint:
    """Join sigma and sigma2 with coupling X at indices u in [m-d], v in [d]."""
    if (sigma.d, sigma.m, sigma.k) != (sigma2.d, sigma2.m, sigma2.k):
        raise DimensionMismatch("pinch needs equal (d, m, k)")
    d, m, k = sigma.d, sigma.m, sigma.k
    n, n2 = sigma.n, sigma2.n
    if not (1 <= u <= m - d and 1 <= v <= d):
        raise IndexOutOfRange(f"(u,v)=({u},{v}) outside [{m - d}]x[{d}]")
    Xb = coupling_block(X, n, n2, k, sigma.mode)
    base = interleaved_direct_sum(sigma.rep, sigma2.rep)
    A2 = sigma2.rep.view6()
    out = np.array(base.view6())
    if Xb.mode != base.mode:
        Xb = Xb.to_mode(base.mode)
    x = Xb.data
    add = [x.dot(A2[v - 1, :, :, m - d + j, :, :].reshape(n2 * k, n2 * k)) for j in range(d)]
    for j in range(d):
        # top-right (n x n2) rectangle of outer cell (d+u, m-d+j+1)
        cell = out[d + u - 1, :n, :, m - d + j, n:, :]
        out[d + u - 1, :n, :, m - d + j, n:, :] = cell + add[j].reshape(n, k, n2, k)
    size = m * (n + n2) * k
    return _trusted(d, LayeredMatrix(out.reshape(size, size), m, n + n2, k))


def shift_act(sigma: GrassPoint, Y: LayeredMatrix) -> GrassPoint:
    """sigma(Y) = [[I_d, 0], [-Y, I_{m-d}]] sigma for Y of outer shape (m-d) x d."""
    d, m, n, k = sigma.dims
    if (Y.m, Y.cols, Y.n, Y.n_cols, Y.k) != (m - d, d, n, n, k):
        raise DimensionMismatch("shift must be an (m-d) x d outer block at the point's level")
    mode = sigma.mode
    Y = Y.to_mode(mode)
    g = block_matrix([
        [identity(d, n, k, mode), zeros(d, n, k, mode, cols=m - d)],
        [-Y, identity(m - d, n, k, mode)],
    ])
    return _trusted(d, layered_multiply(g, sigma.rep))


# ---------------------------------------------------------------------------
# flags
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlagSignature:
    dims: tuple
    m: int

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise DimensionMismatch("flag signature must be nonempty")
        if any(b <= a for a, b in zip(dims, dims[1:])):
            raise DimensionMismatch("flag signature must be strictly increasing")
        if dims[0] < 1 or dims[-1] > self.m - 1:
            raise DimensionMismatch(f"flag dimensions must lie in [1, {self.m - 1}]")

    @property
    def K(self) -> int:
        return len(self.dims)

    def d(self, j: int) -> int:
        """d_j with the conventions d_0 = 0 and d_{K+1} = m."""
        if j == 0:
            return 0
        if j == self.K + 1:
            return self.m
        return self.dims[j - 1]

    def dual(self) -> "FlagSignature":
        """Signature (m-d_K, ..., m-d_1) of the projective flag point."""
        return FlagSignature(tuple(self.m - x for x in reversed(self.dims)), self.m)


class FlagPoint(_Point):
    __slots__ = ("_sig",)

    def __init__(self, sig: FlagSignature, rep: LayeredMatrix, *, tol: float = DEFAULT_TOL,
                 check: bool = True):
        if rep.m != sig.m:
            raise DimensionMismatch(f"representative has m={rep.m}, signature m={sig.m}")
        self._sig = sig
        self._init_rep(rep, tol, check)

    @property
    def sig(self) -> FlagSignature:
        return self._sig

    @property
    def dims(self):
        return (self.sig.dims, self.m, self.n, self.k)

    def __eq__(self, other):
        if not isinstance(other, FlagPoint):
            return NotImplemented
        return self.dims == other.dims and flag_equiv(self, other)

    def __hash__(self):
        return hash(("FlagPoint",) + self.dims)

    def __repr__(self):
        return f"FlagPoint(sig={self.sig.dims}, m={self.m}, n={self.n}, k={self.k}, mode={self.mode!r})"


def flag_equiv(phi: FlagPoint, psi: FlagPoint, tol: float = DEFAULT_TOL) -> bool:
    """Equivalence under frames [[X, 0], [Y, Z]] with Z block lower-triangular.

    Z is partitioned (d_K - d_{K-1}, ..., d_2 - d_1, d_1) from the top-left,
    which is the same as asking for the zero corner of every H^(d_j).
    """
    if phi.dims != psi.dims:
        raise DimensionMismatch("flag points have different signatures or layers")
    m, n, k = phi.m, phi.n, phi.k
    G = _gamma(phi, psi).data
    for dj in phi.sig.dims:
        s = (m - dj) * n * k
        if not _zero_block(G, slice(0, s), slice(s, None), tol):
            return False
    # diagonal blocks X, Z_K, ..., Z_1 must be invertible
    cuts = [0, (m - phi.sig.dims[-1]) * n * k]
    cuts += [(m - dj) * n * k for dj in reversed(phi.sig.dims[:-1])] + [m * n * k]
    cuts = sorted(set(cuts))
    for a, b in zip(cuts, cuts[1:]):
        if invert_array(G[a:b, a:b], tol)[0] is None:
            return False
    return True


def flag_project(phi: FlagPoint, j: int) -> GrassPoint:
    """p_{d_j}: the same representative read in Gr^(d_j;m)."""
    if not 1 <= j <= phi.sig.K:
        raise IndexOutOfRange(f"j={j} outside [1, {phi.sig.K}]")
    key = ("project", j)
    return phi.cached(key, lambda: _project_with_inverse(phi, phi.sig.d(j)))


def _project_with_inverse(phi: FlagPoint, d: int) -> GrassPoint:
    point = _trusted(d, phi.rep)
    inv = phi._memo.get("inverse")
    if inv is not None:
        point._memo["inverse"] = inv
    return point


def flag_affine_embed(blocks: Mapping, sig: FlagSignature, n: int, k: int,
                      mode: str = "float") -> FlagPoint:
    """Anti-diagonal identity frame carrying the blocks X(i, j), 1 <= j <= i <= K.

    X(i, j) has outer shape (d_{i+1} - d_i) x (d_j - d_{j-1}); missing blocks
    are zero.  Row blocks have sizes d_1, d_2 - d_1, ..., m - d_K and column
    blocks m - d_K, d_K - d_{K-1}, ..., d_1.
    """
    K = sig.K
    row_sizes = [sig.d(r) - sig.d(r - 1) for r in range(1, K + 2)]
    col_sizes = [sig.m - sig.d(K)] + [sig.d(K + 2 - c) - sig.d(K + 1 - c) for c in range(2, K + 2)]
    for key in blocks:
        i, j = key
        if not 1 <= j <= i <= K:
            raise IndexOutOfRange(f"flag block X({i},{j}) outside 1 <= j <= i <= {K}")
    grid = []
    for r in range(1, K + 2):
        row = []
        for c in range(1, K + 2):
            rs, cs = row_sizes[r - 1], col_sizes[c - 1]
            j = K + 2 - c
            if c == K + 2 - r:
                block = identity(rs, n, k, mode)
            elif r >= 2 and 1 <= j <= r - 1 and (r - 1, j) in blocks:
                block = blocks[(r - 1, j)]
                if (block.m, block.cols, block.n, block.n_cols, block.k) != (rs, cs, n, n, k):
                    raise DimensionMismatch(f"X({r - 1},{j}) must be {rs}x{cs} outer at level {n}")
                block = block.to_mode(mode)
            else:
                block = zeros(rs, n, k, mode, cols=cs)
            row.append(block)
        grid.append(row)
    return FlagPoint(sig, block_matrix(grid), check=False)

"""Random instances for the verification harness and the test-suite.

Exact samples use small integers and unimodular frames (products of unit
triangular integer matrices), which keeps rational growth in check.  Float
samples are complex Gaussian; ill-conditioned frames are rejected so that
residual thresholds measure the identities rather than rounding.
"""

from __future__ import annotations

import numpy as np

from . import _exact as E
from .algebra import DEFAULT_TOL, LayeredMatrix, SubalgebraSpec
from .grassmann import (
    FlagPoint,
    FlagSignature,
    GrassPoint,
    affine_embed,
    flag_affine_embed,
    flag_project,
)
from .resolvent import (
    ProjectivePoint,
    flag_resolvent_set,
    in_resolvent_set,
    projected_pi,
    r_matrix,
)

MAX_COND = 1e4
MAX_R_COND = 1e3
# flag frames are products of several random blocks
FLAG_MAX_COND = 1e6
FULL = SubalgebraSpec.full()


def scalars(rng: np.random.Generator, shape, mode: str, complex_rate: float = 0.25) -> np.ndarray:
    """Random scalar matrix: small integers (exact) or complex normals (float)."""
    if mode == "exact":
        re = rng.integers(-2, 3, size=shape)
        out = np.empty(shape, dtype=object)
        if rng.random() < complex_rate:
            im = rng.integers(-1, 2, size=shape)
            for idx in np.ndindex(*shape):
                out[idx] = E.gauss(int(re[idx]), int(im[idx]))
        else:
            for idx in np.ndindex(*shape):
                out[idx] = E.mpq(int(re[idx]))
        return out
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def unimodular(rng: np.random.Generator, size: int) -> np.ndarray:
    """Integer matrix of determinant +-1: P L U with unit triangular L, U."""
    L = np.tril(rng.integers(-1, 2, size=(size, size)), -1) + np.eye(size, dtype=int)
    U = np.triu(rng.integers(-1, 2, size=(size, size)), 1) + np.eye(size, dtype=int)
    P = np.eye(size, dtype=int)[rng.permutation(size)]
    signs = np.diag(rng.choice([-1, 1], size=size))
    M = P @ L @ U @ signs
    out = np.empty((size, size), dtype=object)
    for idx in np.ndindex(size, size):
        out[idx] = E.mpq(int(M[idx]))
    return out


def invertible(rng: np.random.Generator, size: int, mode: str) -> np.ndarray:
    if size == 0:
        return E.zeros((0, 0)) if mode == "exact" else np.zeros((0, 0), dtype=complex)
    if mode == "exact":
        return unimodular(rng, size)
    while True:
        M = scalars(rng, (size, size), mode)
        if np.linalg.cond(M) < MAX_COND:
            return M


def element(rng: np.random.Generator, k: int, mode: str, spec: SubalgebraSpec = FULL) -> np.ndarray:
    """A random k x k matrix in the subalgebra."""
    M = scalars(rng, (k, k), mode)
    if spec.tag == "full":
        return M
    if spec.tag == "scalars":
        out = E.zeros((k, k)) if mode == "exact" else np.zeros((k, k), dtype=complex)
        for i in range(k):
            out[i, i] = M[0, 0]
        return out
    if spec.tag == "block_diagonal":
        out = E.zeros((k, k)) if mode == "exact" else np.zeros((k, k), dtype=complex)
        for group in spec.partition:
            idx = np.array(group) - 1
            out[np.ix_(idx, idx)] = M[np.ix_(idx, idx)]
        return out
    coeffs = rng.integers(-2, 3, size=len(spec.basis))
    out = E.zeros((k, k)) if mode == "exact" else np.zeros((k, k), dtype=complex)
    for c, b in zip(coeffs, spec.basis):
        out = out + b * (E.mpq(int(c)) if mode == "exact" else float(c))
    return out


def block(rng: np.random.Generator, rows: int, cols: int, n: int, n_cols: int, k: int, mode: str,
          spec: SubalgebraSpec = FULL) -> LayeredMatrix:
    """Random LayeredMatrix whose k x k cells lie in the subalgebra."""
    R, C = rows * n, cols * n_cols
    if spec.tag == "full":
        data = scalars(rng, (R * k, C * k), mode)
    else:
        data = E.zeros((R * k, C * k)) if mode == "exact" else np.zeros((R * k, C * k), dtype=complex)
        for a in range(R):
            for b in range(C):
                data[a * k:(a + 1) * k, b * k:(b + 1) * k] = element(rng, k, mode, spec)
    return LayeredMatrix(data, rows, n, k, cols, n_cols)


def coupling(rng: np.random.Generator, n: int, n2: int, k: int, mode: str,
             spec: SubalgebraSpec = FULL) -> LayeredMatrix:
    return block(rng, 1, 1, n, n2, k, mode, spec)


def h_element(rng: np.random.Generator, d: int, m: int, n: int, k: int, mode: str) -> LayeredMatrix:
    """Random frame [[X, 0], [Y, Z]] of the stabilizer subgroup."""
    s, t = (m - d) * n * k, d * n * k
    X, Z = invertible(rng, s, mode), invertible(rng, t, mode)
    Y = scalars(rng, (t, s), mode)
    zero = E.zeros((s, t)) if mode == "exact" else np.zeros((s, t), dtype=complex)
    if s == 0:
        G = Z
    elif t == 0:
        G = X
    else:
        G = np.block([[X, zero], [Y, Z]])
    return LayeredMatrix(G, m, n, k)


def non_stabilizer(rng: np.random.Generator, d: int, m: int, n: int, k: int, mode: str) -> LayeredMatrix:
    """Invertible frame [[I, C], [0, I]] h with h in the stabilizer and C != 0.

    The top-right corner of the product is C Z with Z invertible, so the
    frame never lies in the stabilizer.
    """
    s, t = (m - d) * n * k, d * n * k
    if s == 0 or t == 0:
        raise ValueError("the stabilizer is everything when d = 0 or d = m")
    C = scalars(rng, (s, t), mode)
    if all(x == 0 for x in C.flat):
        C[0, 0] = E.ONE if mode == "exact" else 1.0
    U = E.eye(s + t) if mode == "exact" else np.eye(s + t, dtype=complex)
    U[:s, s:] = C
    return LayeredMatrix(U, m, n, k) @ h_element(rng, d, m, n, k, mode)


def flag_h_element(rng: np.random.Generator, sig: FlagSignature, n: int, k: int, mode: str) -> LayeredMatrix:
    """Random frame [[X, 0], [Y, Z]] with Z block lower-triangular."""
    m = sig.m
    G = h_element(rng, sig.dims[-1], m, n, k, mode).data.copy()
    # zero every corner demanded by the intermediate d_j
    for dj in sig.dims:
        s = (m - dj) * n * k
        G[:s, s:] = 0 if mode == "float" else E.ZERO
    # restore invertible diagonal blocks after zeroing
    cuts = sorted({0, m * n * k} | {(m - dj) * n * k for dj in sig.dims})
    for a, b in zip(cuts, cuts[1:]):
        G[a:b, a:b] = invertible(rng, b - a, mode)
    return LayeredMatrix(G, m, n, k)


def frame(rng: np.random.Generator, m: int, n: int, k: int, mode: str) -> LayeredMatrix:
    return LayeredMatrix(invertible(rng, m * n * k, mode), m, n, k)


def point(rng: np.random.Generator, d: int, m: int, n: int, k: int, mode: str,
          spec: SubalgebraSpec = FULL, generic: bool = True) -> GrassPoint:
    """An affine point embed(X) moved by a random stabilizer frame.

    With a proper subalgebra the frame is skipped, keeping entries in it.
    """
    X = block(rng, m - d, d, n, n, k, mode, spec)
    sigma = affine_embed(X)
    if not generic or spec.tag != "full":
        return sigma
    G = h_element(rng, d, m, n, k, mode)
    return GrassPoint(d, sigma.rep @ G, check=False)


def projective(rng: np.random.Generator, d_sigma: int, m: int, k: int, mode: str) -> ProjectivePoint:
    """A random pi in Gr^(m - d_sigma; m)_1 with a generic representative."""
    return ProjectivePoint(m - d_sigma, frame(rng, m, 1, k, mode), check=False)


def resolvent_point(rng: np.random.Generator, pi: ProjectivePoint, d: int, n: int, mode: str,
                    spec: SubalgebraSpec = FULL, tol: float = DEFAULT_TOL, tries: int = 50) -> GrassPoint:
    """A random point of the resolvent set of pi at level n."""
    for _ in range(tries):
        sigma = point(rng, d, pi.m, n, pi.k, mode, spec)
        if in_resolvent_set(pi, sigma, spec, tol) and _well_conditioned(pi, sigma, mode):
            return sigma
    raise RuntimeError("could not sample a transversal point")


def _well_conditioned(pi: ProjectivePoint, sigma: GrassPoint, mode: str, max_cond: float = MAX_COND) -> bool:
    if mode == "exact":
        return True
    r = r_matrix(pi.amplify(sigma.n), sigma.rep, sigma.d).data
    return np.linalg.cond(r) < MAX_R_COND and np.linalg.cond(sigma.rep.data) < max_cond


def non_transversal_point(rng: np.random.Generator, pi: ProjectivePoint, d: int, n: int,
                          mode: str) -> GrassPoint:
    """A point whose r-matrix against pi^{(+)n} is singular by construction.

    The first of the last d*n*k scalar columns is a combination of the
    columns of pi^{(+)n} that enter the r-matrix.
    """
    m, k = pi.m, pi.k
    A = pi.amplify(n).data
    s = (m - d) * n * k
    used = A[:, d * n * k:]
    while True:
        B = invertible(rng, m * n * k, mode).copy()
        w = scalars(rng, (used.shape[1],), mode)
        B[:, s] = used.dot(w)
        if mode == "exact":
            if E.rank(B) == B.shape[0]:
                return GrassPoint(d, LayeredMatrix(B, m, n, k), check=False)
        elif np.linalg.cond(B) < MAX_COND:
            return GrassPoint(d, LayeredMatrix(B, m, n, k), check=False)


def flag_point(rng: np.random.Generator, sig: FlagSignature, n: int, k: int, mode: str) -> FlagPoint:
    K = sig.K
    blocks = {}
    for i in range(1, K + 1):
        for j in range(1, i + 1):
            rows, cols = sig.d(i + 1) - sig.d(i), sig.d(j) - sig.d(j - 1)
            blocks[(i, j)] = block(rng, rows, cols, n, n, k, mode)
    phi = flag_affine_embed(blocks, sig, n, k, mode)
    G = flag_h_element(rng, sig, n, k, mode)
    return FlagPoint(sig, phi.rep @ G, check=False)


def flag_projective(rng: np.random.Generator, sig: FlagSignature, k: int, mode: str) -> FlagPoint:
    return FlagPoint(sig.dual(), frame(rng, sig.m, 1, k, mode), check=False)


def flag_resolvent_point(rng: np.random.Generator, pi: FlagPoint, sig: FlagSignature, n: int, mode: str,
                         tol: float = DEFAULT_TOL, tries: int = 50) -> FlagPoint:
    for _ in range(tries):
        phi = flag_point(rng, sig, n, pi.k, mode)
        if flag_resolvent_set(pi, phi, FULL, tol) and all(
                _well_conditioned(projected_pi(pi, j), flag_project(phi, j), mode, FLAG_MAX_COND)
                for j in range(1, sig.K + 1)):
            return phi
    raise RuntimeError("could not sample a flag point in the resolvent set")


def contraction(rng: np.random.Generator, k: int, max_norm: float = 0.95) -> np.ndarray:
    a = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    return a * (rng.uniform(0.05, max_norm) / np.linalg.norm(a, 2))


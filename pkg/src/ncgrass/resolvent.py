"""Transversality, Grassmannian and flag resolvents, and their identities.

Fix pi in Gr^(m-d;m)_1 with representative ``a``.  For sigma with
representative B at level n, the frame

    r(a^{(+)n}; B) = [ columns d+1..m of a^{(+)n} | columns m-d+1..m of B ]

decides transversality, and the resolvent with indices (v, u) reads

    R(v, u)(sigma) = sum_i B[v, m-d+i] * zeta_u[i],

where zeta_u is the outer column d+u of r^{-1} restricted to its last d rows.
For affine points at (d, m) = (1, 2) this is (beta - a)^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _exact as E
from .algebra import (
    DEFAULT_TOL,
    LayeredMatrix,
    SubalgebraSpec,
    amplify,
    array_mode,
    block_matrix,
    interleaved_direct_sum,
    invert_array,
    layered_invert,
    layered_multiply,
    residual,
    scalar_array,
    subalgebra_contains,
)
from .errors import (
    DimensionMismatch,
    NotInSubalgebra,
    NotInvertible,
    NotTransversal,
    SignatureMismatch,
)
from .grassmann import (
    FlagPoint,
    FlagSignature,
    GrassPoint,
    affine_embed,
    coupling_block,
    flag_project,
)
from .ncfunc import DomainPredicate, NcFunctionHandle, ScalingPolicy, dd_apply, dd_flag_apply

FULL = SubalgebraSpec.full()


class ProjectivePoint(GrassPoint):
    """A level-one point pi of Gr^(m-d;m), amplified on demand."""

    __slots__ = ()

    def __init__(self, d: int, rep: LayeredMatrix, *, tol: float = DEFAULT_TOL, check: bool = True):
        if rep.n != 1:
            raise DimensionMismatch("projective points live at level 1")
        super().__init__(d, rep, tol=tol, check=check)

    @classmethod
    def from_point(cls, point: GrassPoint) -> "ProjectivePoint":
        if isinstance(point, ProjectivePoint):
            return point
        out = cls(point.d, point.rep, check=False)
        inv = point._memo.get("inverse")
        if inv is not None:
            out._memo["inverse"] = inv
        return out

    def amplify(self, n: int) -> LayeredMatrix:
        """a^{(+)n}: n - 1 interleaved direct sums of the representative."""
        def build():
            out = self.rep
            for _ in range(n - 1):
                out = interleaved_direct_sum(out, self.rep)
            return out
        return self.cached(("amplify", n), build)


@dataclass(frozen=True)
class ResolventValue:
    value: LayeredMatrix
    v: int
    u: int
    zeta: LayeredMatrix = field(repr=False)


def r_matrix(A: LayeredMatrix, B: LayeredMatrix, d: int) -> LayeredMatrix:
    """[A columns d+1..m | B columns m-d+1..m] (one-based outer columns)."""
    if (A.m, A.n, A.k) != (B.m, B.n, B.k) or not (A.is_square and B.is_square):
        raise DimensionMismatch("r-matrix needs square frames with equal layers")
    m = A.m
    if not 0 <= d <= m:
        raise DimensionMismatch(f"d={d} outside [0, {m}]")
    left = A.take(list(range(m)), list(range(d, m)))
    right = B.take(list(range(m)), list(range(m - d, m)))
    return block_matrix([[left, right]])


def _check_pair(pi: GrassPoint, sigma: GrassPoint):
    if pi.m != sigma.m or pi.k != sigma.k:
        raise DimensionMismatch("pi and sigma need equal m and k")
    if pi.d != sigma.m - sigma.d:
        raise DimensionMismatch(f"pi must lie in Gr^({sigma.m - sigma.d};{sigma.m})")


def _r_inverse(pi: ProjectivePoint, sigma: GrassPoint, tol: float) -> Optional[LayeredMatrix]:
    """Inverse of r(pi^{(+)n}; sigma), memoized on sigma (None if singular)."""
    key = ("r-inverse", id(pi), tol)
    hit = sigma._memo.get(key)
    if hit is not None and hit[0] is pi:
        return hit[1]
    r = r_matrix(pi.amplify(sigma.n), sigma.rep, sigma.d)
    inv = layered_invert(r, tol).inverse
    sigma._memo[key] = (pi, inv)
    return inv


def is_transversal(A: LayeredMatrix, sigma: GrassPoint, spec: SubalgebraSpec = FULL,
                   tol: float = DEFAULT_TOL) -> bool:
    """Invertibility of r(A; B) for a level-n frame A of pi.

    For a proper subalgebra the inverse must also have entries in it.
    """
    r = r_matrix(A, sigma.rep, sigma.d)
    report = layered_invert(r, tol)
    if not report.invertible:
        return False
    return spec.tag == "full" or subalgebra_contains(report.inverse, spec)


def in_resolvent_set(pi: GrassPoint, sigma: GrassPoint, spec: SubalgebraSpec = FULL,
                     tol: float = DEFAULT_TOL) -> bool:
    """sigma over the subalgebra, transversal to pi^{(+)n} over all of M_k."""
    _check_pair(pi, sigma)
    if spec.tag != "full" and not subalgebra_contains(sigma.rep, spec):
        raise NotInSubalgebra("representative of sigma has entries outside the subalgebra")
    pi = ProjectivePoint.from_point(pi)
    return _r_inverse(pi, sigma, tol) is not None


def grass_resolvent(pi: GrassPoint, sigma: GrassPoint, v: int, u: int,
                    tol: float = DEFAULT_TOL) -> ResolventValue:
    _check_pair(pi, sigma)
    d, m, n, k = sigma.dims
    if not (1 <= v <= d and 1 <= u <= m - d):
        raise DimensionMismatch(f"(v,u)=({v},{u}) outside [{d}]x[{m - d}]")
    pi = ProjectivePoint.from_point(pi)
    inv = _r_inverse(pi, sigma, tol)
    if inv is None:
        raise NotTransversal("pi and sigma are not transversal")
    zeta = inv.take(list(range(m - d, m)), [d + u - 1])
    row = sigma.rep.take([v - 1], list(range(m - d, m)))
    value = layered_multiply(row, zeta)
    return ResolventValue(value, v, u, zeta)


def resolvent_function(pi: GrassPoint, d: int, v: int, u: int, spec: SubalgebraSpec = FULL,
                       tol: float = DEFAULT_TOL) -> NcFunctionHandle:
    """R(v, u) as an nc function on the resolvent set of pi."""
    pi = ProjectivePoint.from_point(pi)
    m = pi.m

    def member(sigma):
        try:
            return in_resolvent_set(pi, sigma, spec, tol)
        except NotInSubalgebra:
            return False

    return NcFunctionHandle(
        evaluator=lambda sigma: grass_resolvent(pi, sigma, v, u, tol).value,
        domain=DomainPredicate(member, closed_under_sum=True, name="resolvent set"),
        d=d, m=m, k_source=pi.k, k_target=pi.k, name=f"R({v},{u})",
    )


def resolvent_equation_residual(pi: GrassPoint, sigma: GrassPoint, sigma2: GrassPoint,
                                s: int, t: int, v: int, u: int, X,
                                policy: Optional[ScalingPolicy] = None,
                                tol: float = DEFAULT_TOL, spec: SubalgebraSpec = FULL) -> float:
    """Max-modulus of Delta_{s,t} R(v,u)(sigma; sigma')(X) + R(v,s)(sigma) X R(t,u)(sigma')."""
    pi = ProjectivePoint.from_point(pi)
    for p in (sigma, sigma2):
        if not in_resolvent_set(pi, p, spec, tol):
            raise NotTransversal("sigma and sigma' must lie in the resolvent set")
    Xb = coupling_block(X, sigma.n, sigma2.n, sigma.k, sigma.mode)
    f = resolvent_function(pi, sigma.d, v, u, spec, tol)
    lhs = dd_apply(f, sigma, sigma2, s, t, Xb, policy, tol)
    left = grass_resolvent(pi, sigma, v, s, tol).value
    right = grass_resolvent(pi, sigma2, t, u, tol).value
    rhs = layered_multiply(layered_multiply(left, Xb), right)
    return residual(lhs, -rhs)


# ---------------------------------------------------------------------------
# flags
# ---------------------------------------------------------------------------

def _check_flag_pair(pi: FlagPoint, phi: FlagPoint):
    if pi.sig != phi.sig.dual():
        raise SignatureMismatch(f"pi has signature {pi.sig.dims}, expected {phi.sig.dual().dims}")
    if pi.n != 1:
        raise DimensionMismatch("flag pi must be at level 1")
    if pi.k != phi.k:
        raise DimensionMismatch("pi and phi need equal k")


def projected_pi(pi: FlagPoint, j: int) -> ProjectivePoint:
    """p_{m - d_j}(pi), where d_j comes from the dual signature."""
    K = pi.sig.K
    return pi.cached(("projective", j), lambda: ProjectivePoint.from_point(flag_project(pi, K + 1 - j)))


def flag_resolvent_set(pi: FlagPoint, phi: FlagPoint, spec: SubalgebraSpec = FULL,
                       tol: float = DEFAULT_TOL) -> bool:
    _check_flag_pair(pi, phi)
    return all(in_resolvent_set(projected_pi(pi, j), flag_project(phi, j), spec, tol)
               for j in range(1, phi.sig.K + 1))


def flag_resolvent(pi: FlagPoint, phi: FlagPoint, j: int, v: int, u: int,
                   tol: float = DEFAULT_TOL) -> ResolventValue:
    """R(j; v, u)(phi) = R(d_{j-1} + v, u)(p_{d_j} phi) at level d_j."""
    _check_flag_pair(pi, phi)
    sig = phi.sig
    if not 1 <= v <= sig.d(j) - sig.d(j - 1):
        raise DimensionMismatch(f"v={v} outside [1, {sig.d(j) - sig.d(j - 1)}]")
    value = grass_resolvent(projected_pi(pi, j), flag_project(phi, j), sig.d(j - 1) + v, u, tol)
    return ResolventValue(value.value, v, u, value.zeta)


def flag_resolvent_function(pi: FlagPoint, sig: FlagSignature, j: int, v: int, u: int,
                            spec: SubalgebraSpec = FULL, tol: float = DEFAULT_TOL) -> NcFunctionHandle:
    """R(j; v, u) as a function of flag points."""
    def member(phi):
        try:
            return flag_resolvent_set(pi, phi, spec, tol)
        except NotInSubalgebra:
            return False

    return NcFunctionHandle(
        evaluator=lambda phi: flag_resolvent(pi, phi, j, v, u, tol).value,
        domain=DomainPredicate(member, closed_under_sum=True, name="flag resolvent set"),
        d=None, m=sig.m, k_source=pi.k, k_target=pi.k, name=f"R({j};{v},{u})",
    )


def flag_component_function(pi: FlagPoint, sig: FlagSignature, j: int, v: int, u: int,
                            spec: SubalgebraSpec = FULL, tol: float = DEFAULT_TOL) -> NcFunctionHandle:
    """The Grassmannian resolvent at level d_j behind R(j; v, u)."""
    return resolvent_function(projected_pi(pi, j), sig.d(j), sig.d(j - 1) + v, u, spec, tol)


def flag_resolvent_equation_residual(pi: FlagPoint, phi: FlagPoint, phi2: FlagPoint, j: int,
                                     s: int, t: int, v: int, u: int, X,
                                     policy: Optional[ScalingPolicy] = None,
                                     tol: float = DEFAULT_TOL, spec: SubalgebraSpec = FULL) -> float:
    """Flag version of the resolvent equation at level j."""
    for p in (phi, phi2):
        if not flag_resolvent_set(pi, p, spec, tol):
            raise NotTransversal("flag points must lie in the flag resolvent set")
    Xb = coupling_block(X, phi.n, phi2.n, phi.k, phi.mode)
    f = flag_component_function(pi, phi.sig, j, v, u, spec, tol)
    lhs = dd_flag_apply(f, phi, phi2, j, s, t, Xb, policy, tol)
    left = flag_resolvent(pi, phi, j, v, s, tol).value
    right = flag_resolvent(pi, phi2, j, t, u, tol).value
    rhs = layered_multiply(layered_multiply(left, Xb), right)
    return residual(lhs, -rhs)


# ---------------------------------------------------------------------------
# partial converse
# ---------------------------------------------------------------------------

@dataclass
class PartialConverseReport:
    passed: bool
    dd_residual: float
    constancy_residual: float
    resolvent_residual: float
    initial_residual: float
    pairs: int
    samples: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _affine_point(beta: np.ndarray, n: int, k: int) -> GrassPoint:
    return affine_embed(LayeredMatrix(beta, 1, n, k))


def partial_converse_check(a, b, samples: Sequence, beta0, tol: float = DEFAULT_TOL,
                           rng: Optional[np.random.Generator] = None, max_pairs: Optional[int] = None,
                           spec: SubalgebraSpec = FULL) -> PartialConverseReport:
    """Check the candidate f = (b (x) I)(beta (b (x) I) - a (x) I)^{-1} on samples.

    ``samples`` and ``beta0`` are scalar n*k x n*k matrices (elements of
    M_n(M_k)).  Checks: the dd-equation Delta f(sigma; sigma')(X) =
    -f(sigma) X f(sigma') on sample pairs with random X; constancy of
    c^{-1}(beta) - beta (b (x) I) at each level; agreement with the
    Grassmannian resolvent of the class of [[0, b], [1, a]]; and the initial
    value at beta0.
    """
    a = scalar_array(a)
    mode = array_mode(a)
    b = scalar_array(b, mode)
    k = a.shape[0]
    binv, *_ = invert_array(b, tol)
    if binv is None:
        raise NotInvertible("b is not invertible")
    rng = rng or np.random.default_rng(0)

    def level(beta):
        return beta.shape[0] // k

    def f_value(beta):
        n = level(beta)
        shifted = beta.dot(amplify(b, n)) - amplify(a, n)
        inv, *_ = invert_array(shifted, tol)
        if inv is None:
            raise NotInvertible("beta (b (x) I) - a (x) I is singular")
        return amplify(b, n).dot(inv)

    def member(point):
        rep = point.rep
        if not layered_invert(rep.take([0], [1]), tol).invertible:
            return False
        # affine with coordinate rep22 rep12^{-1}; require the shifted matrix invertible
        beta = layered_multiply(rep.take([1], [1]), layered_invert(rep.take([0], [1]), tol).inverse).data
        n = point.n
        return invert_array(beta.dot(amplify(b, n)) - amplify(a, n), tol)[0] is not None

    def f_affine(point):
        rep = point.rep
        beta = layered_multiply(rep.take([1], [1]), layered_invert(rep.take([0], [1]), tol).inverse).data
        return LayeredMatrix(f_value(beta), 1, point.n, k)

    f = NcFunctionHandle(f_affine, DomainPredicate(member, name="beta(b)-a invertible"),
                         d=1, m=2, k_source=k, k_target=k, name="f")

    betas = [scalar_array(x, mode) for x in samples]
    beta0 = scalar_array(beta0, mode)
    for beta in betas + [beta0]:
        if beta.shape[0] % k or beta.shape[0] != beta.shape[1]:
            raise DimensionMismatch("samples must be n*k x n*k")
        if spec.tag != "full" and not subalgebra_contains(LayeredMatrix(beta, 1, level(beta), k), spec):
            raise NotInSubalgebra("sample outside the subalgebra")
    for beta in betas:
        f_value(beta)
    points = [_affine_point(beta, level(beta), k) for beta in betas]

    # (i) dd-equation on pairs
    pairs = [(i, j) for i in range(len(betas)) for j in range(len(betas))]
    if max_pairs is not None and len(pairs) > max_pairs:
        chosen = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[int(c)] for c in sorted(chosen)]
    dd_res = 0.0
    policy = ScalingPolicy.default(mode)
    for i, j in pairs:
        n, n2 = level(betas[i]), level(betas[j])
        X = _random_block(rng, n * k, n2 * k, mode)
        lhs = dd_apply(f, points[i], points[j], 1, 1, X, policy, tol)
        rhs = f_value(betas[i]).dot(X).dot(f_value(betas[j]))
        dd_res = max(dd_res, residual(lhs.data, -rhs))

    # (ii) telescoping constancy per level
    const_res = 0.0
    by_level: dict = {}
    for beta in betas:
        n = level(beta)
        c = amplify(binv, n).dot(f_value(beta))
        cinv, *_ = invert_array(c, tol)
        delta = cinv - beta.dot(amplify(b, n))
        ref = by_level.setdefault(n, delta)
        const_res = max(const_res, residual(delta, ref), residual(delta, -amplify(a, n)))

    # (iii) agreement with the Grassmannian resolvent of [[0, b], [1, a]]
    pi_rep = np.block([[E.zeros((k, k)) if mode == "exact" else np.zeros((k, k), dtype=complex), b],
                       [E.eye(k) if mode == "exact" else np.eye(k, dtype=complex), a]])
    pi = ProjectivePoint(1, LayeredMatrix(pi_rep, 2, 1, k), tol=tol)
    res_res = 0.0
    for beta, point in zip(betas, points):
        value = grass_resolvent(pi, point, 1, 1, tol).value
        res_res = max(res_res, residual(value.data, f_value(beta)))

    # initial value
    n0 = level(beta0)
    init = residual(f_value(beta0), amplify(b, n0).dot(
        invert_array(beta0.dot(amplify(b, n0)) - amplify(a, n0), tol)[0]))

    worst = max(dd_res, const_res, res_res, init)
    passed = worst == 0.0 if mode == "exact" else worst < max(tol, 1e-9) * 10
    return PartialConverseReport(passed, dd_res, const_res, res_res, init, len(pairs), len(betas))


def _random_block(rng: np.random.Generator, rows: int, cols: int, mode: str) -> np.ndarray:
    if mode == "exact":
        vals = rng.integers(-3, 4, size=(rows, cols))
        return E.exact_array(vals.astype(object))
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))

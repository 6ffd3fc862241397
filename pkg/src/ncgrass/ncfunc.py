"""nc functions on Grassmannian points and their difference-differential operators.

An :class:`NcFunctionHandle` wraps an evaluator taking a :class:`GrassPoint`
(or :class:`FlagPoint`) at level n to one outer block of n x n middle blocks
over M_{k_target}.  The checkers in this module test the direct-sum,
similarity and intertwining laws on given samples; :func:`dd_apply` reads the
off-diagonal corner of f on a pinched point.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _exact as E
from .algebra import (
    DEFAULT_TOL,
    LayeredMatrix,
    eye_like,
    interleaved_direct_sum,
    invert_array,
    max_abs,
    middle_lift,
    residual,
    scalar_array,
)
from .errors import (
    AdmissibilityError,
    DimensionMismatch,
    DomainError,
    NotInvertible,
    StructureError,
    WitnessRequired,
)
from .grassmann import (
    FlagPoint,
    GrassPoint,
    direct_sum,
    flag_project,
    gr_equiv,
    matrix_unit_block,
    pinch,
    shift_act,
    similarity,
    coupling_block,
)

Point = Union[GrassPoint, FlagPoint]


@dataclass(frozen=True)
class DomainPredicate:
    test: Callable[[Point], bool]
    closed_under_sum: bool = False
    name: str = "domain"

    def __call__(self, point: Point) -> bool:
        return bool(self.test(point))


EVERYWHERE = DomainPredicate(lambda p: True, closed_under_sum=True, name="everywhere")


@dataclass(frozen=True)
class ScalingPolicy:
    """Ladder of scaling factors tried when pinching into the domain."""

    ladder: tuple = tuple(E.mpq(1, 2 ** i) for i in range(21))
    cross_check: bool = True

    def __post_init__(self):
        if not self.ladder:
            raise ValueError("scaling ladder must be nonempty")
        if any(r == 0 for r in self.ladder):
            raise NotInvertible("scaling factors must be invertible")

    @classmethod
    def default(cls, mode: str = "float") -> "ScalingPolicy":
        return cls() if mode == "float" else cls.unscaled()

    @classmethod
    def unscaled(cls) -> "ScalingPolicy":
        return cls(ladder=(E.ONE,), cross_check=False)


@dataclass(frozen=True)
class NcFunctionHandle:
    """Graded evaluator with a domain predicate.

    ``d`` is None for flag-point functions.  Calling the handle checks the
    point's layers and domain membership, then gradedness of the output.
    """

    evaluator: Callable[[Point], LayeredMatrix]
    domain: DomainPredicate
    d: Optional[int]
    m: int
    k_source: int
    k_target: int
    name: str = "f"

    def _check_point(self, point: Point):
        if point.m != self.m or point.k != self.k_source:
            raise DimensionMismatch(f"{self.name} expects m={self.m}, k={self.k_source}")
        if self.d is not None and getattr(point, "d", None) != self.d:
            raise DimensionMismatch(f"{self.name} expects d={self.d}")

    def contains(self, point: Point) -> bool:
        self._check_point(point)
        return self.domain(point)

    def __call__(self, point: Point) -> LayeredMatrix:
        if not self.contains(point):
            raise DomainError(f"point outside the domain of {self.name}")
        value = self.evaluator(point)
        n = point.n
        if (value.m, value.cols, value.n, value.n_cols, value.k) != (1, 1, n, n, self.k_target):
            raise StructureError(f"{self.name} is not graded at level {n}")
        return value


@dataclass(frozen=True)
class Verdict:
    check: str
    inputs_digest: str
    verdict: str
    residual: float
    seed: Optional[int] = None

    def as_dict(self) -> dict:
        return {"check": self.check, "inputs-digest": self.inputs_digest, "verdict": self.verdict,
                "residual": self.residual, "seed": self.seed}


def digest(*items) -> str:
    """Short stable hash of points, matrices and plain values."""
    h = hashlib.sha256()
    for item in items:
        if isinstance(item, (GrassPoint, FlagPoint)):
            item = item.rep
        if isinstance(item, LayeredMatrix):
            h.update(repr((item.m, item.n, item.k, item.cols, item.n_cols)).encode())
            item = item.data
        if isinstance(item, np.ndarray):
            h.update(repr([str(x) for x in item.flat]).encode() if item.dtype == object else item.tobytes())
        else:
            h.update(repr(item).encode())
    return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# comparisons
# ---------------------------------------------------------------------------

def _close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if a.dtype == object and b.dtype == object:
        return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))
    scale = max(1.0, max_abs(a), max_abs(b))
    return residual(a, b) <= tol * scale


def _zero(a: np.ndarray, tol: float, scale: float = 1.0) -> bool:
    if a.dtype == object:
        return all(x == 0 for x in a.flat)
    return max_abs(a) <= tol * max(1.0, scale)


def _conjugate_middle(s: np.ndarray, value: LayeredMatrix, tol: float) -> np.ndarray:
    """(s (x) I) value (s (x) I)^{-1} on the middle layer."""
    inv, *_ = invert_array(s, tol)
    if inv is None:
        raise NotInvertible("similarity matrix is singular")
    lift = middle_lift(s, value.k)
    lift_inv = middle_lift(inv, value.k)
    data = value.data
    if data.dtype != lift.dtype:
        lift, lift_inv = lift.astype(data.dtype), lift_inv.astype(data.dtype)
    return lift.dot(data).dot(lift_inv)


# ---------------------------------------------------------------------------
# the three defining laws
# ---------------------------------------------------------------------------

def check_direct_sum(f: NcFunctionHandle, sigma: GrassPoint, sigma2: GrassPoint,
                     tol: float = DEFAULT_TOL) -> bool:
    joined = f(direct_sum(sigma, sigma2))
    expected = interleaved_direct_sum(f(sigma), f(sigma2))
    return _close(joined.data, expected.data, tol)


def check_similarity(f: NcFunctionHandle, sigma: GrassPoint, s, tol: float = DEFAULT_TOL) -> bool:
    s = scalar_array(s, sigma.mode)
    moved = f(similarity(s, sigma, tol))
    return _close(moved.data, _conjugate_middle(s, f(sigma), tol), tol)


VACUOUS, HOLDS, VIOLATED = "vacuous", "holds", "violated"


def intertwining_hypothesis(sigma: GrassPoint, sigma2: GrassPoint, T, tol: float = DEFAULT_TOL) -> bool:
    """Is sigma (+) sigma2 fixed by the similarity [[I, T], [0, I]]?"""
    n, n2 = sigma.n, sigma2.n
    T = scalar_array(T, sigma.mode)
    if T.shape != (n, n2):
        raise DimensionMismatch(f"T must be {n}x{n2}")
    mode = sigma.mode
    s = np.block([[eye_like(n, mode), T], [np.zeros((n2, n), dtype=T.dtype) if mode == "float" else E.zeros((n2, n)),
                                           eye_like(n2, mode)]])
    joined = direct_sum(sigma, sigma2)
    return gr_equiv(similarity(s, joined, tol), joined, tol)


def check_intertwining(f: NcFunctionHandle, sigma: GrassPoint, sigma2: GrassPoint, T,
                       tol: float = DEFAULT_TOL) -> str:
    """``"vacuous"`` if the hypothesis fails, else ``"holds"`` or ``"violated"``."""
    for p in (sigma, sigma2, direct_sum(sigma, sigma2)):
        if not f.contains(p):
            raise DomainError("intertwining check needs sigma, sigma2 and their sum in the domain")
    if not intertwining_hypothesis(sigma, sigma2, T, tol):
        return VACUOUS
    T = scalar_array(T, sigma.mode)
    lift = middle_lift(T, f.k_target)
    a, b = f(sigma).data, f(sigma2).data
    if a.dtype != lift.dtype:
        lift = lift.astype(a.dtype)
    return HOLDS if _close(a.dot(lift), lift.dot(b), tol) else VIOLATED


# ---------------------------------------------------------------------------
# difference-differential operators
# ---------------------------------------------------------------------------

def _ratio(r, mode: str):
    return E.to_exact(r) if mode == "exact" else complex(r)


def _corner(f: NcFunctionHandle, sigma: GrassPoint, sigma2: GrassPoint, u: int, v: int,
            X: LayeredMatrix, r, tol: float) -> LayeredMatrix:
    """r^{-1} times the top-right block of f at the pinch with coupling rX."""
    n, n2 = sigma.n, sigma2.n
    point = pinch(sigma, sigma2, u, v, X.scale(r))
    F = f(point)
    top_left, top_right = F.middle(slice(0, n), slice(0, n)), F.middle(slice(0, n), slice(n, None))
    bottom_left, bottom_right = F.middle(slice(n, None), slice(0, n)), F.middle(slice(n, None), slice(n, None))
    scale = max_abs(F.data)
    if not _close(top_left.data, f(sigma).data, tol) or not _close(bottom_right.data, f(sigma2).data, tol):
        raise StructureError("diagonal blocks at the pinch differ from f(sigma), f(sigma')")
    if not _zero(bottom_left.data, tol, scale):
        raise StructureError("bottom-left block at the pinch is not zero")
    return top_right.scale(1 / _ratio(r, F.mode))


def dd_apply(f: NcFunctionHandle, sigma: GrassPoint, sigma2: GrassPoint, u: int, v: int, X,
             policy: Optional[ScalingPolicy] = None, tol: float = DEFAULT_TOL) -> LayeredMatrix:
    """The (u, v) difference-differential of f at (sigma; sigma2), applied to X."""
    if not f.contains(sigma) or not f.contains(sigma2):
        raise DomainError("dd_apply needs sigma and sigma' in the domain")
    policy = policy or ScalingPolicy.default(sigma.mode)
    Xb = coupling_block(X, sigma.n, sigma2.n, sigma.k, sigma.mode)
    hits = []
    for r in policy.ladder:
        r = _ratio(r, sigma.mode)
        if f.contains(pinch(sigma, sigma2, u, v, Xb.scale(r))):
            hits.append(r)
            if len(hits) == 2 or not policy.cross_check:
                break
    if not hits:
        raise AdmissibilityError("no scaling factor on the ladder puts the pinch in the domain")
    value = _corner(f, sigma, sigma2, u, v, Xb, hits[0], tol)
    if len(hits) == 2:
        other = _corner(f, sigma, sigma2, u, v, Xb, hits[1], tol)
        if not _close(value.data, other.data, max(tol, 1e-8)):
            raise StructureError("corner block depends on the scaling factor")
    return value


def dd_flag_apply(f: NcFunctionHandle, phi: FlagPoint, phi2: FlagPoint, j: int, u: int, v: int, X,
                  policy: Optional[ScalingPolicy] = None, tol: float = DEFAULT_TOL) -> LayeredMatrix:
    """The (j; u, v) flag operator: the (u, d_{j-1} + v) operator at level d_j.

    ``f`` acts on Grassmannian points with d = d_j (for instance the j-th
    Grassmannian component of a flag resolvent).
    """
    if phi.sig != phi2.sig:
        raise DimensionMismatch("flag points have different signatures")
    sig = phi.sig
    sigma, sigma2 = flag_project(phi, j), flag_project(phi2, j)
    dj, dprev = sig.d(j), sig.d(j - 1)
    if f.d != dj:
        raise DimensionMismatch(f"handle acts on d={f.d}, flag level j={j} needs d={dj}")
    if not 1 <= v <= dj - dprev:
        raise DimensionMismatch(f"v={v} outside [1, {dj - dprev}]")
    return dd_apply(f, sigma, sigma2, u, dprev + v, X, policy, tol)


def first_order_difference_check(f: NcFunctionHandle, sigma: GrassPoint, u: int, v: int, X,
                                 tol: float = DEFAULT_TOL) -> float:
    """Residual of f(sigma) - f(sigma(e_{u,v} (x) X)) against the corner at X.

    No scaling is applied: the pinch must itself lie in the domain.
    """
    d, m, n, k = sigma.dims
    Xb = coupling_block(X, n, n, k, sigma.mode)
    shifted = shift_act(sigma, matrix_unit_block(m - d, d, u, v, Xb))
    if not f.contains(sigma) or not f.contains(shifted):
        raise DomainError("sigma and its shift must lie in the domain")
    if not f.contains(pinch(sigma, shifted, u, v, Xb)):
        raise DomainError("unscaled pinch lies outside the domain")
    lhs = f(sigma) - f(shifted)
    rhs = dd_apply(f, sigma, shifted, u, v, Xb, ScalingPolicy.unscaled(), tol)
    return residual(lhs, rhs)


# ---------------------------------------------------------------------------
# similarity-invariant envelope
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeHandle:
    """Extension of f to all similarity images s . sigma of its domain."""

    base: NcFunctionHandle
    tol: float = DEFAULT_TOL

    def __call__(self, point: GrassPoint, witness: Optional[tuple] = None) -> LayeredMatrix:
        if witness is None:
            if self.base.contains(point):
                return self.base(point)
            raise WitnessRequired("point outside the base domain; pass a witness (s, sigma)")
        s, sigma = witness
        s = scalar_array(s, sigma.mode)
        if not gr_equiv(similarity(s, sigma, self.tol), point, self.tol):
            raise DomainError("witness does not represent the point")
        value = self.base(sigma)
        return LayeredMatrix(_conjugate_middle(s, value, self.tol), 1, value.n, value.k)


def envelope_extend(f: NcFunctionHandle, tol: float = DEFAULT_TOL) -> EnvelopeHandle:
    return EnvelopeHandle(f, tol)

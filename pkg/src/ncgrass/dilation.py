"""Pure contractions, the graph transform and the Halmos dilation (float only).

For a pure contraction a (all singular values below 1) put
S = (1 - a*a)^{1/2} and S' = (1 - aa*)^{1/2}.  The modeled closed operator is
t = a S^{-1}, and the unitary

    [[-a*, S ],
     [ S', a ]]

represents a point pi(t) of Gr^(1;2)_1.  Its Grassmannian resolvent at the
affine point beta equals S (beta S - a)^{-1} = (beta - t)^{-1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    LayeredMatrix,
    SubalgebraSpec,
    amplify,
    hermitian_sqrt,
    subalgebra_contains,
)
from .errors import (
    DimensionMismatch,
    ExactModeUnsupported,
    NcGrassError,
    NotInSubalgebra,
    NotPureContraction,
)
from .grassmann import affine_embed
from .resolvent import ProjectivePoint, grass_resolvent, in_resolvent_set

UNITARY_TOL = 1e-10


def _float_square(a) -> np.ndarray:
    arr = np.asarray(a)
    if arr.dtype == object:
        raise ExactModeUnsupported("dilation works in float mode only")
    arr = np.array(arr, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch("expected a square matrix")
    return arr


def is_pure_contraction(a, tol: float = DEFAULT_TOL) -> bool:
    arr = _float_square(a)
    if arr.size == 0:
        return True
    return float(np.linalg.norm(arr, 2)) < 1 - tol


def _sqrt(P: np.ndarray, tol: float) -> np.ndarray:
    k = P.shape[0]
    return hermitian_sqrt(LayeredMatrix(P, 1, 1, k), tol).data


@dataclass(frozen=True, eq=False)
class ContractionModel:
    a: np.ndarray
    singular_values: np.ndarray
    tol: float = DEFAULT_TOL

    @classmethod
    def from_matrix(cls, a, tol: float = DEFAULT_TOL) -> "ContractionModel":
        arr = _float_square(a)
        sv = np.linalg.svd(arr, compute_uv=False) if arr.size else np.zeros(0)
        if sv.size and sv[0] >= 1 - tol:
            raise NotPureContraction(f"largest singular value {sv[0]:.6g} is not below 1 - tol")
        arr.setflags(write=False)
        return cls(arr, sv, tol)

    @property
    def k(self) -> int:
        return self.a.shape[0]

    def defect(self) -> np.ndarray:
        """S = (1 - a*a)^{1/2}."""
        a = self.a
        return _sqrt(np.eye(self.k) - a.conj().T @ a, self.tol)

    def codefect(self) -> np.ndarray:
        """S' = (1 - aa*)^{1/2}."""
        a = self.a
        return _sqrt(np.eye(self.k) - a @ a.conj().T, self.tol)


@dataclass(frozen=True, eq=False)
class ClosedOperatorModel:
    t: np.ndarray
    source: ContractionModel

    def relation_residual(self) -> float:
        """|| t S - a ||, which vanishes for the graph transform."""
        return float(np.max(np.abs(self.t @ self.source.defect() - self.source.a), initial=0.0))


def _as_model(a, tol: float) -> ContractionModel:
    return a if isinstance(a, ContractionModel) else ContractionModel.from_matrix(a, tol)


def graph_transform(a) -> ClosedOperatorModel:
    model = _as_model(a, DEFAULT_TOL)
    t = model.a @ np.linalg.inv(model.defect())
    return ClosedOperatorModel(t, model)


def inverse_graph_transform(t) -> np.ndarray:
    """a = t (1 + t*t)^{-1/2}."""
    t = _float_square(t)
    root = _sqrt(np.eye(t.shape[0]) + t.conj().T @ t, DEFAULT_TOL)
    return t @ np.linalg.inv(root)


def halmos_dilation(a) -> ProjectivePoint:
    model = _as_model(a, DEFAULT_TOL)
    k = model.k
    U = np.block([[-model.a.conj().T, model.defect()], [model.codefect(), model.a]])
    err = float(np.max(np.abs(U.conj().T @ U - np.eye(2 * k))))
    if err > UNITARY_TOL:
        raise NcGrassError(f"dilation is not unitary (residual {err:.3e})")
    return ProjectivePoint(1, LayeredMatrix(U, 2, 1, k))


def unitarity_residual(pi: ProjectivePoint) -> float:
    U = pi.rep.data
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


@dataclass
class CorrespondenceReport:
    grassmannian_member: bool
    classical_member: bool
    near_singular: bool
    agree: Optional[bool]
    formula_residual: Optional[float] = None
    inverse_residual: Optional[float] = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def resolvent_correspondence_check(a, beta, spec: SubalgebraSpec = SubalgebraSpec.full(),
                                   tol: float = DEFAULT_TOL) -> CorrespondenceReport:
    """Compare membership of embed(beta) in the resolvent set of pi(t) with
    invertibility of beta S - a, and check the resolvent formulas.

    ``beta`` is an n*k x n*k scalar matrix.  When the smallest singular value
    of beta S - a (relative to max(1, largest)) lies in [tol, 10 tol], the
    report is flagged near-singular and ``agree`` is None.
    """
    model = _as_model(a, tol)
    k = model.k
    beta = _float_square(beta)
    if beta.shape[0] % k:
        raise DimensionMismatch("beta must be n*k x n*k")
    n = beta.shape[0] // k
    B = LayeredMatrix(beta, 1, n, k)
    if spec.tag != "full" and not subalgebra_contains(B, spec):
        raise NotInSubalgebra("beta has entries outside the subalgebra")
    S = model.defect()
    pi = halmos_dilation(model)
    sigma = affine_embed(B)
    grass = in_resolvent_set(pi, sigma, spec, tol)

    shifted = beta @ amplify(S, n) - amplify(model.a, n)
    sv = np.linalg.svd(shifted, compute_uv=False)
    ratio = sv[-1] / max(1.0, sv[0])
    classical = bool(ratio >= tol)
    near = bool(tol <= ratio <= 10 * tol)
    report = CorrespondenceReport(grass, classical, near, None if near else grass == classical)
    if grass and classical:
        value = grass_resolvent(pi, sigma, 1, 1, tol).value.data
        formula = amplify(S, n) @ np.linalg.inv(shifted)
        t = graph_transform(model).t
        report.formula_residual = float(np.max(np.abs(value - formula)))
        report.inverse_residual = float(np.max(np.abs((beta - amplify(t, n)) @ value - np.eye(n * k))))
    return report

import numpy as np
import pytest

from ncgrass import _exact as E
from ncgrass import sampling as S
from ncgrass.algebra import LayeredMatrix, SubalgebraSpec, interleaved_direct_sum, layered
from ncgrass.errors import NotInSubalgebra, NotInvertible, NotTransversal, SignatureMismatch
from ncgrass.grassmann import (
    FlagPoint,
    FlagSignature,
    GrassPoint,
    affine_embed,
    direct_sum,
    flag_affine_embed,
    flag_project,
)
from ncgrass.resolvent import (
    ProjectivePoint,
    flag_resolvent,
    flag_resolvent_equation_residual,
    flag_resolvent_set,
    grass_resolvent,
    in_resolvent_set,
    is_transversal,
    partial_converse_check,
    projected_pi,
    r_matrix,
    resolvent_equation_residual,
)

from conftest import emb, frame_point, proj, q, scalar_block


def one(x):
    return layered([[x]], 1, 1, 1, "exact")


def test_r_matrix_examples():
    P = layered([[0, 1], [1, 0]], 2, 1, 1, "exact")
    assert r_matrix(P, P, 1).data.tolist() == [[q(1), q(1)], [q(0), q(0)]]
    a, beta = q(2), q(9)
    r = r_matrix(emb(a).rep, emb(beta).rep, 1)
    assert r.data.tolist() == [[1, 1], [a, beta]]
    A = layered([[1, 2, 3], [4, 5, 6], [7, 8, 10]], 3, 1, 1, "exact")
    B = layered([[11, 12, 13], [14, 15, 16], [17, 18, 20]], 3, 1, 1, "exact")
    cols = r_matrix(A, B, 2).data[0].tolist()
    assert cols == [q(3), q(12), q(13)]


def test_transversality_is_determinant_test():
    for a, beta in [(0, 0), (0, 4), (2, 2), (2, -1)]:
        pi = proj(a)
        assert is_transversal(pi.amplify(1), emb(beta)) == (beta != a)
        assert in_resolvent_set(pi, emb(beta)) == (beta != a)
    assert not is_transversal(layered([[0, 1], [1, 0]], 2, 1, 1, "exact"), frame_point(1, [[0, 1], [1, 0]]))


def test_transversality_is_representative_independent(rng):
    pi = S.projective(rng, 1, 3, 2, "exact")
    for _ in range(10):
        sigma = S.point(rng, 1, 3, 2, 2, "exact")
        moved = GrassPoint(1, sigma.rep @ S.h_element(rng, 1, 3, 2, 2, "exact"))
        A2 = pi.amplify(2) @ S.h_element(rng, 2, 3, 2, 2, "exact")
        assert is_transversal(pi.amplify(2), sigma) == is_transversal(A2, moved)


def test_diagonal_levels():
    pi = proj(3)
    assert in_resolvent_set(pi, emb(1, 2))
    assert not in_resolvent_set(pi, emb(1, 3))
    assert not in_resolvent_set(pi, emb(3, 2))


def test_subalgebra_guard():
    pi = ProjectivePoint(1, layered(np.eye(4, dtype=int)[[2, 3, 0, 1]], 2, 1, 2, "exact"))
    sigma = affine_embed(layered([[1, 2], [0, 1]], 1, 1, 2, "exact"))
    with pytest.raises(NotInSubalgebra):
        in_resolvent_set(pi, sigma, SubalgebraSpec.scalars())
    scalar_sigma = affine_embed(layered([[2, 0], [0, 2]], 1, 1, 2, "exact"))
    assert in_resolvent_set(pi, scalar_sigma, SubalgebraSpec.scalars())


def test_resolvent_values():
    assert grass_resolvent(proj(1), emb(3), 1, 1).value.data.tolist() == [[q("1/2")]]
    assert grass_resolvent(proj(0), emb(1), 1, 1).value.data.tolist() == [[q(1)]]
    with pytest.raises(NotTransversal):
        grass_resolvent(proj(2), emb(2), 1, 1)


def test_resolvent_value_rebuilds_from_zeta():
    v = grass_resolvent(proj(1), emb(3), 1, 1)
    assert v.zeta.data.tolist() == [[q("1/2")]]
    assert (v.v, v.u) == (1, 1)


def test_resolvent_is_representative_independent(rng):
    pi = S.projective(rng, 2, 4, 1, "exact")
    sigma = S.resolvent_point(rng, pi, 2, 2, "exact")
    moved = GrassPoint(2, sigma.rep @ S.h_element(rng, 2, 4, 2, 1, "exact"))
    pi2 = ProjectivePoint(2, pi.rep @ S.h_element(rng, 2, 4, 1, 1, "exact"))
    for v in (1, 2):
        for u in (1, 2):
            a = grass_resolvent(pi, sigma, v, u).value.data
            b = grass_resolvent(pi2, moved, v, u).value.data
            assert (a == b).all()


def test_amplification_consistency(rng):
    pi = S.projective(rng, 1, 3, 2, "exact")
    a, b = S.resolvent_point(rng, pi, 1, 1, "exact"), S.resolvent_point(rng, pi, 1, 2, "exact")
    joined = grass_resolvent(pi, direct_sum(a, b), 1, 2).value
    parts = interleaved_direct_sum(grass_resolvent(pi, a, 1, 2).value, grass_resolvent(pi, b, 1, 2).value)
    assert (joined.data == parts.data).all()


def test_resolvent_equation_hand_example():
    assert resolvent_equation_residual(proj(0), emb(1), emb(2), 1, 1, 1, 1, one(1)) == 0.0
    assert resolvent_equation_residual(proj(0), emb(1), emb(2), 1, 1, 1, 1, one(0)) == 0.0


def test_resolvent_equation_random_float(rng):
    pi = S.projective(rng, 2, 3, 2, "float")
    for s in (1,):
        for t in (1, 2):
            for v in (1, 2):
                sigma = S.resolvent_point(rng, pi, 2, 2, "float")
                sigma2 = S.resolvent_point(rng, pi, 2, 1, "float")
                X = S.coupling(rng, 2, 1, 2, "float")
                assert resolvent_equation_residual(pi, sigma, sigma2, s, t, v, 1, X) < 1e-9


def test_resolvent_equation_needs_resolvent_set():
    with pytest.raises(NotTransversal):
        resolvent_equation_residual(proj(0), emb(0), emb(2), 1, 1, 1, 1, one(1))


def flag_pair():
    sig = FlagSignature((1, 2), 3)
    pi = flag_affine_embed({(1, 1): scalar_block([[q(1)]]), (2, 1): scalar_block([[q(0)]]),
                            (2, 2): scalar_block([[q(2)]])}, sig.dual(), 1, 1, "exact")
    phi = flag_affine_embed({(1, 1): scalar_block([[q(3)]]), (2, 1): scalar_block([[q(5)]]),
                             (2, 2): scalar_block([[q(-1)]])}, sig, 1, 1, "exact")
    return sig, pi, phi


def hand_det(pi, phi, j):
    sig = phi.sig
    d = sig.d(j)
    A, B = E.to_complex(pi.rep.data), E.to_complex(phi.rep.data)
    return np.linalg.det(np.hstack([A[:, d:], B[:, 3 - d:]]))


def test_flag_resolvent_set_by_determinants():
    sig, pi, phi = flag_pair()
    dets = [hand_det(pi, phi, j) for j in (1, 2)]
    assert all(abs(x) > 1e-9 for x in dets)
    assert flag_resolvent_set(pi, phi)
    # break the j = 1 transversality: last column of phi inside the span pi feeds in
    A = pi.rep.data
    data = np.array(phi.rep.data)
    data[:, 2] = A[:, 1] + A[:, 2]
    broken = FlagPoint(sig, LayeredMatrix(data, 3, 1, 1))
    assert abs(hand_det(pi, broken, 1)) < 1e-12
    assert not flag_resolvent_set(pi, broken)


def test_flag_resolvent_signature_guard():
    sig = FlagSignature((1, 2), 4)
    phi = FlagPoint(sig, layered(np.eye(4, dtype=int), 4, 1, 1, "exact"))
    with pytest.raises(SignatureMismatch):
        flag_resolvent_set(phi, phi)


def test_single_flag_resolvent_matches_grassmannian():
    sig = FlagSignature((1,), 2)
    pi = FlagPoint(sig.dual(), proj(1).rep)
    phi = FlagPoint(sig, emb(3).rep)
    assert flag_resolvent(pi, phi, 1, 1, 1).value.data.tolist() == [[q("1/2")]]
    assert in_resolvent_set(projected_pi(pi, 1), flag_project(phi, 1)) == flag_resolvent_set(pi, phi)


def test_flag_resolvent_goes_through_projection():
    sig, pi, phi = flag_pair()
    for j, width in ((1, 1), (2, 1)):
        for u in range(1, 3 - sig.d(j) + 1):
            direct = flag_resolvent(pi, phi, j, width, u).value.data
            via = grass_resolvent(projected_pi(pi, j), flag_project(phi, j), sig.d(j - 1) + width, u).value.data
            assert (direct == via).all()


def test_flag_equation_exact(rng):
    sig = FlagSignature((1, 3), 4)
    pi = S.flag_projective(rng, sig, 1, "exact")
    phi = S.flag_resolvent_point(rng, pi, sig, 1, "exact")
    phi2 = S.flag_resolvent_point(rng, pi, sig, 2, "exact")
    X = S.coupling(rng, 1, 2, 1, "exact")
    for j in (1, 2):
        width = sig.d(j) - sig.d(j - 1)
        for t in range(1, width + 1):
            assert flag_resolvent_equation_residual(pi, phi, phi2, j, 1, t, 1, 1, X) == 0.0


def test_partial_converse_scalar_examples():
    report = partial_converse_check([[0]], [[1]], [[[1]], [[2]], [[-3]]], [[1]])
    assert report.passed and report.constancy_residual == 0.0
    report = partial_converse_check([[1]], [[2]], [[[1]], [[3]], [[-2]]], [[3]])
    assert report.passed
    # c(beta) = (2 beta - 1)^{-1}, so c^{-1}(beta) - 2 beta = -1
    for beta in (1, 3, -2):
        c = E.mpq(1) / (2 * beta - 1)
        assert 1 / c - 2 * beta == -1


def test_partial_converse_random_2x2(rng):
    a = S.scalars(rng, (2, 2), "exact", complex_rate=0.0)
    b = S.unimodular(rng, 2)
    samples = []
    while len(samples) < 10:
        n = int(rng.integers(1, 3))
        beta = S.scalars(rng, (2 * n, 2 * n), "exact")
        shifted = beta.dot(np.kron(E.eye(n), b)) - np.kron(E.eye(n), a)
        if E.inverse(shifted)[0] is not None:
            samples.append(beta)
    report = partial_converse_check(a, b, samples, samples[0], rng=rng)
    assert report.passed
    assert report.dd_residual == report.constancy_residual == report.resolvent_residual == 0.0


def test_partial_converse_guards():
    with pytest.raises(NotInvertible):
        partial_converse_check([[1]], [[0]], [[[1]]], [[1]])
    with pytest.raises(NotInvertible):
        partial_converse_check([[2]], [[2]], [[[1]]], [[2]])

import numpy as np
import pytest

from ncgrass import _exact as E
from ncgrass import sampling as S
from ncgrass.algebra import LayeredMatrix, identity, layered, zeros
from ncgrass.errors import AdmissibilityError, DomainError, StructureError, WitnessRequired
from ncgrass.grassmann import FlagSignature, direct_sum, flag_project, similarity
from ncgrass.ncfunc import (
    EVERYWHERE,
    HOLDS,
    VACUOUS,
    VIOLATED,
    DomainPredicate,
    NcFunctionHandle,
    ScalingPolicy,
    Verdict,
    check_direct_sum,
    check_intertwining,
    check_similarity,
    dd_apply,
    dd_flag_apply,
    digest,
    envelope_extend,
    first_order_difference_check,
    intertwining_hypothesis,
)
from ncgrass.resolvent import (
    flag_component_function,
    resolvent_function,
)

from conftest import emb, proj, q


def one(x, mode="exact"):
    return layered([[x]], 1, 1, 1, mode)


def zero_function(d=1, m=2, k=1):
    return NcFunctionHandle(lambda p: zeros(1, p.n, k, p.mode), EVERYWHERE, d, m, k, k, name="zero")


def noisy(f):
    return NcFunctionHandle(lambda p: f(p) + identity(1, p.n, f.k_target, p.mode).scale(p.n - 1),
                            f.domain, f.d, f.m, f.k_source, f.k_target, name="noisy")


def resolvent_at_zero():
    return resolvent_function(proj(0), 1, 1, 1)


def test_direct_sum_law():
    assert check_direct_sum(zero_function(), emb(1), emb(2))
    f = resolvent_at_zero()
    assert check_direct_sum(f, emb(1), emb(2, 3))
    assert not check_direct_sum(noisy(f), emb(1), emb(2))


def test_direct_sum_law_on_random_resolvents(rng):
    for mode in ("exact", "float"):
        pi = S.projective(rng, 2, 3, 2, mode)
        f = resolvent_function(pi, 2, 2, 1)
        a, b = S.resolvent_point(rng, pi, 2, 1, mode), S.resolvent_point(rng, pi, 2, 2, mode)
        assert check_direct_sum(f, a, b)


def test_similarity_law(rng):
    f = resolvent_at_zero()
    assert check_similarity(f, emb(1, 2), np.eye(2, dtype=int))
    pi = S.projective(rng, 1, 3, 2, "exact")
    g = resolvent_function(pi, 1, 1, 2)
    sigma = S.resolvent_point(rng, pi, 1, 2, "exact")
    assert check_similarity(g, sigma, S.invertible(rng, 2, "exact"))


def test_swap_similarity_conjugates_resolvent_values():
    f = resolvent_at_zero()
    sigma = emb(2, 5)
    swap = np.array([[0, 1], [1, 0]])
    moved = f(similarity(swap, sigma)).data
    base = f(sigma).data
    assert moved.tolist() == base[::-1, ::-1].tolist()
    assert moved[0, 0] == q("1/5") and moved[1, 1] == q("1/2")


def test_intertwining_examples():
    f = resolvent_at_zero()
    sigma = emb(3)
    assert check_intertwining(f, sigma, sigma, [[1]]) == HOLDS
    # affine criterion X T = T X'
    assert intertwining_hypothesis(emb(2), emb(2), [[1]])
    assert not intertwining_hypothesis(emb(1), emb(2), [[1]])
    assert check_intertwining(f, emb(1), emb(2), [[1]]) == VACUOUS


def test_intertwining_detects_corruption():
    f = resolvent_at_zero()
    bad = NcFunctionHandle(lambda p: f(p) + identity(1, p.n, 1, p.mode).scale(p.n), f.domain, 1, 2, 1, 1)
    a, b = emb(1), emb(2)
    T = E.exact_array([[1], [0]])
    assert check_intertwining(f, direct_sum(a, b), a, T) == HOLDS
    assert check_intertwining(bad, direct_sum(a, b), a, T) == VIOLATED


def test_intertwining_needs_domain():
    f = resolvent_at_zero()
    with pytest.raises(DomainError):
        check_intertwining(f, emb(0), emb(1), [[1]])


def test_dd_examples():
    f = resolvent_at_zero()
    value = dd_apply(f, emb(1), emb(2), 1, 1, one(1))
    assert value.data.tolist() == [[q("-1/2")]]
    assert dd_apply(f, emb(1), emb(2), 1, 1, one(0)).data.tolist() == [[0]]


def test_dd_homogeneity(rng):
    for mode in ("exact", "float"):
        pi = S.projective(rng, 1, 3, 2, mode)
        f = resolvent_function(pi, 1, 1, 1)
        a, b = S.resolvent_point(rng, pi, 1, 2, mode), S.resolvent_point(rng, pi, 1, 1, mode)
        X = S.coupling(rng, 2, 1, 2, mode)
        policy = ScalingPolicy.default(mode)
        double = dd_apply(f, a, b, 2, 1, X.scale(2), policy)
        single = dd_apply(f, a, b, 2, 1, X, policy)
        if mode == "exact":
            assert (double.data == single.scale(2).data).all()
        else:
            assert np.max(np.abs(double.data - 2 * single.data)) < 1e-9


def test_dd_ladder_scales_into_small_domains():
    # a domain of "small" points: the pinch only fits after scaling X down
    f = resolvent_at_zero()

    def small(p):
        return f.contains(p) and np.max(np.abs(E.to_complex(p.rep.data))) <= 4

    g = NcFunctionHandle(f.evaluator, DomainPredicate(small), 1, 2, 1, 1)
    X = one(1.0, "float")
    value = dd_apply(g, emb(1, mode="float"), emb(2, mode="float"), 1, 1, X.scale(64))
    assert value.data[0, 0] == pytest.approx(-32.0)


def test_dd_errors():
    f = resolvent_at_zero()
    never_pinched = NcFunctionHandle(f.evaluator, DomainPredicate(lambda p: p.n == 1 and f.contains(p)), 1, 2, 1, 1)
    with pytest.raises(AdmissibilityError):
        dd_apply(never_pinched, emb(1), emb(2), 1, 1, one(1))
    with pytest.raises(StructureError):
        dd_apply(noisy(f), emb(1), emb(2), 1, 1, one(1))
    with pytest.raises(DomainError):
        dd_apply(f, emb(0), emb(2), 1, 1, one(1))


def test_dd_flag_reduces_to_grassmannian(rng):
    sig = FlagSignature((1,), 2)
    pi = S.flag_projective(rng, sig, 1, "exact")
    phi = S.flag_resolvent_point(rng, pi, sig, 1, "exact")
    phi2 = S.flag_resolvent_point(rng, pi, sig, 1, "exact")
    f = flag_component_function(pi, sig, 1, 1, 1)
    X = S.coupling(rng, 1, 1, 1, "exact")
    a = dd_flag_apply(f, phi, phi2, 1, 1, 1, X)
    b = dd_apply(f, flag_project(phi, 1), flag_project(phi2, 1), 1, 1, X)
    assert (a.data == b.data).all()


def test_dd_flag_zero_coupling(rng):
    sig = FlagSignature((1, 2), 3)
    pi = S.flag_projective(rng, sig, 1, "exact")
    phi = S.flag_resolvent_point(rng, pi, sig, 1, "exact")
    f = flag_component_function(pi, sig, 1, 1, 1)
    zero = LayeredMatrix(E.zeros((1, 1)), 1, 1, 1)
    assert all(x == 0 for x in dd_flag_apply(f, phi, phi, 1, 1, 1, zero).data.flat)


def test_first_order_examples():
    f = resolvent_at_zero()
    assert first_order_difference_check(f, emb(1), 1, 1, one(0)) == 0.0
    assert first_order_difference_check(f, emb(1), 1, 1, one(q("1/2"))) == 0.0


def test_first_order_random(rng):
    for d, m in [(1, 3), (2, 3)]:
        pi = S.projective(rng, d, m, 1, "float")
        f = resolvent_function(pi, d, 1, 1)
        sigma = S.resolvent_point(rng, pi, d, 2, "float")
        X = S.coupling(rng, 2, 2, 1, "float").scale(0.1)
        assert first_order_difference_check(f, sigma, 1, 1, X) < 1e-9


def test_first_order_needs_unscaled_pinch():
    f = resolvent_at_zero()
    with pytest.raises(DomainError):
        # the shift lands on embed(0), outside the resolvent set
        first_order_difference_check(f, emb(1), 1, 1, one(1))


def test_envelope(rng):
    f = resolvent_at_zero()
    hat = envelope_extend(f)
    sigma = emb(2, 3)
    assert (hat(sigma, (np.eye(2, dtype=int), sigma)).data == f(sigma).data).all()
    s1, s2 = S.invertible(rng, 2, "exact"), S.invertible(rng, 2, "exact")
    target = similarity(s1, sigma)
    s2_inv = E.inverse(s2)[0]
    # second witness: target = (s1 s2^{-1}) . (s2 . sigma)
    other = similarity(s2, sigma)
    a = hat(target, (s1, sigma))
    b = hat(target, (s1.dot(s2_inv), other))
    assert (a.data == b.data).all()
    # resolvent sets are similarity closed, so the base already covers target
    assert (hat(target).data == a.data).all()


def test_envelope_needs_witness_outside_domain():
    base = resolvent_at_zero()
    narrow = NcFunctionHandle(base.evaluator, DomainPredicate(lambda p: p.n == 1 and base.contains(p)), 1, 2, 1, 1)
    hat = envelope_extend(narrow)
    with pytest.raises(WitnessRequired):
        hat(emb(1, 2))
    with pytest.raises(DomainError):
        hat(emb(1), (np.eye(1, dtype=int), emb(2)))


def test_handle_guards():
    f = resolvent_at_zero()
    with pytest.raises(DomainError):
        f(emb(0))
    ungraded = NcFunctionHandle(lambda p: zeros(1, 1, 1, p.mode), EVERYWHERE, 1, 2, 1, 1)
    with pytest.raises(StructureError):
        ungraded(emb(1, 2))


def test_verdict_record():
    v = Verdict("direct-sum", digest(emb(1), emb(2)), HOLDS, 0.0, seed=7)
    assert v.as_dict() == {"check": "direct-sum", "inputs-digest": v.inputs_digest,
                           "verdict": "holds", "residual": 0.0, "seed": 7}
    assert digest(emb(1)) == digest(emb(1)) != digest(emb(2))

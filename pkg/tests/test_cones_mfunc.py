import random

import pytest

from desk import desk, field
from shintani.cones import Chain, PerturbedCone, build_signed_domain, domain_sum, verify_signed_domain, xi_evaluate
from shintani.mfunc import IdealCombination, apply_phi, delta_ST, smoothed_indicator_identity_check


def _rand(K, rng, a=9):
    return K.from_basis([rng.randint(-a, a), rng.randint(-a, a)])


def test_boundary_squares_to_zero():
    K = field(5)
    rng = random.Random(0)
    c = Chain(K)
    for _ in range(5):
        c = c + Chain.symbol(K, [_rand(K, rng) for _ in range(3)], coeff=rng.randint(-2, 2))
    assert c.boundary().boundary().is_zero()


def test_twisted_action_is_an_action():
    K = field(3)
    rng = random.Random(1)
    c = Chain.symbol(K, [K(1), K.from_basis([2, 1])], grade=(1, 1), places=(0, 1))
    for _ in range(10):
        x, y = _rand(K, rng), _rand(K, rng)
        if x and y:
            assert c.act(x).act(y) == c.act(x * y)


def test_perturbed_cone_half_open():
    K = field(5)
    eps = K.totally_positive_units[0]
    C = PerturbedCone((K(1), eps), 0, 1)
    assert C.s in (1, -1)
    assert C.value(K(1) + eps) == C.s
    assert C.value(K(-1)) == 0
    # exactly one of the two boundary rays is kept
    assert abs(C.value(K(1))) + abs(C.value(eps)) == 1
    assert PerturbedCone((K(1), K(2)), 0, 1).s == 0


@pytest.mark.parametrize("d", [3, 5])
@pytest.mark.parametrize("v,e", [(0, 1), (1, -1)])
def test_signed_domain_covers_once(d, v, e):
    K = field(d)
    dom = build_signed_domain(K)
    assert verify_signed_domain(dom, samples=40, rng=random.Random(d), v=v, e=e)["passed"]
    eps = K.totally_positive_units[0]
    x = K.from_basis([3, 1])
    assert x.is_totally_positive()
    assert domain_sum(dom, v, e, x) == domain_sum(dom, v, e, x * eps)


def test_domain_chain_evaluates_on_translates():
    K = field(3)
    dom = build_signed_domain(K)
    rng = random.Random(2)
    for _ in range(10):
        y = K.from_basis([rng.randint(1, 20), rng.randint(-5, 5)])
        if y.is_totally_positive():
            assert domain_sum(dom, 0, 1, y) == 1
    assert isinstance(xi_evaluate(0, 1, dom.chain.drop_grades(), K(1)), int)


def test_delta_expansion_size():
    d = desk("sqrt3_P13")
    delta = delta_ST(d.K, d.places.S_f, d.places.T)
    assert len(delta.terms) == 4
    # coefficients: 1, -1 (from S), -N(q), N(q) (from T)
    assert sorted(delta.terms.values()) == sorted([1, -1, -11, 11])


def test_smoothed_indicator_identity():
    d = desk("sqrt5_P11")
    K = d.K
    rng = random.Random(4)
    a = K.primes_above(29)[0].ideal
    for _ in range(60):
        x = _rand(K, rng, 40) * a.inverse().basis()[0]
        if x:
            assert smoothed_indicator_identity_check(a, x, d.places.S_f, d.places.T)


def test_phi_translation_by_totally_positive_unit():
    K = field(5)
    eps = K.totally_positive_units[0]
    chain = Chain.symbol(K, [K(1), eps])
    f = apply_phi(0, 1, chain, IdealCombination.single(K.unit_ideal))
    g = f.translate(K(3))
    rng = random.Random(5)
    for _ in range(40):
        y = _rand(K, rng)
        assert g(y * 3) == f(y)

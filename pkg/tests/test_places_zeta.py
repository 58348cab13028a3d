import random
from fractions import Fraction

import pytest

from desk import desk, field
from shintani.places import InfPlace, LevelJ, NGroup, NotCoprimeToS, PlaceSet
from shintani.zeta import B1, B2, cone_coset_value, ray_partial_zetas, theta_oracle, value_of


def test_C1_holds_on_desk_instances():
    for name in ["sqrt5_P5", "sqrt3_P3", "sqrt5_P11", "sqrt3_P13"]:
        assert desk(name).places.check_C1()["passed"]


def test_C1_failures_are_reported():
    K = field(3)
    P13, P13b = K.primes_above(13)
    rep = PlaceSet(K, [P13], [P13b], [InfPlace(0), InfPlace(1)]).check_C1()
    assert not rep["passed"]
    assert not rep["V_not_containing_S_inf"] and not rep["S_T_characteristics_disjoint"]
    # a single degree one prime of norm 2 < n + 2 does not satisfy the T condition
    P2 = K.primes_above(2)[0]
    assert not PlaceSet(K, [P13], [P2], [P13]).check_C1()["T_degree_one"]


def test_N_group_law_and_diagonal():
    d = desk("sqrt5_P5")
    N, K = d.N, d.K
    rng = random.Random(0)
    for _ in range(15):
        x = K.from_basis([rng.randint(-20, 20), rng.randint(-20, 20)])
        y = K.from_basis([rng.randint(-20, 20), rng.randint(-20, 20)])
        if not (x and y):
            continue
        assert N.diag(x * y) == N.diag(x) * N.diag(y)
        assert (N.diag(x) * N.diag(x).inverse()).is_identity()
        assert N.diag(x) ** 3 == N.diag(x * x * x)


def test_global_with_local_realises_components():
    d = desk("sqrt5_P5")
    N = d.N
    P = d.places.S_f[0]
    for u in N.local_unit_classes(P)[:6]:
        for s in (1, -1):
            comps = {P: (1, u[1]), InfPlace(1): s}
            alpha = N.global_with_local(comps)
            assert N.local_class(P, alpha) == (1, u[1])
            assert d.K.sign_at(alpha, 1) == s


def test_iota_requires_coprime_ideal():
    d = desk("sqrt3_P13")
    with pytest.raises(NotCoprimeToS):
        d.N.iota(d.places.S_f[0].ideal)


def test_level_zero_component_is_valuation_only():
    K = field(3)
    P13 = K.primes_above(13)[0]
    N = NGroup(PlaceSet(K, [P13], [], [P13]), LevelJ({P13: 0}, (True, True)))
    assert N.local_unit_classes(P13) == [(0, ())]
    assert N.local_class(P13, K(13)) == (1, ())


def test_bernoulli_polynomials():
    assert B1(Fraction(1, 3)) == Fraction(-1, 6)
    assert B2(Fraction(0)) == Fraction(1, 6)
    assert B2(Fraction(1, 2)) == Fraction(-1, 12)


def test_narrow_partial_zetas_of_sqrt3():
    # zeta(0, C) - zeta(0, C') = L(0, chi_-4) L(0, chi_-3) = 1/2 * 1/3 and the sum is zeta_F(0) = 0
    _, _, z = ray_partial_zetas(field(3), {})
    assert sorted(z.values()) == [Fraction(-1, 12), Fraction(1, 12)]


def test_partial_zetas_sum_to_zero():
    K = field(5)
    _, _, z = ray_partial_zetas(K, {K.primes_above(11)[0]: 1})
    assert sum(z.values()) == 0


def test_cone_value_independent_of_coset_representative():
    K = field(5)
    eps = K.totally_positive_units[0]
    L = K.primes_above(11)[0].ideal
    z0 = K.from_basis([2, 1])
    base = cone_coset_value((K(1), eps), (True, False), z0, L, [0, 1])
    b1, b2 = L.basis()
    for k1, k2 in [(1, 0), (0, -2), (3, 5)]:
        moved = cone_coset_value((K(1), eps), (True, False), z0 + b1 * k1 + b2 * k2, L, [0, 1])
        assert value_of(moved, [0, 1]) == value_of(base, [0, 1])


@pytest.mark.parametrize("name", ["sqrt3_P13", "sqrt5_P11"])
def test_stickelberger_oracle_integral_with_zero_augmentation(name):
    d = desk(name)
    th = theta_oracle(d.target, d.places)
    assert th.element.is_integral()
    assert th.element.augmentation() == 0

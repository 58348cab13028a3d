import random

import pytest

from desk import desk, field
from shintani.groups import (
    FinAbGroup,
    GroupRingElt,
    RayClassStructure,
    augmentation_product_membership,
    expand_certificate,
)


def test_group_basics():
    G = FinAbGroup([2, 4])
    assert G.order == 8 and len(G.elements()) == 8
    assert G.element_order((1, 1)) == 4
    assert len(G.subgroup([(0, 2)])) == 2
    assert len(G.all_subgroups()) == 8


def test_group_ring_arithmetic():
    G = FinAbGroup([3])
    g = GroupRingElt.basis(G, (1,))
    one = GroupRingElt.basis(G, (0,))
    assert g * g * g == one
    assert (g - one).augmentation() == 0
    norm = one + g + g * g
    assert norm * (g - one) == GroupRingElt(G)


def test_augmentation_powers_for_order_two():
    # for G = Z/2, I^2 = 2I: [g]-1 lies in I but not in I^2, 2([g]-1) lies in I^2
    G = FinAbGroup([2])
    x = GroupRingElt.basis(G, (1,)) - GroupRingElt.basis(G, (0,))
    assert augmentation_product_membership(x, [[(1,)]]) is not None
    assert augmentation_product_membership(x, [[(1,)], [(1,)]]) is None
    cert = augmentation_product_membership(x * 2, [[(1,)], [(1,)]])
    assert cert is not None and expand_certificate(G, cert) == x * 2
    assert augmentation_product_membership(GroupRingElt.basis(G, (0,)), [[(1,)]]) is None


def test_membership_certificates_expand():
    rng = random.Random(3)
    G = FinAbGroup([2, 2])
    for _ in range(20):
        base = GroupRingElt(G, {g: rng.randint(-3, 3) for g in G.elements()})
        x = base * (GroupRingElt.basis(G, (1, 0)) - GroupRingElt.basis(G, (0, 0)))
        cert = augmentation_product_membership(x, [[(1, 0)]])
        assert cert is not None and expand_certificate(G, cert) == x


@pytest.mark.parametrize("d,p,m,order", [
    # narrow class numbers: Q(sqrt 3) has h+ = 2, Q(sqrt 5) has h+ = 1
    (3, None, 0, 2),
    (5, None, 0, 1),
    # (O/P3)^x (+)^2 has order 8, global units -1, 2+sqrt3 have image of order 4
    (3, 3, 1, 2),
    # (O/P11)^x (+)^2 has order 40, global units -1, (1+sqrt5)/2 have image of order 20
    (5, 11, 1, 2),
])
def test_ray_class_group_orders(d, p, m, order):
    K = field(d)
    modulus = {K.primes_above(p)[0]: m} if p else {}
    R = RayClassStructure(K, modulus, (True, True))
    assert R.group.order == order == R.expected_order


def test_artin_map_is_multiplicative():
    K = field(5)
    R = RayClassStructure(K, {K.primes_above(11)[0]: 1}, (True, True))
    primes = [P for P in K.primes_up_to(60) if P.p != 11]
    for P in primes[:6]:
        for Q in primes[:6]:
            assert R.artin(P.ideal * Q.ideal) == R.group.add(R.artin(P.ideal), R.artin(Q.ideal))
    # principal ideals with a totally positive generator congruent to 1 are trivial
    for a in (12, 23, 34):
        assert R.artin(K.ideal(K(a))) == R.group.zero


def test_frobenius_at_split_prime():
    d = desk("sqrt3_P13")
    # P13 has a totally positive generator so its Frobenius in the narrow HCF is trivial
    assert d.target.frobenius(d.places.S_f[0]) == d.target.group.zero
    assert d.target.frobenius(d.K.primes_above(11)[0]) != d.target.group.zero

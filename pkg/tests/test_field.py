from fractions import Fraction

import pytest

from desk import field
from shintani.field import NumberField, Reducible, kronecker
from shintani.linalg import det, hnf, left_kernel, matmul, snf


def test_arithmetic_and_norms():
    K = field(5)
    x = K.from_basis([3, 2])
    assert x * x.inverse() == K(1)
    assert K.norm(x * x) == K.norm(x) ** 2
    assert K.trace(x + x.conjugate()) == 2 * K.trace(x)
    assert K.norm(x) == x * x.conjugate()


def test_reducible_polynomial_rejected():
    with pytest.raises(Reducible):
        NumberField([1, 0, -4])


@pytest.mark.parametrize("d", [3, 5])
def test_units(d):
    K = field(d)
    (eps,) = K.totally_positive_units
    assert eps.is_totally_positive()
    assert K.norm(eps) == 1 and K.is_integral(eps) and K.is_integral(eps.inverse())
    assert K.class_number == 1


@pytest.mark.parametrize("d,p", [(5, 11), (5, 7), (5, 5), (3, 11), (3, 13), (3, 3), (3, 2)])
def test_prime_decomposition_matches_kronecker(d, p):
    K = field(d)
    primes = K.primes_above(p)
    assert sum(P.e * P.f for P in primes) == 2
    disc = int(K.discriminant)
    expected = {1: 2, -1: 1, 0: 1}[kronecker(disc, p)]
    assert len(primes) == expected
    prod = K.unit_ideal
    for P in primes:
        prod = prod * P.ideal ** P.e
    assert prod == K.ideal(K(p))


def test_ideal_factorisation_and_valuation():
    K = field(3)
    P, Q = K.primes_above(11)[0], K.primes_above(13)[0]
    I = P.ideal ** 2 * Q.ideal
    assert I.factor() == {P: 2, Q: 1}
    assert I.norm() == 11 ** 2 * 13
    assert (I * I.inverse()) == K.unit_ideal
    assert I.inverse().valuation(P) == -2


@pytest.mark.parametrize("gen", [[7, 3], [11, -4], [1, 9]])
def test_reduced_basis_spans_same_lattice(gen):
    K = field(3)
    I = K.ideal(K.from_basis(gen)) * K.ideal(K(5))
    b, r = I.basis(), I.reduced_basis()
    assert abs(K.det(r)) == abs(K.det(b))
    assert all(I.contains(x) for x in r)
    assert max(abs(K.trace(x * x)) for x in r) <= max(abs(K.trace(x * x)) for x in b)


def test_totally_positive_generator():
    K = field(3)
    P13 = K.primes_above(13)[0]
    g = K.totally_positive_generator(P13.ideal)
    assert g is not None and g.is_totally_positive() and K.ideal(g) == P13.ideal
    # primes above 11 are principal but have no totally positive generator
    assert K.totally_positive_generator(K.primes_above(11)[0].ideal) is None


def test_linear_algebra():
    A = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    diag, U, V = snf(A)
    assert diag == [2, 6, 12]
    D = matmul(matmul(U, A), V)
    assert all(D[i][j] == (diag[i] if i == j else 0) for i in range(3) for j in range(3))
    assert abs(det(U)) == 1 and abs(det(V)) == 1
    assert hnf([[2, 0], [0, 3], [4, 3]]) == [[2, 0], [0, 3]]
    for k in left_kernel([[1, 2], [2, 4], [3, 6]]):
        assert [sum(k[i] * r[j] for i, r in enumerate([[1, 2], [2, 4], [3, 6]])) for j in range(2)] == [0, 0]
    assert det([[Fraction(1, 2), 1], [1, 4]]) == 1

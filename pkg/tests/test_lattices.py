import random

import pytest
import sympy

from shintani.groups import FinAbGroup, GroupRingElt
from shintani.lattices import (
    P_map,
    Qbar_map,
    Wedge,
    ZGLattice,
    _mul_group_ring,
    char_value,
    characters,
    group_ring_det,
    lambda_filter,
    star_module_basis,
)


def test_character_orthogonality():
    G = FinAbGroup([2, 3])
    for chi in characters(G):
        s = sympy.nsimplify(sympy.expand(sum(char_value(G, chi, g) for g in G.elements())))
        assert s == (G.order if not any(chi) else 0)


def test_group_ring_det_of_diagonal():
    G = FinAbGroup([3])
    g = GroupRingElt.basis(G, (1,))
    one = GroupRingElt.basis(G, (0,))
    assert group_ring_det([[g, one * 0], [one * 0, g]], G) == g * g
    assert group_ring_det([[one, g], [g, one]], G) == one - g * g


def test_lattice_action_validated():
    G = FinAbGroup([2])
    with pytest.raises(ValueError):
        ZGLattice(G, {(0,): [[1]], (1,): [[2]]})
    with pytest.raises(ValueError):
        ZGLattice(G, {(0,): [[1, 0], [0, 1]], (1,): [[1, 1], [0, 1]]})


def test_P_then_Qbar_is_identity():
    rng = random.Random(5)
    G = FinAbGroup([2, 2])
    M = ZGLattice.random(G, rng, 4)
    for _ in range(5):
        w = Wedge.pure(M, [tuple(rng.randint(-2, 2) for _ in range(M.d)) for _ in range(2 if M.d > 1 else 1)])
        assert Qbar_map(P_map(w)) == w


def test_lambda_filter_kills_trivial_isotypic_part():
    G = FinAbGroup([2])
    M = ZGLattice.regular(G)
    full = star_module_basis(M, 1)
    assert lambda_filter(M, 1, lambda chi: 1) == full
    kept = lambda_filter(M, 1, lambda chi: 2 if not any(chi) else 1)
    assert full and 0 < len(kept) < len(full)
    norm = GroupRingElt(G, {(0,): 1, (1,): 1})
    for t in kept:
        assert _mul_group_ring(t, norm).is_zero()

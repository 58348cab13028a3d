import random
from functools import lru_cache

import pytest

from desk import desk, field
from shintani.datum import (
    SubsetIndex,
    compute_Q,
    narrow_class_reps,
    solve_compatible_system,
    theta_group_ring,
    vanishing_certificate,
    verify_system,
    zeta_values,
)
from shintani.places import InfPlace, project_to_quotient
from shintani.rubin_stark import (
    SplitnessViolated,
    c_bar_J,
    check_cJ_kills_IHD,
    direct_tensor,
    enhanced_regulator,
    epsilon_an,
    random_regulator_terms,
    regulator_G,
)
from shintani.zeta import theta_oracle

NAME = "sqrt3_P13"  # finite v1, the cheapest instance


@lru_cache(maxsize=None)
def theta():
    return desk(NAME).theta()


@lru_cache(maxsize=None)
def system():
    return solve_compatible_system(theta(), 0, 1, desk(NAME).K.totally_positive_units)


def test_subset_signs():
    idx = SubsetIndex(["a", "b", "c"])
    assert idx.c({"b", "c"}, {"a", "b", "c"}) == 1
    assert idx.c({"a", "c"}, {"a", "b", "c"}) == -1
    assert idx.c({"a"}, {"b", "c"}) == 0
    assert len(idx.subsets(2)) == 3


def test_narrow_reps_one_per_class_and_coprime():
    K = field(3)
    avoid = K.primes_above(13) + K.primes_above(11)
    for seed in (0, 5):
        narrow, reps = narrow_class_reps(K, avoid, seed)
        assert sorted(reps) == sorted(narrow.group.elements())
        for c, I in reps.items():
            assert narrow.artin(I) == c and I.is_coprime_to(avoid)


def test_theta_matches_oracle():
    d = desk(NAME)
    _, total = theta_group_ring(d.target, theta(), 0, 1)
    assert total == theta_oracle(d.target, d.places).element


def test_zeta_values_are_integral():
    for x in theta().per_class.values():
        for _a, z in zeta_values(0, 1, x):
            assert z.is_integral()


def test_vanishing_certificate_case_for_finite_place():
    d = desk(NAME)
    case, cert = vanishing_certificate(theta(), d.v1, d.K.totally_positive_units)
    assert case == 1 and cert


def test_compatible_system_and_Q():
    d = desk(NAME)
    sysm = system()
    assert all(verify_system(sysm).values())
    Q = compute_Q(sysm)
    assert project_to_quotient(Q, d.places.V).is_zero()
    assert d.target.rec_ring(Q) == theta_oracle(d.target, d.places).element


def test_perturbation_inside_V_is_rejected():
    d = desk("sqrt5_P11")
    with pytest.raises(ValueError):
        solve_compatible_system(d.theta(), 0, 1, d.K.totally_positive_units)


def test_epsilon_valuations_sum_to_zero():
    d = desk(NAME)
    eps = epsilon_an(compute_Q(system()), d.target, d.v1)
    vals = [eps.component(g) for g in d.target.group.elements()]
    assert sum(c[0] for c in vals if c) == 0


def test_enhanced_regulator_identities():
    d = desk(NAME)
    rng = random.Random(11)
    for _ in range(3):
        terms = random_regulator_terms(d.N, rng)
        R = enhanced_regulator(d.N, terms)
        assert c_bar_J(R, d.target, d.v1) == direct_tensor(d.N, d.target, terms)
        assert d.target.rec_ring(R) == regulator_G(d.target, terms)


def test_cJ_kills_IHD():
    d = desk(NAME)
    assert check_cJ_kills_IHD(d.target, d.v1, random.Random(2), 8)


def test_cJ_requires_split_place():
    d = desk(NAME)
    # the narrow Hilbert class field of Q(sqrt 3) is ramified at the real places
    with pytest.raises(SplitnessViolated):
        c_bar_J(compute_Q(system()), d.target, InfPlace(0))

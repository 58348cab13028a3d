"""Acceptance criteria 1-11; each test prints one PASS/FAIL line."""
from __future__ import annotations

import random
import time
from fractions import Fraction
from functools import lru_cache

import mpmath

from desk import desk, desk_no_T
from shintani.cli import main as cli_main
from shintani.cones import build_signed_domain, cocycle_check, verify_signed_domain
from shintani.datum import (
    compute_Q,
    solve_compatible_system,
    theta_group_ring,
    vanishing_certificate_ring,
    zeta_values,
)
from shintani.galois import GaloisTarget
from shintani.groups import FinAbGroup, GroupRingElt
from shintani.lattices import P_map, Qbar_map, R_map, Tensor, Wedge, ZGLattice, in_wedge0, in_wedge0_brute
from shintani.places import is_infinite, project_to_quotient
from shintani.rubin_stark import epsilon_an
from shintani.zeta import cone_coset_value, oracle_cone_coset_value, theta_oracle, value_numeric

INSTANCES = ["sqrt5_P5", "sqrt3_P3", "sqrt5_P11", "sqrt3_P13"]


@lru_cache(maxsize=None)
def theta_of(name: str, seed: int = 0):
    return desk(name).theta(seed)


def perturbation(d):
    """First infinite place outside V."""
    return next(k for k in range(d.K.n) if not any(is_infinite(u) and u.index == k for u in d.places.V))


@lru_cache(maxsize=None)
def q_of(name: str, seed: int = 0):
    d = desk(name)
    v = perturbation(d)
    sysm = solve_compatible_system(theta_of(name, seed), v, 1, d.K.totally_positive_units)
    return compute_Q(sysm)


def fields_K(d):
    """The listed K in Upsilon(J): the ray class field of J and F itself."""
    full = d.target
    trivial = GaloisTarget(d.N, list(full.ray.group.elements()))
    return [full, trivial]


def test_criterion_01_dual_pipeline(criterion):
    worst = 0.0
    ok = True
    for name in INSTANCES:
        t = time.perf_counter()
        d = desk(name)
        th = theta_of(name)
        per, total = theta_group_ring(d.target, th, perturbation(d), 1)
        oracle = theta_oracle(d.target, d.places)
        ok &= total == oracle.element
        ok &= set(per) == set(oracle.per_class) and all(per[C] == z for C, z in oracle.per_class.items())
        ok &= d.target.group.order <= 8
        worst = max(worst, time.perf_counter() - t)
    ok &= worst < 60
    criterion(1, ok, f"{len(INSTANCES)} instances, cone Theta == oracle per class and total; slowest {worst:.1f}s")


def test_criterion_02_integrality(criterion):
    count = 0
    ok = True
    for name in INSTANCES:
        d = desk(name)
        v = perturbation(d)
        for x in theta_of(name).per_class.values():
            for _a, z in zeta_values(v, 1, x):
                ok &= z.is_integral()
                count += len(z.values)
    d0 = desk_no_T("sqrt3_P3")
    th0 = d0.theta()
    nonint = [z for x in th0.per_class.values() for _a, z in zeta_values(perturbation(d0), 1, x) if not z.is_integral()]
    criterion(2, ok and count > 0, f"{count} values integral; T = empty control has {len(nonint)} non-integral blocks")


def test_criterion_03_ve_independence(criterion):
    details = []
    ok = True
    for name in ["sqrt5_P5", "sqrt3_P13"]:
        d = desk(name)
        assert not any(is_infinite(u) for u in d.places.V)
        th = theta_of(name)
        vals = {(v, e): theta_group_ring(d.target, th, v, e)[1] for v in (0, 1) for e in (1, -1)}
        ok &= len({repr(sorted(z.coeffs.items())) for z in vals.values()}) == 1
        details.append(f"{name}: 4 choices agree")
    criterion(3, ok, "; ".join(details))


def test_criterion_04_order_of_vanishing(criterion):
    found = 0
    refused = 0
    ok = True
    for name in INSTANCES:
        d = desk(name)
        for tg in fields_K(d):
            x = theta_oracle(tg, d.places).element
            cert = vanishing_certificate_ring(tg, x, d.places.V)
            ok &= cert is not None
            found += cert is not None
        # corrupted control: Theta + [1] has augmentation 1, so it is never in the ideal
        tg = d.target
        bad = theta_oracle(tg, d.places).element + GroupRingElt(tg.group, {tg.group.zero: 1})
        if vanishing_certificate_ring(tg, bad, d.places.V) is None:
            refused += 1
        else:
            ok = False
    criterion(4, ok, f"{found} certificates re-expanded; {refused} corrupted controls refused")


def test_criterion_05_Q_well_defined(criterion):
    ok = True
    details = []
    for name in ["sqrt3_P13", "sqrt5_P11"]:
        d = desk(name)
        e0 = epsilon_an(q_of(name, 0), d.target, d.v1)
        e1 = epsilon_an(q_of(name, 7), d.target, d.v1)
        reps_differ = theta_of(name, 0).reps != theta_of(name, 7).reps
        ok &= e0 == e1
        details.append(f"{name} ({'finite' if not is_infinite(d.v1) else 'infinite'} v1, reps differ: {reps_differ})")
    criterion(5, ok, "c_J(Q) agrees for seeds 0 and 7: " + ", ".join(details))


def test_criterion_06_Q_correctness(criterion):
    ok = True
    checked = 0
    for name in INSTANCES:
        d = desk(name)
        Q = q_of(name)
        ok &= project_to_quotient(Q, d.places.V).is_zero()
        for tg in fields_K(d):
            ok &= tg.rec_ring(Q) == theta_oracle(tg, d.places).element
            checked += 1
    criterion(6, ok, f"rec(Q) == Theta_K for {checked} (instance, K) pairs; horizontal boundary of Q is 0")


def test_criterion_07_cocycle(criterion):
    rng = random.Random(7)
    failures = 0
    n = 1000
    for i in range(n):
        K = desk("sqrt5_P5").K if i % 2 else desk("sqrt3_P3").K
        v, e, s = rng.randint(0, 1), rng.choice([1, -1]), rng.choice([1, -1])
        xs = []
        while len(xs) < 3:
            x = K.from_basis([rng.randint(-9, 9), rng.randint(-9, 9)])
            if x and K.sign_at(x, v) == s:
                xs.append(x)
        if rng.random() < 0.5:
            y = K.from_basis([rng.randint(-9, 9), rng.randint(-9, 9)])
        else:
            # points on faces of the cones
            y = xs[rng.randint(0, 2)] * rng.randint(1, 3) + xs[rng.randint(0, 2)] * rng.randint(0, 2)
        failures += not cocycle_check(v, e, xs, y)
    criterion(7, failures == 0, f"{n} tuples, {failures} failures")


def test_criterion_08_signed_domain(criterion):
    res = []
    for d in (5, 3):
        K = desk("sqrt5_P5" if d == 5 else "sqrt3_P3").K
        r = verify_signed_domain(build_signed_domain(K), samples=500, rng=random.Random(d))
        res.append(r)
    ok = all(r["passed"] and r["samples"] >= 500 and r["boundary_witness_terms"] > 0 for r in res)
    criterion(8, ok, f"covering identity on {sum(r['samples'] for r in res)} samples; Z_E+ boundary witnesses found")


def test_criterion_09_P_Q_isomorphism(criterion):
    rng = random.Random(1)
    ok = True
    for _ in range(100):
        G = FinAbGroup(rng.choice([[1], [2], [3], [2, 2], [4], [5], [6]]))
        M = ZGLattice.random(G, rng, 4)
        r = rng.randint(1, min(3, M.d))
        w = Wedge.pure(M, [tuple(rng.randint(-2, 2) for _ in range(M.d)) for _ in range(r)])
        Pw = P_map(w)
        ok &= Pw.is_star() and Qbar_map(Pw) == w
        x = R_map(Tensor.pure(M, [tuple(rng.randint(-1, 1) for _ in range(M.d)) for _ in range(r)],
                              rng.choice(G.elements())))
        ok &= x.is_star() and P_map(Qbar_map(x)) == x
    agree = 0
    members = 0
    for _ in range(24):
        G = FinAbGroup(rng.choice([[1], [2], [3], [2, 2]]))
        M = ZGLattice.random(G, rng, 3)
        r = rng.randint(1, min(2, M.d))
        w = Wedge.pure(M, [tuple(rng.randint(-2, 2) for _ in range(M.d)) for _ in range(r)],
                       Fraction(1, rng.choice([1, 2, 3, 4, 6])))
        a = in_wedge0(w)
        agree += a == in_wedge0_brute(w, rng)
        members += a
    ok &= agree == 24
    criterion(9, ok, f"100 lattices round-trip exactly; wedge_0 criterion agrees with brute force {agree}/24 ({members} members)")


def test_criterion_10_shintani_formula(criterion):
    rng = random.Random(10)
    cells = 0
    worst = mpmath.mpf(0)
    stable = True
    while cells < 25:
        K = desk("sqrt5_P5").K if cells % 2 else desk("sqrt3_P3").K
        eps = K.totally_positive_units[0]
        w1 = K.from_basis([rng.randint(1, 4), rng.randint(0, 3)])
        w2 = w1 * eps if rng.random() < 0.5 else K.from_basis([rng.randint(1, 3), rng.randint(0, 2)])
        if K.det([w1, w2]) == 0 or any(K.sign_at(w, p) < 0 for w in (w1, w2) for p in (0, 1)):
            continue
        L = K.ideal(K(rng.choice([1, 2, 3]))) * K.ideal(K.from_basis([rng.randint(1, 3), 1]))
        z0 = K.from_basis([rng.randint(0, 3), rng.randint(0, 3)])
        flags = (rng.random() < 0.5, rng.random() < 0.5)
        places = rng.choice([[0, 1], [0], [1]])
        exact = cone_coset_value((w1, w2), flags, z0, L, places)
        numeric, _ = oracle_cone_coset_value((w1, w2), flags, z0, L, places)
        worst = max(worst, abs(value_numeric(exact, places, 40) - numeric))
        # a different representative of the same coset
        b1, b2 = L.basis()
        moved = cone_coset_value((w1, w2), flags, z0 + b1 * rng.randint(-3, 3) + b2 * rng.randint(-3, 3), L, places)
        stable &= moved == exact
        cells += 1
    criterion(10, worst < 1e-8 and stable, f"{cells} cells, max |exact - oracle| = {mpmath.nstr(worst, 3)}; coset change exact")


def test_criterion_11_rubin_stark(criterion, tmp_path):
    import json
    from pathlib import Path

    root = Path(__file__).resolve().parent.parent / "configs"
    lines = []
    ok = True
    for cfg in ("flagship_infinite.yaml", "flagship_finite.yaml"):
        out = tmp_path / (cfg + ".json")
        t = time.perf_counter()
        code = cli_main(["check-rubin-stark", "--config", str(root / cfg), "--precision", "40", "--report", str(out)])
        el = time.perf_counter() - t
        rep = json.loads(out.read_text())
        cmp = rep["comparisons"][0] if rep["comparisons"] else {"name": "none", "passed": False}
        lines.append(f"{cfg}: {cmp['name']} {'pass' if cmp['passed'] else 'FAIL'} (exit {code}, {el:.0f}s)")
        ok &= code == 0 and el < 600
    criterion(11, ok, "; ".join(lines))

"""Localized Rubin-Stark elements for r = 1: c_J, the analytic element and numeric Stark data."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

import mpmath

from .field import FieldElement, NumberField, Prime
from .galois import GaloisTarget
from .groups import GroupRingElt
from .places import LevelJ, NGroup, NGroupRingElt, PlaceSet, is_infinite


class SplitnessViolated(ValueError):
    pass


class PrecisionInsufficient(ArithmeticError):
    pass


class NoLatticeSolution(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# N_v (x) Z[Gal(H/F)]


class LocalTensor:
    """Element of N_v^{(J)} (x) Z[Gal(H/F)], stored as sigma -> component of N_v."""

    def __init__(self, N: NGroup, v, group, comps=None):
        self.N = N
        self.v = v
        self.group = group
        one = N.trivial_component(v)
        self.comps = {g: c for g, c in (comps or {}).items() if c != one}

    def add_term(self, g, comp, n: int):
        N, v = self.N, self.v
        c = comp if n >= 0 else N._inv_comp(v, comp)
        acc = self.comps.get(g, N.trivial_component(v))
        for _ in range(abs(n)):
            acc = N._mul_comp(v, acc, c)
        if acc == N.trivial_component(v):
            self.comps.pop(g, None)
        else:
            self.comps[g] = acc

    def component(self, g):
        return self.comps.get(g, self.N.trivial_component(self.v))

    def __eq__(self, other):
        return isinstance(other, LocalTensor) and self.comps == other.comps

    def is_zero(self) -> bool:
        return not self.comps

    def to_json(self) -> dict:
        return {str(list(g)): _comp_json(c) for g, c in sorted(self.comps.items())}

    def __repr__(self):
        return "LocalTensor(" + ", ".join(f"{c}(x)[{g}]" for g, c in sorted(self.comps.items())) + ")"


def _comp_json(c):
    if isinstance(c, tuple):
        return {"valuation": c[0], "unit_class": list(c[1])}
    return c


def check_split(target: GaloisTarget, v) -> None:
    if len(target.decomposition_group(v)) != 1:
        raise SplitnessViolated(f"{v} does not split completely in H")


def c_bar_J(z: NGroupRingElt, target: GaloisTarget, v) -> LocalTensor:
    """sum n_x [x] -> sum n_x p_v(x^{-1}) (x) [rec(x)^{-1}].

    rec_ring sends [x] to [rec(x)^{-1}], i.e. it is the plain extension of rec
    applied after the involution [x] -> [x^{-1}] of Z[N_F]; c-bar_J is applied
    after the same involution so that both sides use one normalisation.
    """
    check_split(target, v)
    N = z.G
    out = LocalTensor(N, v, target.group)
    for x, n in z.coeffs.items():
        if getattr(n, "denominator", 1) != 1:
            raise ValueError("c_J needs an integral group ring element")
        g = target.group.neg(target.rec(x))
        out.add_term(g, N.component(N.inv(x), v), int(n))
    return out


def check_cJ_kills_IHD(target: GaloisTarget, v, rng: random.Random, samples: int = 20) -> bool:
    """c-bar_J([g]([k]-1)([eta]-1)) = 0 for k in ker(rec_H), eta in N_v, g in N_F."""
    N = target.N
    K = N.K
    primes = [P for P in K.primes_up_to(60) if P not in N.places.S_f]
    kernel_ideals = []
    for P in primes:
        for e in range(1, 5):
            I = P.ideal ** e
            if target.artin(I) == target.group.zero:
                kernel_ideals.append(I)
                break
    locals_v = [N.make({v: c}) for c in N.local_unit_classes(v)]
    if not is_infinite(v):
        locals_v.append(N.make({v: (1, N.trivial_component(v)[1])}))
    for _ in range(samples):
        k = N.make(away=rng.choice(kernel_ideals)) if kernel_ideals else N.identity
        eta = rng.choice(locals_v)
        g = N.make({u: rng.choice(N.local_unit_classes(u)) for u in N.S if is_infinite(u) or N.res[u] is not None},
                   away=rng.choice(primes).ideal)
        gens = [(g * k * eta, 1), (g * eta, -1), (g * k, -1), (g, 1)]
        z = NGroupRingElt(N, {})
        for x, c in gens:
            z = z + NGroupRingElt.basis(x) * c
        if not c_bar_J(z, target, v).is_zero():
            return False
    return True


# ---------------------------------------------------------------------------
# characters, conductors and L'(0, chi)


def character_values(target: GaloisTarget, chi) -> dict:
    """chi as a map Gal -> complex root of unity; ``chi`` is a tuple of exponents."""
    G = target.group
    out = {}
    for g in G.elements():
        t = sum(mpmath.mpf(a * x) / d for a, x, d in zip(chi, g, G.invariants))
        out[g] = mpmath.expjpi(2 * t)
    return out


def _chi_trivial_on(vals, g) -> bool:
    return abs(vals[g] - 1) < mpmath.mpf(10) ** (-10)


def conductor_exponent(target: GaloisTarget, chi, P: Prime) -> int:
    """Smallest k with chi trivial on the image of totally positive x = 1 mod* P^k."""
    N = target.N
    R = N.res[P]
    if R is None:
        return 0
    m = N.level.m.get(P, 1)
    vals = character_values(target, chi)
    for k in range(m + 1):
        Pk = P.ideal ** k
        ok = True
        for u in R.units:
            x = R.element(u)
            if k and not Pk.contains(x - 1):
                continue
            comps = {P: (0, u)}
            for i in range(N.K.n):
                if N.level.flag(i):
                    comps[_inf(N, i)] = 1
            alpha = N.global_with_local(comps)
            g = target.artin(N.strip_S(N.K.ideal(alpha)))
            if not _chi_trivial_on(vals, g):
                ok = False
                break
        if ok:
            return k
    return m


def _inf(N: NGroup, i: int):
    for v in N.S:
        if is_infinite(v) and v.index == i:
            return v
    raise KeyError(i)


def parity_at(target: GaloisTarget, chi, k: int) -> int:
    """0 if chi is even at the k-th real place, 1 if odd."""
    vals = character_values(target, chi)
    N = target.N
    if not N.level.flag(k):
        return 0
    g = target.rec(N.make({_inf(N, k): -1}))
    return 0 if _chi_trivial_on(vals, g) else 1


def dirichlet_coefficients(target: GaloisTarget, chi, conductor: dict, X: int) -> list:
    """a_n = sum over integral ideals of norm n prime to the conductor of chi(ideal)."""
    K = target.K
    vals = character_values(target, chi)
    a = [mpmath.mpc(0)] * (X + 1)
    a[1] = mpmath.mpc(1)
    for P in K.primes_up_to(X):
        q = P.norm
        if q > X:
            continue
        if conductor.get(P, 0) > 0:
            continue
        if P in target.ray.modulus_exps:
            raise NotImplementedError("imprimitive prime inside the modulus")
        c = vals[target.artin(P.ideal)]
        new = list(a)
        for n in range(1, X + 1):
            if a[n] == 0:
                continue
            qk, ck = q, c
            while n * qk <= X:
                new[n * qk] += a[n] * ck
                qk *= q
                ck *= c
        a = new
    return a


@dataclass
class LSeriesData:
    value: object  # L'(0, chi) of the primitive character
    root_number: int
    A: object
    terms: int
    t_check: object


def l_derivative_at_zero(target: GaloisTarget, chi, dps: int = 40) -> LSeriesData:
    """L'(0, chi) for a real quadratic F and chi even at exactly one real place.

    Lambda(s) = A^s Gamma(s) L(s, chi) with A = sqrt(d_F N f)/(2 pi) satisfies
    Lambda(s) = W Lambda(1-s); the root number W is fixed by requiring the
    smoothed expansion to be independent of the splitting parameter t.
    """
    K = target.K
    if K.n != 2:
        raise NotImplementedError("L-series numerics need a real quadratic field")
    par = [parity_at(target, chi, k) for k in range(2)]
    if sorted(par) != [0, 1]:
        raise NotImplementedError("gamma factor implemented for one even and one odd real place")
    cond = {P: conductor_exponent(target, chi, P) for P in target.ray.modulus_exps}
    Nf = 1
    for P, k in cond.items():
        Nf *= P.norm ** k
    with mpmath.workdps(dps + 15):
        A = mpmath.sqrt(abs(K.discriminant) * Nf) / (2 * mpmath.pi)
        t_lo, t_hi = mpmath.mpf("0.8"), mpmath.mpf("1.25")
        X = int(A * (dps + 15) * mpmath.log(10) / t_lo) + 10
        a = dirichlet_coefficients(target, chi, cond, X)
        if all(abs(mpmath.im(c)) < mpmath.mpf(10) ** (-dps) for c in a):
            a = [mpmath.re(c) for c in a]

        def halves(s, t):
            first = second = 0
            for n in range(1, X + 1):
                if a[n] == 0:
                    continue
                first += a[n] * (A / n) ** s * mpmath.gammainc(s, n * t / A)
                second += mpmath.conj(a[n]) * (A / n) ** (1 - s) * mpmath.gammainc(1 - s, n / (t * A))
            return first, second

        s0 = mpmath.mpf("0.3")
        f1, g1 = halves(s0, t_lo)
        f2, g2 = halves(s0, t_hi)
        W, resid = min(((w, abs((f1 + w * g1) - (f2 + w * g2))) for w in (1, -1)), key=lambda p: p[1])
        if resid > mpmath.mpf(10) ** (-(dps - 5)):
            raise PrecisionInsufficient(f"functional equation check failed ({mpmath.nstr(resid, 5)})")
        val = _lam0(a, A, X, W)
    return LSeriesData(val, W, A, X, resid)


def _lam0(a, A, X, W):
    tot = mpmath.mpc(0)
    for n in range(1, X + 1):
        if a[n] == 0:
            continue
        tot += a[n] * mpmath.e1(n / A) + W * mpmath.conj(a[n]) * (A / n) * mpmath.exp(-n / A)
    return tot


def euler_modification(target: GaloisTarget, chi, cond: dict, places: PlaceSet):
    """prod_{P in S_f, P not dividing f}(1 - chi(P)) prod_{Q in T}(1 - chi(Q) N Q) at s = 0."""
    vals = character_values(target, chi)
    out = mpmath.mpc(1)
    for P in places.S_f:
        if cond.get(P, 0) == 0:
            raise NotImplementedError("S_f prime outside the conductor")
    for Q in places.T:
        out *= 1 - vals[target.artin(Q.ideal)] * Q.norm
    return out


# ---------------------------------------------------------------------------
# the Stark unit for a quadratic H/F in which one real place splits


@dataclass
class StarkUnit:
    t: FieldElement  # u + u^{-1}, an element of F
    log_abs: object  # -log|u|_{w_1}
    sign_w1: int
    residual: object
    checks: dict = field(default_factory=dict)


def stark_unit_quadratic(target: GaloisTarget, places: PlaceSet, v, dps: int = 40) -> StarkUnit:
    """Recognize u with -log|u^sigma|_{w_1} = zeta'_{S,T}(0, sigma) for Gal(H/F) of order 2."""
    G = target.group
    if G.order != 2:
        raise NotImplementedError("Stark unit recognition is implemented for quadratic H/F")
    check_split(target, v)
    K = target.K
    chi = (1,)
    Ldat = l_derivative_at_zero(target, chi, dps)
    cond = {P: conductor_exponent(target, chi, P) for P in target.ray.modulus_exps}
    with mpmath.workdps(dps + 15):
        LST = Ldat.value * euler_modification(target, chi, cond, places)
        if abs(mpmath.im(LST)) > mpmath.mpf(10) ** (-dps):
            raise PrecisionInsufficient("L'(0, chi) is not real")
        # zeta'(0, 1) = L'_{S,T}(0, chi) / 2 since the trivial character vanishes to order 2
        ell = mpmath.re(LST) / 2
        absu = mpmath.exp(-ell)
        k1 = v.index
        k2 = 1 - k1
        eps = mpmath.mpf(10) ** (-(dps // 2))
        found = []
        Q = places.T[0] if places.T else None
        for sgn in (1, -1):
            t1 = sgn * (absu + 1 / absu)
            w1 = K.embed(K.from_basis([0, 1]), k1, dps + 10)
            w2 = K.embed(K.from_basis([0, 1]), k2, dps + 10)
            lo = (t1 - 2 - 1) / (w1 - w2)
            hi = (t1 + 2 + 1) / (w1 - w2)
            lo, hi = min(lo, hi), max(lo, hi)
            for b in range(int(mpmath.floor(lo)), int(mpmath.ceil(hi)) + 1):
                a0 = t1 - b * w1
                a = int(mpmath.nint(a0))
                if abs(a0 - a) > eps:
                    continue
                t = K.from_basis([a, b])
                if abs(K.embed(t, k2, dps)) > 2:
                    continue
                found.append((sgn, t))
        if not found:
            raise NoLatticeSolution("no integral t = u + 1/u matches the L-value")
        # the T-condition u = 1 mod T picks the sign: t = 2 mod Q
        good = [(s, t) for s, t in found if Q is None or Q.ideal.contains(t - 2)]
        if len(good) != 1:
            raise NoLatticeSolution(f"T-condition does not single out a unit: {found}")
        sgn, t = good[0]
        t1 = K.embed(t, k1, dps + 10)
        roots = [(t1 + e * mpmath.sqrt(t1 * t1 - 4)) / 2 for e in (1, -1)]
        residual = min(abs(-mpmath.log(abs(u1)) - ell) for u1 in roots)
    checks = {
        "disc_sign_w1": K.sign_at(t * t - 4, k1) > 0,
        "disc_sign_other": K.sign_at(t * t - 4, k2) < 0,
        "splitting_matches_artin": _splitting_matches(target, t),
        "root_number": Ldat.root_number,
        "fe_residual": mpmath.nstr(Ldat.t_check, 5),
    }
    return StarkUnit(t, ell, sgn, residual, checks)


def _splitting_matches(target: GaloisTarget, t: FieldElement, bound: int = 80) -> bool:
    """Primes split in F(sqrt(t^2 - 4)) exactly when their Artin symbol is trivial."""
    K = target.K
    disc = t * t - 4
    bad = set(target.ray.modulus_exps)
    checked = 0
    for P in K.primes_up_to(bound):
        if P in bad or P.p == 2 or K.ideal(disc).valuation(P) != 0:
            continue
        sq = _is_square_mod(K, disc, P)
        triv = target.artin(P.ideal) == target.group.zero
        if sq != triv:
            return False
        checked += 1
    return checked > 0


def _is_square_mod(K: NumberField, x: FieldElement, P: Prime) -> bool:
    from .field import Residues

    R = Residues(P.ideal)
    r = R.reduce(x)
    e = (P.norm - 1) // 2
    return R.pow(r, e) == R.one


# ---------------------------------------------------------------------------
# the analytic element and the comparisons


@dataclass
class Comparison:
    name: str
    expected: dict
    got: dict
    passed: bool


def epsilon_an(Q: NGroupRingElt, target_H: GaloisTarget, v) -> LocalTensor:
    return c_bar_J(Q, target_H, v)


def compare_sign_component(eps_an: LocalTensor, unit: StarkUnit, group) -> Comparison:
    """loc(epsilon) at w_1: u^sigma = u^{+-1} share the sign of u at w_1."""
    expected = {str(list(g)): unit.sign_w1 for g in group.elements()}
    got = {str(list(g)): eps_an.component(g) for g in group.elements()}
    return Comparison("sign component at the split real place", expected, got, expected == got)


def valuation_prediction(K: NumberField, places: PlaceSet, v: Prime, target_H: GaloisTarget) -> GroupRingElt:
    """ord_{w}(u^sigma) = coefficients of Theta_{H, S - v, T}(0), computed by the ray class oracle."""
    from .zeta import theta_oracle

    S2 = [P for P in places.S_f if P != v]
    pl2 = PlaceSet(K, S2, list(places.T), [])
    N2 = NGroup(pl2, LevelJ({P: target_H.N.level.m.get(P, 1) for P in S2}, target_H.N.level.positive))
    same_modulus = N2.level.m == {P: m for P, m in target_H.N.level.m.items() if P != v}
    if target_H.kernel and set(target_H.ray.modulus_exps) != set(GaloisTarget(N2).ray.modulus_exps):
        raise NotImplementedError("H given by a kernel in a different ray class group")
    tg2 = GaloisTarget(N2, target_H.kernel)
    if not same_modulus or tg2.group.invariants != target_H.group.invariants:
        raise ValueError("H must be unramified at the removed place")
    return theta_oracle(tg2, pl2).element


def compare_valuation_component(eps_an: LocalTensor, prediction: GroupRingElt) -> Comparison:
    G = prediction.G
    expected = {str(list(g)): prediction.coeffs.get(g, 0) for g in G.elements()}
    expected = {k: int(c) if getattr(c, "denominator", 1) == 1 else c for k, c in expected.items()}
    got = {str(list(g)): eps_an.component(g)[0] for g in G.elements()}
    return Comparison("valuation component at the split finite place", expected, got, expected == got)


def precision_doubling(target: GaloisTarget, places: PlaceSet, v, dps: int = 40) -> dict:
    """Recognize the Stark unit at dps and 2 dps; the residual must shrink and t must agree."""
    lo = stark_unit_quadratic(target, places, v, dps)
    hi = stark_unit_quadratic(target, places, v, 2 * dps)
    return {
        "residual": mpmath.nstr(lo.residual, 5),
        "residual_doubled": mpmath.nstr(hi.residual, 5),
        "same_unit": lo.t == hi.t,
        "passed": lo.t == hi.t and hi.residual < max(lo.residual, mpmath.mpf(10) ** (-dps)),
    }


# ---------------------------------------------------------------------------
# the enhanced regulator R-hat at a fixed level J


def enhanced_regulator(N: NGroup, terms) -> NGroupRingElt:
    """R-hat on sum coeff * (eta_1 (x) ... (x) eta_r (x) [sigma-bar]).

    terms: iterable of (coeff, sigma_bar: NElement, etas) where etas[j] is a
    local class at V[j].  Each term maps to [sigma-bar] prod_j ([eta_j] - [1]),
    written through the involution [x] -> [x^{-1}] used by rec_ring and c_bar_J.
    """
    V = N.places.V
    out = NGroupRingElt(N, {})
    for coeff, sigma_bar, etas in terms:
        if len(etas) != len(V):
            raise ValueError("one local class per place of V is required")
        z = NGroupRingElt.basis(N.inv(sigma_bar))
        for v, eta in zip(V, etas):
            x = N.inv(N.make({v: eta}))
            z = z * (NGroupRingElt.basis(x) - NGroupRingElt.basis(N.identity))
        out = out + z * coeff
    return out


def direct_tensor(N: NGroup, target: GaloisTarget, terms) -> LocalTensor:
    """sum coeff * eta (x) [rec(sigma-bar)] for r = 1, the inverse of R-hat under c_J."""
    (v,) = N.places.V
    out = LocalTensor(N, v, target.group)
    for coeff, sigma_bar, (eta,) in terms:
        out.add_term(target.rec(sigma_bar), eta, coeff)
    return out


def regulator_G(target_K: GaloisTarget, terms) -> GroupRingElt:
    """R_G: [tau] prod_j ([f_j(eta_j)] - [1]) with tau = rec(sigma-bar), in rec_ring normalisation."""
    N = target_K.N
    Gk = target_K.group
    out = GroupRingElt(Gk, {})
    for coeff, sigma_bar, etas in terms:
        z = GroupRingElt(Gk, {target_K.rec(sigma_bar): 1})
        for v, eta in zip(N.places.V, etas):
            f = target_K.rec(N.make({v: eta}))
            z = z * (GroupRingElt(Gk, {f: 1}) - GroupRingElt(Gk, {Gk.zero: 1}))
        out = out + z * coeff
    return out


def random_regulator_terms(N: NGroup, rng: random.Random, count: int = 3, sigma_places=None):
    """Random r = 1 inputs: local classes at V[0] and sigma-bar trivial at V[0]."""
    (v,) = N.places.V
    K = N.K
    primes = [P for P in K.primes_up_to(40) if P not in N.places.S_f]
    locals_v = list(N.local_unit_classes(v))
    if not is_infinite(v):
        unit = N.trivial_component(v)[1]
        locals_v += [(k, unit) for k in (1, -1, 2)]
    terms = []
    for _ in range(count):
        eta = rng.choice(locals_v)
        comps = {u: rng.choice(N.local_unit_classes(u)) for u in N.S
                 if u != v and (is_infinite(u) or N.res[u] is not None)}
        sigma_bar = N.make(comps, away=rng.choice(primes).ideal)
        terms.append((rng.randint(-3, 3) or 1, sigma_bar, (eta,)))
    return terms

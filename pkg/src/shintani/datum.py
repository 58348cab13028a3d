"""Subset complexes, the module B in normal form, the element theta and the element Q (r = 1)."""
from __future__ import annotations

import itertools
import random

from .cones import Chain, homology_witness
from .field import FieldElement, FracIdeal, NumberField
from .galois import class_representatives
from .groups import GroupRingElt, RayClassStructure, augmentation_product_membership
from .groups import expand_certificate as expand_ring_certificate
from .mfunc import IdealCombination, MFunction, apply_phi, delta_ST
from .places import NGroup, NGroupRingElt, PlaceSet, is_infinite, project_to_quotient, section
from .zeta import zeta_f


class RepresentativeSearchFailed(RuntimeError):
    pass


class WitnessSearchFailed(RuntimeError):
    pass


class VerificationFailed(AssertionError):
    pass


class DMembershipFailed(AssertionError):
    pass


# ---------------------------------------------------------------------------
# subsets of V and the horizontal boundary


class SubsetIndex:
    def __init__(self, V):
        self.V = list(V)
        self.pos = {v: i for i, v in enumerate(self.V)}

    def ordered(self, W) -> list:
        return sorted(W, key=lambda v: self.pos[v])

    def c(self, W1, W2) -> int:
        W2s = self.ordered(W2)
        W1 = frozenset(W1)
        for i, w in enumerate(W2s):
            if frozenset(W2s[:i] + W2s[i + 1:]) == W1:
                return (-1) ** i
        return 0

    def subsets(self, k: int) -> list[frozenset]:
        return [frozenset(c) for c in itertools.combinations(self.V, k)]


def horizontal_boundary(index: SubsetIndex, x: dict, restrict, zero) -> dict:
    """d(x) = sum_{U} c(U, W) r_U^W(x_W) for x = {W: x_W}."""
    out: dict = {}
    for W, xw in x.items():
        for w in W:
            U = frozenset(W - {w})
            c = index.c(U, W)
            term = restrict(xw, W, U)
            term = term if c == 1 else -term
            out[U] = out[U] + term if U in out else term
    return {U: v for U, v in out.items() if v != zero(U)}


# ---------------------------------------------------------------------------
# B(W) with the F^x-marker moved to 1


class Context:
    """Arithmetic data shared by the B-elements and the L-maps of one run."""

    def __init__(self, places: PlaceSet, G: NGroup):
        self.places = places
        self.G = G
        self.K: NumberField = places.K
        self.V = list(places.V)
        self.index = SubsetIndex(self.V)
        self.T_all = list(places.T) + list(places.T_prime)

    def w_bar(self, W) -> list:
        W = set(W)
        return [v for v in self.places.S if v in W or v not in self.V]

    def grade_places(self, W) -> tuple:
        return tuple(v.index for v in self.w_bar(W) if is_infinite(v))

    def in_F_T(self, y: FieldElement) -> bool:
        I = self.K.ideal(y)
        return all(I.valuation(P) == 0 for P in self.T_all)

    def iota(self, a: FracIdeal) -> FracIdeal:
        return self.G.strip_S(a)


class BElement:
    """Element of B(W): sum over (ideal b of the A-part, ideal of N^S) of chains in K_{W-bar}."""

    __slots__ = ("ctx", "W", "terms")

    def __init__(self, ctx: Context, W, terms=None):
        self.ctx = ctx
        self.W = frozenset(W)
        places = ctx.grade_places(self.W)
        d: dict = {}
        for key, ch in (terms or {}).items():
            if ch.places != places:
                raise ValueError(f"chain graded at {ch.places}, expected {places}")
            d[key] = d[key] + ch if key in d else ch
        self.terms = {k: c for k, c in d.items() if not c.is_zero()}

    def zero_like(self, W=None) -> "BElement":
        return BElement(self.ctx, self.W if W is None else W)

    def __add__(self, other):
        self._check(other)
        d = dict(self.terms)
        for k, c in other.terms.items():
            d[k] = d[k] + c if k in d else c
        return BElement(self.ctx, self.W, d)

    def __neg__(self):
        return BElement(self.ctx, self.W, {k: c * -1 for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, n: int):
        return BElement(self.ctx, self.W, {k: c * n for k, c in self.terms.items()})

    __rmul__ = __mul__

    def _check(self, other):
        if self.W != other.W:
            raise ValueError("B-elements over different subsets")

    def act(self, y: FieldElement) -> "BElement":
        """y (a (x) b (x) 1) = y^{-1} a (x) i^S(y) b (x) 1 for y in F_(T)."""
        ctx = self.ctx
        if not ctx.in_F_T(y):
            raise ValueError("acting element is not prime to T'")
        yinv = y.inverse()
        shift = ctx.iota(ctx.K.ideal(y))
        d = {}
        for (b, a), ch in self.terms.items():
            key = (b * yinv, a * shift)
            nc = ch.act(yinv, twisted=True)
            d[key] = d[key] + nc if key in d else nc
        return BElement(ctx, self.W, d)

    def restrict(self, U) -> "BElement":
        places = self.ctx.grade_places(U)
        return BElement(self.ctx, U, {k: ch.drop_grades(places) for k, ch in self.terms.items()})

    def normal_form(self) -> dict:
        """Chains are compared in C_n / ker d_n through their boundaries."""
        out = {}
        for k, ch in self.terms.items():
            b = ch.boundary()
            if not b.is_zero():
                out[k] = b.terms
        return out

    def is_zero(self) -> bool:
        return not self.normal_form()

    def __eq__(self, other):
        return isinstance(other, BElement) and self.W == other.W and (self - other).is_zero()

    def __repr__(self):
        parts = [f"({ch!r}) (x) {b.short()} (x) {a.short()}" for (b, a), ch in self.terms.items()]
        return f"B[{sorted(str(v) for v in self.W)}](" + " + ".join(parts) + ")"


def expand_certificate(cert, target: BElement) -> BElement:
    """sum_k (y_k - 1) m_k."""
    total = target.zero_like()
    for y, m in cert:
        total = total + m.act(y) - m
    return total


# ---------------------------------------------------------------------------
# the L-maps


def zeta_values(v: int, e: int, x: BElement):
    """(a, zeta_f) for each away ideal a of x, with f = phi_{v,e} of the terms over a."""
    ctx = x.ctx
    by_away: dict = {}
    for (b, a), ch in x.terms.items():
        by_away.setdefault(a, []).append((b, ch))
    for a, items in sorted(by_away.items(), key=lambda kv: (kv[0].norm(), kv[0].rows, kv[0].den)):
        f = MFunction(ctx.K)
        for b, ch in items:
            f = f + apply_phi(v, e, ch, IdealCombination.single(b))
        # integrality is asserted only for T-smoothed data
        yield a, zeta_f(f, ctx.G, list(x.W), smoothed=bool(ctx.places.T))


def apply_L(v: int, e: int, x: BElement) -> NGroupRingElt:
    """L_{v,e}(W)(x) = sum zeta_f [iota(b)] in Z[N_F / prod_{V - W} N_v]."""
    ctx = x.ctx
    G = ctx.G
    collapsed = frozenset(u for u in ctx.V if u not in x.W)
    total = NGroupRingElt(G, {}, collapsed)
    for a, z in zeta_values(v, e, x):
        total = total + z.element.shift(G.make(away=a))
    return total


def lift_to_V(z: NGroupRingElt, ctx: Context) -> NGroupRingElt:
    """Canonical section R(W) -> R(V): identity coordinates at collapsed places."""
    return section(z, z.collapsed)


# ---------------------------------------------------------------------------
# theta


def narrow_class_reps(K: NumberField, avoid, seed: int = 0, choices: int = 3) -> tuple:
    """Integral ideals coprime to ``avoid``, one per narrow class; the seed picks among small ones."""
    narrow = RayClassStructure(K, {}, (True,) * K.n)
    base = class_representatives(narrow, avoid)
    if seed == 0:
        return narrow, base
    rng = random.Random(seed)
    pool = {c: [I] for c, I in base.items()}
    primes = [P for P in K.primes_up_to(60) if P not in set(avoid)]
    for P in primes:
        for c, I in list(base.items()):
            J = I * P.ideal
            cj = narrow.artin(J)
            if len(pool[cj]) < choices:
                pool[cj].append(J)
    return narrow, {c: rng.choice(v) for c, v in pool.items()}


class ThetaElement:
    def __init__(self, ctx: Context, domain: Chain, reps: dict, per_class: dict, narrow):
        self.ctx = ctx
        self.domain = domain
        self.reps = reps
        self.per_class = per_class
        self.narrow = narrow

    @property
    def total(self) -> BElement:
        out = BElement(self.ctx, self.ctx.V)
        for t in self.per_class.values():
            out = out + t
        return out


def graded_domain(ctx: Context, domain: Chain, W, grade=None) -> Chain:
    places = ctx.grade_places(W)
    g = tuple(grade) if grade is not None else (1,) * len(places)
    return Chain(ctx.K, {(xs, g): c for (xs, _g), c in domain.terms.items()}, places)


def t_element(ctx: Context, W, D: Chain, a: FracIdeal, delta: IdealCombination) -> BElement:
    """(D[[g]] (x) a^{-1} delta) (x) iota(a) (x) 1."""
    gamma = delta * a.inverse()
    ia = ctx.iota(a)
    return BElement(ctx, W, {(b, ia): D * n for b, n in gamma.terms.items()})


def build_theta(ctx: Context, domain: Chain, seed: int = 0) -> ThetaElement:
    K = ctx.K
    avoid = list(ctx.places.S_f) + ctx.T_all
    try:
        narrow, reps = narrow_class_reps(K, avoid, seed)
    except ArithmeticError as exc:
        raise RepresentativeSearchFailed(str(exc)) from exc
    delta = delta_ST(K, ctx.places.S_f, ctx.places.T)
    D = graded_domain(ctx, domain, ctx.V)
    per = {C: t_element(ctx, ctx.V, D, a, delta) for C, a in reps.items()}
    return ThetaElement(ctx, domain, reps, per, narrow)


# ---------------------------------------------------------------------------
# witnesses that r_{V - v}(theta) lies in I B(V - v)


# witness budget: L doubles up to this cap (an engine knob of the run configuration)
WITNESS_L_CAP = 8


def _unit_witness(D: Chain, gens, twisted=True):
    wit = homology_witness(D, gens, twisted=twisted, mix=True, L_cap=WITNESS_L_CAP)
    if wit is None:
        raise WitnessSearchFailed(f"no unit witness for {D!r}")
    return wit


def _lambda_items(ctx, W, wit, gens, a, delta):
    """B-certificate entries for ((sum c ([u]-1) Lambda) (x) a^{-1} delta) (x) iota(a)."""
    out = []
    for gi, cand, c in wit:
        lam = t_element(ctx, W, cand, a, delta) * c
        out.append((gens[gi].inverse(), lam))
    return out


def rep_change_cert(ctx, W, D: Chain, b: FracIdeal, y: FieldElement, delta, eplus) -> list:
    """Certificate for t(b) - t(y b), y totally positive in F_(T)."""
    assert y.is_totally_positive()
    tb = t_element(ctx, W, D, b, delta)
    cert = [(y, -tb)]
    diff = D - D.act(y, twisted=True)
    if diff.boundary().is_zero():
        return cert
    wit = _unit_witness(diff, eplus)
    for gi, cand, c in wit:
        lam = t_element(ctx, W, cand, b, delta) * c
        u_inv = eplus[gi].inverse()
        cert.append((y * u_inv, lam))
        cert.append((y, -lam))
    return cert


def _find_signed_element(ctx: Context, signs: dict, units_only: bool):
    K = ctx.K
    if units_only:
        for u0 in K.fundamental_units:
            for k in range(1, 5):
                for s in (1, -1):
                    u = u0 ** k * s
                    if all(K.sign_at(u, i) == sg for i, sg in signs.items()):
                        return u
        return None
    for bound in range(1, 30):
        for coeffs in itertools.product(range(-bound, bound + 1), repeat=K.n):
            x = K.from_basis(list(coeffs))
            if x and all(K.sign_at(x, i) == sg for i, sg in signs.items()) and ctx.in_F_T(x):
                return x
    return None


def vanishing_certificate(theta: ThetaElement, v, eplus) -> tuple:
    """(case, certificate) with r_{V-v}(theta) = sum (y - 1) m exactly."""
    ctx = theta.ctx
    K = ctx.K
    U = frozenset(set(ctx.V) - {v})
    target = theta.total.restrict(U)
    S_f = ctx.places.S_f
    cert = []
    if not is_infinite(v):
        case = 1
        P = v
        delta_p = delta_ST(K, [Q for Q in S_f if Q != P], ctx.places.T)
        D = graded_domain(ctx, theta.domain, U)
        narrow = theta.narrow
        reps = theta.reps
        shift = narrow.artin(P.ideal)
        for C, aC in reps.items():
            # t'(a_{p^{-1}C}) - t'(a_C p^{-1})
            Cm = narrow.group.sub(C, shift)
            base = reps[Cm]
            other = aC * P.ideal.inverse()
            y = K.totally_positive_generator(other * base.inverse())
            if y is None:
                raise WitnessSearchFailed("no totally positive connector")
            cert += rep_change_cert(ctx, U, D, base, y, delta_p, eplus)
    else:
        delta = delta_ST(K, S_f, ctx.places.T)
        signs = {k: (-1 if k == v.index else 1) for k in range(K.n)}
        eps = _find_signed_element(ctx, signs, units_only=True)
        D = graded_domain(ctx, theta.domain, U)
        if eps is not None:
            case = 2
            wit = _unit_witness(D, [eps], twisted=True)
            for C, aC in theta.reps.items():
                cert += _lambda_items(ctx, U, wit, [eps], aC, delta)
        else:
            case = 3
            x = _find_signed_element(ctx, signs, units_only=False)
            if x is None:
                raise WitnessSearchFailed("no element with the required signs")
            narrow = theta.narrow
            xc = narrow.artin(K.ideal(x))
            done = set()
            xD = D.act(x, twisted=False)
            wit = _unit_witness(D - xD, eplus)
            for C, aC in sorted(theta.reps.items()):
                if C in done:
                    continue
                C2 = narrow.group.add(C, xc)
                done |= {C, C2}
                # t(a) + t(x a)
                t2 = t_element(ctx, U, xD * -1, aC, delta)
                cert.append((x, t2))
                cert += _lambda_items(ctx, U, wit, eplus, aC, delta)
                # t(a_{C2}) - t(x a) = -(t(x a) - t(y x a))
                a2 = theta.reps[C2]
                y = K.totally_positive_generator(a2 * (K.ideal(x) * aC).inverse())
                if y is None:
                    raise WitnessSearchFailed("no totally positive connector")
                sub = rep_change_cert(ctx, U, D, aC * x, y, delta, eplus)
                cert += [(z, -m) for z, m in sub]
    got = expand_certificate(cert, target)
    if not (got - target).is_zero():
        raise VerificationFailed(f"vanishing certificate (case {case}) does not re-expand")
    return case, cert


# ---------------------------------------------------------------------------
# compatible systems and Q for r = 1


class CompatibleSystem:
    def __init__(self, theta, v, e, a0, a1, b1, case):
        self.theta = theta
        self.v, self.e = v, e
        self.a0 = a0  # BElement over V
        self.a1 = a1  # list of (y, BElement over empty set): sum [y] (x) m
        self.b1 = b1  # list of (y, NGroupRingElt over V)
        self.b2 = []
        self.case = case
        self.verified = {}


def _combine_cert(cert) -> list:
    by_y: dict = {}
    order = []
    for y, m in cert:
        if y not in by_y:
            by_y[y] = m
            order.append(y)
        else:
            by_y[y] = by_y[y] + m
    return [(y, by_y[y]) for y in order if not by_y[y].is_zero()]


def solve_compatible_system(theta: ThetaElement, v: int, e: int, eplus) -> CompatibleSystem:
    ctx = theta.ctx
    if len(ctx.V) != 1:
        raise NotImplementedError("automatic compatible systems are implemented for r = 1")
    if any(is_infinite(u) and u.index == v for u in ctx.V):
        raise ValueError("the perturbation place must lie outside V")
    a0 = theta.total
    case, cert = vanishing_certificate(theta, ctx.V[0], eplus)
    a1 = _combine_cert(cert)
    b1 = [(y, lift_to_V(apply_L(v, e, m), ctx)) for y, m in a1]
    sysm = CompatibleSystem(theta, v, e, a0, a1, b1, case)
    verify_system(sysm)
    return sysm


def verify_system(sysm: CompatibleSystem) -> dict:
    """Re-check every defining equation of the r = 1 compatible system."""
    ctx = sysm.theta.ctx
    U = frozenset()
    target = sysm.a0.restrict(U)
    dv_a1 = expand_certificate(sysm.a1, target)
    ok1 = (dv_a1 - target).is_zero()
    ok2 = True
    for (y, m), (y2, b) in zip(sysm.a1, sysm.b1):
        phi_m = apply_L(sysm.v, sysm.e, m)
        if y != y2 or project_to_quotient(b, ctx.V) != phi_m:
            ok2 = False
    sysm.verified = {"dv_a1_eq_dh_a0": ok1, "dh_b1_eq_phi_a1": ok2, "b2_zero": not sysm.b2}
    if not (ok1 and ok2):
        raise VerificationFailed(f"compatible system fails: {sysm.verified}")
    return sysm.verified


def compute_Q(sysm: CompatibleSystem) -> NGroupRingElt:
    ctx = sysm.theta.ctx
    G = ctx.G
    Q = apply_L(sysm.v, sysm.e, sysm.a0)
    for y, b in sysm.b1:
        d = G.diag(y)
        Q = Q - (b.shift(d) - b)
    if not project_to_quotient(Q, ctx.V).is_zero():
        raise DMembershipFailed("horizontal boundary of Q is not zero")
    return Q


def theta_L(theta: ThetaElement, v: int, e: int) -> dict:
    """L_{v,e}(theta_C) for every narrow class C."""
    return {C: apply_L(v, e, t) for C, t in theta.per_class.items()}


def theta_group_ring(target, theta: ThetaElement, v: int, e: int):
    """(per-class, total) images rec(L_{v,e}(theta_C)) in Z[Gal(E/F)]."""
    per = {C: target.rec_ring(z) for C, z in theta_L(theta, v, e).items()}
    total = GroupRingElt(target.group)
    for z in per.values():
        total = total + z
    return per, total


def vanishing_certificate_ring(target, x, V):
    """Certificate for x in prod_{v in V} I_{G_v, G}, re-expanded exactly, or None."""
    factors = [sorted(target.decomposition_group(v)) for v in V]
    cert = augmentation_product_membership(x, factors)
    if cert is None:
        return None
    if expand_ring_certificate(target.group, cert) != x:
        raise VerificationFailed("membership certificate does not re-expand")
    return cert

"""Chains of field elements, perturbed cones and the Shintani cocycle Xi_{v,e}."""
from __future__ import annotations

import itertools
from fractions import Fraction

import mpmath

from . import linalg
from .field import FieldElement, NumberField


class DomainPropertyFailed(AssertionError):
    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


class NotInZ_Eplus(AssertionError):
    pass


class BudgetExhausted(RuntimeError):
    pass


def grade_of(x: FieldElement, places) -> tuple:
    return tuple(x.K.sign_at(x, k) for k in places)


class Chain:
    """Z-combination of graded symbols (x_1, ..., x_k)[[g]].

    ``places`` lists the real places (indices) the grade g records; the grade
    of a symbol is a tuple of signs, one per listed place.
    """

    __slots__ = ("K", "places", "terms")

    def __init__(self, K: NumberField, terms=None, places=()):
        self.K = K
        self.places = tuple(places)
        d = {}
        for key, c in (terms or {}).items():
            d[key] = d.get(key, 0) + c
        self.terms = {k: c for k, c in d.items() if c}

    @classmethod
    def symbol(cls, K, xs, grade=(), places=(), coeff=1):
        xs = tuple(K(x) for x in xs)
        return cls(K, {(xs, tuple(grade)): coeff}, places)

    def _new(self, terms):
        return Chain(self.K, terms, self.places)

    def __add__(self, other):
        d = dict(self.terms)
        for k, c in other.terms.items():
            d[k] = d.get(k, 0) + c
        return self._new(d)

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k: int):
        return self._new({key: c * k for key, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Chain) and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self):
        for (xs, _), _c in self.terms.items():
            return len(xs)
        return None

    def act(self, x: FieldElement, twisted: bool = True) -> "Chain":
        """[x] acting by (x Lambda)[[x g]], times sgn(x) when twisted."""
        s = x.sgn() if twisted else 1
        xg = grade_of(x, self.places)
        d = {}
        for (xs, g), c in self.terms.items():
            key = (tuple(x * a for a in xs), tuple(a * b for a, b in zip(g, xg)))
            d[key] = d.get(key, 0) + s * c
        return self._new(d)

    def boundary(self) -> "Chain":
        d = {}
        for (xs, g), c in self.terms.items():
            for i in range(len(xs)):
                key = (xs[:i] + xs[i + 1:], g)
                d[key] = d.get(key, 0) + (-1) ** i * c
        return self._new(d)

    def drop_grades(self, places=()) -> "Chain":
        """Forget the grading (j), or project it to a subset of places."""
        idx = [self.places.index(p) for p in places]
        d = {}
        for (xs, g), c in self.terms.items():
            key = (xs, tuple(g[i] for i in idx))
            d[key] = d.get(key, 0) + c
        return Chain(self.K, d, tuple(places))

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (repr(kv[0][1]), [a.c for a in kv[0][0]]))

    def __repr__(self):
        parts = []
        for (xs, g), c in self.items():
            parts.append(f"{c}*({', '.join(str(a) for a in xs)}){list(g) if g else ''}")
        return " + ".join(parts) or "0"


def boundary(c: Chain) -> Chain:
    return c.boundary()


def same_in_quotient(a: Chain, b: Chain) -> bool:
    """Equality in C_n / ker d_n, decided on boundaries."""
    return (a - b).boundary().is_zero()


# --- perturbed cones ----------------------------------------------------------

_cone_cache: dict = {}


class PerturbedCone:
    """Cone C(x_1..x_n) with the half-open structure from the e*w perturbation at v."""

    def __init__(self, gens, v: int, e: int):
        K = gens[0].K
        self.K = K
        self.gens = tuple(gens)
        self.v = v
        self.e = e
        signs = {K.sign_at(x, v) for x in gens}
        self.duals = K.dual_elements(list(gens)) if len(gens) == K.n else None
        if self.duals is None or len(signs) != 1:
            self.s = 0
            self.flags = None
            return
        self.orient = signs.pop()  # +1: y + eps w ; -1: y - eps w
        self.s = 1 if K.det(gens) > 0 else -1
        direction = e * self.orient
        # i-th coordinate of the perturbation is direction * rho_v(x_i^*)
        self.flags = tuple(direction * K.sign_at(d, v) > 0 for d in self.duals)

    @classmethod
    def get(cls, gens, v, e):
        key = (gens, v, e)
        c = _cone_cache.get(key)
        if c is None:
            c = cls(gens, v, e)
            if len(_cone_cache) > 200000:
                _cone_cache.clear()
            _cone_cache[key] = c
        return c

    def coords(self, y: FieldElement) -> list[Fraction]:
        return [self.K.trace(d * y) for d in self.duals]

    def contains(self, y: FieldElement) -> bool:
        if self.flags is None:
            return False
        for d, f in zip(self.duals, self.flags):
            t = self.K.trace(d * y)
            if t < 0 or (t == 0 and not f):
                return False
        return True

    def value(self, y: FieldElement) -> int:
        if self.s == 0:
            return 0
        return self.s if self.contains(y) else 0

    def __repr__(self):
        return f"PerturbedCone({[str(g) for g in self.gens]}, s={self.s}, flags={self.flags})"


def xi_symbol(xs, v: int, e: int, y: FieldElement) -> int:
    return PerturbedCone.get(tuple(xs), v, e).value(y)


def xi_evaluate(v: int, e: int, c: Chain, y: FieldElement) -> int:
    """Xi_{v,e}(j(c))(y) for a degree-n chain (grades dropped)."""
    return sum(coeff * xi_symbol(xs, v, e, y) for (xs, _g), coeff in c.terms.items())


def cocycle_check(v: int, e: int, xs, y: FieldElement) -> bool:
    K = xs[0].K
    c = Chain.symbol(K, xs).boundary()
    return xi_evaluate(v, e, c, y) == 0


# --- signed fundamental domains ----------------------------------------------------

class SignedDomain:
    def __init__(self, chain: Chain, eplus: list[FieldElement], provenance: str):
        self.chain = chain
        self.eplus = eplus
        self.provenance = provenance

    def __repr__(self):
        return f"SignedDomain({self.chain!r}, {self.provenance})"


def build_signed_domain(K: NumberField) -> SignedDomain:
    if K.n != 2:
        raise NotImplementedError("signed domains are built only for n = 2; supply one for n >= 3")
    eps = K.totally_positive_units[0]
    D = Chain.symbol(K, (K(1), eps))
    return SignedDomain(D, [eps], "built-in n=2")


def unit_translates_window(K: NumberField, x: FieldElement, eps: FieldElement, D: Chain, margin: int = 2):
    """Exponents k for which x * eps^k can meet the support of D (n = 2).

    Every cone point y of D has log(rho_1(y)/rho_2(y)) within the hull of its
    generators' log ratios; translating by eps^k shifts this by 2k log eps, so
    only k in a window of the returned size can contribute.
    """
    with mpmath.workdps(30):
        le = mpmath.log(abs(K.embed(eps, 0) / K.embed(eps, 1)))
        lx = mpmath.log(abs(K.embed(x, 0) / K.embed(x, 1)))
        ratios = []
        for (xs, _), _c in D.terms.items():
            for a in xs:
                ratios.append(mpmath.log(abs(K.embed(a, 0) / K.embed(a, 1))))
        lo, hi = min(ratios), max(ratios)
        kmin = int(mpmath.floor((lo - lx) / le)) - margin
        kmax = int(mpmath.ceil((hi - lx) / le)) + margin
    return range(kmin, kmax + 1)


def domain_sum(dom: SignedDomain, v: int, e: int, x: FieldElement) -> int:
    K = dom.chain.K
    eps = dom.eplus[0]
    total = 0
    for k in unit_translates_window(K, x, eps, dom.chain):
        total += xi_evaluate(v, e, dom.chain, x * eps ** k)
    return total


def check_Z_Eplus(dom: SignedDomain):
    """Exact check that d(D) lies in I_{E+} C_{n-1}; returns the witness."""
    wit = homology_witness(dom.chain.boundary(), dom.eplus, degree_shift=True)
    if wit is None:
        raise NotInZ_Eplus("boundary of the domain is not in I_{E+} C_{n-1}")
    return wit


def verify_signed_domain(dom: SignedDomain, samples: int = 500, rng=None, v: int = 0, e: int = 1, height: int = 30) -> dict:
    import random

    rng = rng or random.Random(0)
    K = dom.chain.K
    if K.n != 2:
        raise NotImplementedError("sampling verifier implemented for n = 2")
    checked = 0
    tp = 0
    while checked < samples:
        x = K.from_basis([rng.randint(-height, height) for _ in range(K.n)])
        if not x:
            continue
        expected = 1 if x.is_totally_positive() else 0
        got = domain_sum(dom, v, e, x)
        if got != expected:
            raise DomainPropertyFailed(f"covering identity fails at {x}: {got} != {expected}", witness=x)
        checked += 1
        tp += expected
    wit = check_Z_Eplus(dom)
    return {
        "samples": checked,
        "totally_positive_samples": tp,
        "boundary_witness_terms": len(wit),
        "support_bound": "log-ratio window of the unit translates with margin 2",
        "passed": True,
    }


# --- homology witnesses ---------------------------------------------------------

def homology_witness(c: Chain, gens: list[FieldElement], L: int = 1, L_cap: int = 8, degree_shift: bool = False, twisted: bool = True, mix: bool = False):
    """Write c (or, with degree_shift, a cycle-level target) as sum ([a]-[1]) c_i.

    Without degree_shift the equation is solved in C_n / ker d_n, i.e. on
    boundaries; with degree_shift it is solved literally in C_k.  Candidates
    c_i are translates of the support symbols of c by words of length <= L in
    the generators; L doubles until a solution is found or L_cap is reached.
    Returns a list of (generator index, symbol chain, coeff) or None.
    """
    if c.is_zero():
        return []
    K = c.K
    while L <= L_cap:
        supp = [Chain(K, {key: 1}, c.places) for key in c.terms]
        cands = []
        seen = set()
        ranges = [range(-L, L + 1)] * len(gens)
        for ks in itertools.product(*ranges):
            if sum(abs(k) for k in ks) > L:
                continue
            u = K(1)
            for g, k in zip(gens, ks):
                u = u * g ** k
            for s in supp:
                t = s.act(u, twisted)
                key = next(iter(t.terms))
                if key not in seen:
                    seen.add(key)
                    cands.append(Chain(K, {key: 1}, c.places))
        if mix:
            cands = _mixed_candidates(c, cands)
        cols = {}
        rows = []
        labels = []
        for gi, g in enumerate(gens):
            for cand in cands:
                expr = cand.act(g, twisted) - cand
                vec_chain = expr if degree_shift else expr.boundary()
                rows.append(vec_chain.terms)
                labels.append((gi, cand))
                for key in vec_chain.terms:
                    cols.setdefault(key, len(cols))
        target_chain = c if degree_shift else c.boundary()
        for key in target_chain.terms:
            cols.setdefault(key, len(cols))
        M = [[0] * len(cols) for _ in rows]
        for i, r in enumerate(rows):
            for key, v in r.items():
                M[i][cols[key]] = v
        tvec = [0] * len(cols)
        for key, v in target_chain.terms.items():
            tvec[cols[key]] = v
        sol = linalg.solve_left(M, tvec) if M else None
        if sol is not None:
            wit = [(labels[i][0], labels[i][1], a) for i, a in enumerate(sol) if a]
            # re-expand
            total = Chain(K, {}, c.places)
            for gi, cand, a in wit:
                total = total + (cand.act(gens[gi], twisted) - cand) * a
            ok = (total - c).is_zero() if degree_shift else same_in_quotient(total, c)
            assert ok, "homology witness failed re-expansion"
            return wit
        L *= 2
    return None


def _mixed_candidates(c: Chain, cands: list[Chain]) -> list[Chain]:
    """All symbols on the translated vertices sharing one grade (for joining cones)."""
    K = c.K
    by_grade: dict = {}
    for cand in cands:
        (xs, g), = cand.terms
        verts = by_grade.setdefault(g, [])
        for a in xs:
            if a not in verts:
                verts.append(a)
    k = len(next(iter(c.terms))[0])
    out = []
    for g, verts in by_grade.items():
        for combo in itertools.combinations(verts, k):
            out.append(Chain(K, {(tuple(combo), g): 1}, c.places))
    return out


def expand_witness(wit, gens, K, places=(), twisted=True) -> Chain:
    total = Chain(K, {}, places)
    for gi, cand, a in wit:
        total = total + (cand.act(gens[gi], twisted) - cand) * a
    return total

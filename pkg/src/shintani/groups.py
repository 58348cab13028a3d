"""Finite abelian groups, group rings, augmentation-ideal membership and ray class groups."""
from __future__ import annotations

import itertools
from functools import cached_property
from math import prod


from . import linalg
from .field import FieldElement, FracIdeal, NumberField, Prime, Residues


class RelationSearchExhausted(RuntimeError):
    pass


class UnsupportedDegree(NotImplementedError):
    pass


class FinAbGroup:
    """Finite abelian group Z/d_1 x ... x Z/d_k in Smith form (d_i > 1, d_i | d_{i+1})."""

    def __init__(self, invariants):
        invs = [int(d) for d in invariants if int(d) != 1]
        if any(d == 0 for d in invs):
            raise ValueError("infinite group")
        self.invariants = tuple(invs)

    @property
    def order(self) -> int:
        return prod(self.invariants)

    @cached_property
    def zero(self) -> tuple:
        return tuple(0 for _ in self.invariants)

    def reduce(self, v) -> tuple:
        return tuple(int(a) % d for a, d in zip(v, self.invariants))

    def add(self, a, b) -> tuple:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.invariants))

    def neg(self, a) -> tuple:
        return tuple((-x) % d for x, d in zip(a, self.invariants))

    def sub(self, a, b) -> tuple:
        return self.add(a, self.neg(b))

    def scale(self, a, k: int) -> tuple:
        return tuple((x * k) % d for x, d in zip(a, self.invariants))

    def elements(self) -> list[tuple]:
        return [tuple(e) for e in itertools.product(*(range(d) for d in self.invariants))]

    def element_order(self, a) -> int:
        k = 1
        while self.scale(a, k) != self.zero:
            k += 1
        return k

    def subgroup(self, gens) -> set:
        out = {self.zero}
        frontier = [self.zero]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.add(x, g)
                    if y not in out:
                        out.add(y)
                        nxt.append(y)
            frontier = nxt
        return out

    def quotient(self, gens) -> "GroupHom":
        """Quotient by the subgroup generated by gens, with its projection."""
        k = len(self.invariants)
        rows = [[d * int(i == j) for j in range(k)] for i, d in enumerate(self.invariants)]
        rows += [list(g) for g in gens]
        return presentation(k, rows, source=self)

    def all_subgroups(self) -> list[frozenset]:
        seen = set()
        out = []
        els = self.elements()
        for a in els:
            for b in els:
                H = frozenset(self.subgroup([a, b]))
                if H not in seen:
                    seen.add(H)
                    out.append(H)
        # groups here have rank <= 2 at desk scale; add 3-generated as a safeguard
        if len(self.invariants) > 2:
            for gens in itertools.combinations(els, 3):
                H = frozenset(self.subgroup(list(gens)))
                if H not in seen:
                    seen.add(H)
                    out.append(H)
        out.sort(key=lambda H: (len(H), sorted(H)))
        return out

    def __repr__(self):
        return f"FinAbGroup{self.invariants}"


class GroupHom:
    """Homomorphism Z^k (or a FinAbGroup) -> FinAbGroup given by an integer matrix."""

    def __init__(self, target: FinAbGroup, matrix, source: FinAbGroup | None = None):
        self.target = target
        self.matrix = matrix  # k rows, one image per source generator
        self.source = source

    def __call__(self, v) -> tuple:
        out = [0] * len(self.target.invariants)
        for a, row in zip(v, self.matrix):
            if a:
                for j, b in enumerate(row):
                    out[j] += a * b
        return self.target.reduce(out)


def presentation(k: int, rows, source: FinAbGroup | None = None) -> GroupHom:
    """Group Z^k / <rows> in Smith form, with the projection Z^k -> group."""
    rows = linalg.hnf([list(r) for r in rows], k)
    while len(rows) < k:
        rows.append([0] * k)
    diag, U, V = linalg.snf(rows)
    keep = [i for i, d in enumerate(diag) if d != 1]
    if any(diag[i] == 0 for i in keep):
        raise ValueError("presentation defines an infinite group")
    G = FinAbGroup([diag[i] for i in keep])
    matrix = [[V[r][i] for i in keep] for r in range(k)]
    return GroupHom(G, matrix, source)


class GroupRingElt:
    """Finitely supported Z-valued function on a FinAbGroup."""

    __slots__ = ("G", "coeffs")

    def __init__(self, G: FinAbGroup, coeffs=None):
        self.G = G
        d = {}
        for g, c in (coeffs or {}).items():
            g = G.reduce(g)
            d[g] = d.get(g, 0) + c
        self.coeffs = {g: c for g, c in d.items() if c}

    @classmethod
    def basis(cls, G, g):
        return cls(G, {g: 1})

    def __add__(self, other):
        d = dict(self.coeffs)
        for g, c in other.coeffs.items():
            d[g] = d.get(g, 0) + c
        return GroupRingElt(self.G, d)

    def __neg__(self):
        return GroupRingElt(self.G, {g: -c for g, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, GroupRingElt):
            return GroupRingElt(self.G, {g: c * other for g, c in self.coeffs.items()})
        d = {}
        for g, a in self.coeffs.items():
            for h, b in other.coeffs.items():
                gh = self.G.add(g, h)
                d[gh] = d.get(gh, 0) + a * b
        return GroupRingElt(self.G, d)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, GroupRingElt) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def augmentation(self):
        return sum(self.coeffs.values())

    def vector(self, order=None) -> list:
        order = order or self.G.elements()
        return [self.coeffs.get(g, 0) for g in order]

    def push(self, hom: GroupHom) -> "GroupRingElt":
        d = {}
        for g, c in self.coeffs.items():
            h = hom(g)
            d[h] = d.get(h, 0) + c
        return GroupRingElt(hom.target, d)

    def is_integral(self) -> bool:
        return all(getattr(c, "denominator", 1) == 1 for c in self.coeffs.values())

    def to_json(self) -> list:
        return [[list(g), str(c)] for g, c in sorted(self.coeffs.items())]

    def __repr__(self):
        return " + ".join(f"{c}[{g}]" for g, c in sorted(self.coeffs.items())) or "0"


def augmentation_product_membership(x: GroupRingElt, factors: list[list[tuple]]):
    """Decide x in prod_i I_{U_i,G}, U_i generated by factors[i].

    Returns a certificate list of (u-tuple, g, coeff) with
    x = sum coeff * prod_i([u_i]-[1]) * [g], or None if x is not a member.
    """
    G = x.G
    els = G.elements()
    one = GroupRingElt.basis(G, G.zero)
    spanning = []
    labels = []
    gen_lists = [[u for u in f if u != G.zero] for f in factors]
    for us in itertools.product(*gen_lists):
        base = one
        for u in us:
            base = base * (GroupRingElt.basis(G, u) - one)
        for g in els:
            el = base * GroupRingElt.basis(G, g)
            spanning.append(el.vector(els))
            labels.append((us, g))
    target = x.vector(els)
    if not any(target):
        return []
    if not spanning:
        return None
    sol = linalg.solve_left(spanning, target)
    if sol is None:
        return None
    cert = [(labels[i], c) for i, c in enumerate(sol) if c]
    return [(us, g, c) for (us, g), c in cert]


def expand_certificate(G: FinAbGroup, cert) -> GroupRingElt:
    one = GroupRingElt.basis(G, G.zero)
    total = GroupRingElt(G)
    for us, g, c in cert:
        term = one
        for u in us:
            term = term * (GroupRingElt.basis(G, u) - one)
        total = total + term * GroupRingElt.basis(G, g) * c
    return total


class RayClassStructure:
    """Ray class group modulo m * (flagged real places) of a real quadratic field."""

    def __init__(self, K: NumberField, modulus: dict, flags, prime_bound: int = 60, max_bound: int = 2000):
        if K.n != 2:
            raise UnsupportedDegree("ray class groups are implemented for real quadratic fields")
        self.K = K
        self.modulus_exps = {P: m for P, m in modulus.items() if m > 0}
        self.flags = tuple(bool(f) for f in flags) + (False,) * (K.n - len(flags))
        m_ideal = K.unit_ideal
        for P, m in self.modulus_exps.items():
            m_ideal = m_ideal * P.ideal ** m
        self.m = m_ideal
        self.res = Residues(m_ideal) if self.modulus_exps else None
        self.expected_order = self._expected_order()
        bound = prime_bound
        while True:
            try:
                self._build(bound)
                break
            except RelationSearchExhausted:
                bound *= 2
                if bound > max_bound:
                    raise
        self.prime_bound = bound

    # --- analytic order -------------------------------------------------------
    def ray_unit_key(self, x: FieldElement):
        signs = tuple(self.K.sign_at(x, k) for k in range(self.K.n) if self.flags[k])
        resid = self.res.reduce(x) if self.res else ()
        return (resid, signs)

    def _expected_order(self) -> int:
        K = self.K
        h = K.class_number
        phi = self.res.phi if self.res else 1
        gens = [K(-1)] + K.fundamental_units
        image = {self.ray_unit_key(K(1))}
        frontier = list(image)
        keys = [self.ray_unit_key(g) for g in gens]
        while frontier:
            nxt = []
            for a in frontier:
                for k in keys:
                    c = (self.res.mul(a[0], k[0]) if self.res else (), tuple(x * y for x, y in zip(a[1], k[1])))
                    if c not in image:
                        image.add(c)
                        nxt.append(c)
            frontier = nxt
        order = h * phi * 2 ** sum(self.flags)
        assert order % len(image) == 0
        return order // len(image)

    @cached_property
    def _one_key(self):
        return self.ray_unit_key(self.K(1))

    def is_ray_one(self, x: FieldElement) -> bool:
        return self.ray_unit_key(x) == self._one_key

    # --- relation search -------------------------------------------------------
    def _build(self, bound: int):
        K = self.K
        mprimes = set(self.modulus_exps)
        self.gens = [P for P in K.primes_up_to(bound) if P not in mprimes]
        if not self.gens:
            raise RelationSearchExhausted("no generators")
        self.gen_index = {P: i for i, P in enumerate(self.gens)}
        k = len(self.gens)
        rows = []
        order = None
        # x = 1 + mu with mu in m is 1 mod m; only the signs need checking
        B = self.m.reduced_basis()
        box = 2
        while box <= 64:
            for a, b in itertools.product(range(-box, box + 1), repeat=2):
                x = K(1) + B[0] * a + B[1] * b
                if not x or any(K.sign_at(x, i) < 0 for i in range(K.n) if self.flags[i]):
                    continue
                vec = self._smooth_vector(K.ideal(x))
                if vec is not None and any(vec):
                    rows.append(vec)
            if rows:
                hom = _try_presentation(k, rows)
                if hom is not None:
                    order = hom.target.order
                    if order == self.expected_order:
                        self.proj = hom
                        self.group = hom.target
                        return
                    if order < self.expected_order:
                        raise ArithmeticError("relation lattice too large: inconsistent data")
            box *= 2
        raise RelationSearchExhausted(f"ray class relations not found with prime bound {bound}")

    def _smooth_vector(self, I: FracIdeal):
        N = I.norm()
        if N.denominator != 1:
            return None
        vec = [0] * len(self.gens)
        fac = I.factor()
        for P, e in fac.items():
            if P not in self.gen_index:
                return None
            vec[self.gen_index[P]] += e
        return vec

    # --- Artin map ----------------------------------------------------------------
    def artin(self, I: FracIdeal) -> tuple:
        """Class of an ideal coprime to the modulus."""
        vec = [0] * len(self.gens)
        for P, e in I.factor().items():
            if P in self.modulus_exps:
                raise ValueError("ideal not coprime to the modulus")
            if P in self.gen_index:
                vec[self.gen_index[P]] += e
            else:
                cl = self._artin_large_prime(P)
                for i, c in enumerate(cl):
                    vec[i] += e * c
        return self.proj(vec)

    def _artin_large_prime(self, P: Prime) -> list:
        K = self.K
        Pinv = P.ideal.inverse()
        lat = self.m * Pinv
        B = lat.reduced_basis()
        for box in range(1, 40):
            for a, b in itertools.product(range(-box, box + 1), repeat=2):
                mu = B[0] * a + B[1] * b
                alpha = K(1) + mu
                # mu lies in m P^-1 with P prime to m, so alpha is 1 mod m; only signs matter
                if not alpha or any(K.sign_at(alpha, k) < 0 for k in range(K.n) if self.flags[k]):
                    continue
                J = K.ideal(alpha) * P.ideal
                vec = self._smooth_vector(J)
                if vec is not None:
                    return vec
        raise RelationSearchExhausted("could not smooth a large prime")

    def artin_element(self, x: FieldElement) -> tuple:
        return self.artin(self.K.ideal(x))

    def __repr__(self):
        return f"RayClassStructure(order={self.group.order}, invariants={self.group.invariants})"


def _try_presentation(k, rows):
    try:
        return presentation(k, rows)
    except ValueError:
        return None

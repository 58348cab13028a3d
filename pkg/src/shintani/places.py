"""Place sets (S, T, V), the level J and the groups N_v, N_F = N_S + N^S."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

from .field import (
    FieldElement,
    FracIdeal,
    NumberField,
    Prime,
    Residues,
    crt,
    uniformizer,
)


class NotCoprimeToS(ValueError):
    pass


class IncompatibleTags(ValueError):
    pass


@dataclass(frozen=True)
class InfPlace:
    index: int

    def __repr__(self):
        return f"inf{self.index + 1}"


def place_label(v) -> str:
    if isinstance(v, InfPlace):
        return repr(v)
    return f"p{v.p}[{','.join(str(list(r)) for r in v.ideal.rows)}]"


def is_infinite(v) -> bool:
    return isinstance(v, InfPlace)


@dataclass
class PlaceSet:
    K: NumberField
    S_f: list[Prime]
    T: list[Prime]
    V: list  # ordered; InfPlace or Prime

    def __post_init__(self):
        if set(self.S_f) & set(self.T):
            raise ValueError("S and T must be disjoint")
        if not set(self.V) <= set(self.S):
            raise ValueError("V must be contained in S")
        if len(set(self.V)) != len(self.V):
            raise ValueError("V has repeated places")

    @property
    def S_inf(self) -> list[InfPlace]:
        return [InfPlace(k) for k in range(self.K.n)]

    @property
    def S(self) -> list:
        return self.S_inf + list(self.S_f)

    @property
    def r(self) -> int:
        return len(self.V)

    @cached_property
    def T_prime(self) -> list[Prime]:
        """Primes outside T sharing a residue characteristic with T."""
        out = []
        for p in sorted({q.p for q in self.T}):
            for P in self.K.factor_rational_prime(p):
                if P not in self.T:
                    out.append(P)
        return out

    def check_C1(self) -> dict:
        n = self.K.n
        s_chars = {P.p for P in self.S_f}
        t_chars = [P.p for P in self.T]
        deg1 = [P for P in self.T if P.f == 1]
        report = {
            "V_not_containing_S_inf": not set(self.S_inf) <= set(self.V),
            "S_T_characteristics_disjoint": not (s_chars & set(t_chars)),
            "T_characteristics_distinct": len(set(t_chars)) == len(t_chars),
            "T_degree_one": len(deg1) >= 2 or any(P.norm >= n + 2 for P in deg1),
        }
        report["passed"] = all(report.values())
        return report


@dataclass
class LevelJ:
    """Finite exponents m_v for v in S_f; flags for infinite places.

    ``positive[k]`` True means J_v = R_{>0} at the k-th real place, so that
    N_v = {+1, -1}; False means J_v = R^x and N_v is trivial.
    """

    m: dict = field(default_factory=dict)  # Prime -> int
    positive: tuple = ()

    def flag(self, k: int) -> bool:
        return bool(self.positive[k]) if k < len(self.positive) else False


class NElement:
    """Element of N_F: local classes at S plus an ideal coprime to S."""

    __slots__ = ("G", "loc", "away")

    def __init__(self, G: "NGroup", loc: tuple, away: FracIdeal):
        self.G = G
        self.loc = loc
        self.away = away

    def _key(self):
        return (self.loc, self.away)

    def __eq__(self, other):
        return isinstance(other, NElement) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __mul__(self, other: "NElement") -> "NElement":
        return self.G.mul(self, other)

    def inverse(self) -> "NElement":
        return self.G.inv(self)

    def __pow__(self, k: int) -> "NElement":
        out = self.G.identity
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = out * base
        return out

    def is_identity(self) -> bool:
        return self == self.G.identity

    def sort_key(self):
        return (repr(self.loc), self.away.den, self.away.rows)

    def __repr__(self):
        parts = []
        for v, c in zip(self.G.S, self.loc):
            if c is not None:
                parts.append(f"{place_label(v)}:{c}")
        N = self.away.norm()
        if N != 1:
            parts.append(f"ideal(N={N})")
        return "N<" + " ".join(parts) + ">"


class NGroup:
    """The group N_F^{(J)} attached to a place set and level."""

    def __init__(self, places: PlaceSet, level: LevelJ):
        self.places = places
        self.level = level
        self.K = places.K
        self.S = places.S
        self.res = {}
        self.unif = {}
        for P in places.S_f:
            m = level.m.get(P, 1)
            self.res[P] = Residues(P.ideal ** m) if m > 0 else None
            self.unif[P] = uniformizer(P)

    # --- local components ------------------------------------------------------
    def trivial_component(self, v):
        if is_infinite(v):
            return 1 if self.level.flag(v.index) else None
        R = self.res[v]
        return (0, R.one if R else ())

    def local_class(self, v, x: FieldElement):
        if is_infinite(v):
            if not self.level.flag(v.index):
                return None
            return self.K.sign_at(x, v.index)
        k = self.K.ideal(x).valuation(v)
        R = self.res[v]
        if R is None:
            return (k, ())
        u = x / self.unif[v] ** k
        return (k, R.reduce(u))

    def _mul_comp(self, v, a, b):
        if a is None:
            return None
        if is_infinite(v):
            return a * b
        R = self.res[v]
        return (a[0] + b[0], R.mul(a[1], b[1]) if R else ())

    def _inv_comp(self, v, a):
        if a is None:
            return None
        if is_infinite(v):
            return a
        R = self.res[v]
        return (-a[0], R.inverse(a[1]) if R else ())

    # --- group law -------------------------------------------------------------
    @cached_property
    def identity(self) -> NElement:
        return NElement(self, tuple(self.trivial_component(v) for v in self.S), self.K.unit_ideal)

    def mul(self, a: NElement, b: NElement) -> NElement:
        loc = tuple(self._mul_comp(v, x, y) for v, x, y in zip(self.S, a.loc, b.loc))
        return NElement(self, loc, a.away * b.away)

    def inv(self, a: NElement) -> NElement:
        loc = tuple(self._inv_comp(v, x) for v, x in zip(self.S, a.loc))
        return NElement(self, loc, a.away.inverse())

    def make(self, comps: dict | None = None, away: FracIdeal | None = None) -> NElement:
        comps = comps or {}
        loc = tuple(comps.get(v, self.trivial_component(v)) for v in self.S)
        return NElement(self, loc, away if away is not None else self.K.unit_ideal)

    def component(self, a: NElement, v):
        return a.loc[self.S.index(v)]

    # --- maps from F^x and ideals ---------------------------------------------
    def i_S(self, x: FieldElement) -> NElement:
        return self.make({v: self.local_class(v, x) for v in self.S})

    def i_S_at(self, x: FieldElement, places) -> NElement:
        """Local image of x in prod_{v in places} N_v."""
        return self.make({v: self.local_class(v, x) for v in places})

    def strip_S(self, I: FracIdeal) -> FracIdeal:
        for P in self.places.S_f:
            k = I.valuation(P)
            if k:
                I = I * P.ideal ** (-k)
        return I

    def i_upper_S(self, x: FieldElement) -> NElement:
        return self.make(away=self.strip_S(self.K.ideal(x)))

    def iota(self, a: FracIdeal) -> NElement:
        if not a.is_coprime_to(self.places.S_f):
            raise NotCoprimeToS("ideal is not coprime to S")
        return self.make(away=a)

    def diag(self, x: FieldElement) -> NElement:
        return self.i_S(x) * self.i_upper_S(x)

    def collapse(self, a: NElement, places) -> NElement:
        places = set(places)
        loc = tuple(
            self.trivial_component(v) if v in places else c for v, c in zip(self.S, a.loc)
        )
        return NElement(self, loc, a.away)

    # --- enumeration of finite local groups ------------------------------------
    def local_unit_classes(self, v) -> list:
        """All elements of the finite part of N_v (units mod J_v, or signs)."""
        if is_infinite(v):
            return [1, -1] if self.level.flag(v.index) else [None]
        R = self.res[v]
        if R is None:
            return [(0, ())]
        return [(0, u) for u in R.units]

    def global_with_local(self, comps: dict) -> FieldElement:
        """alpha in F^x whose local classes at the given S-places are ``comps``.

        Finite components are (valuation, unit class); infinite ones are signs.
        Places not listed are unconstrained.
        """
        K = self.K
        fin = [(v, c) for v, c in comps.items() if not is_infinite(v)]
        inf = [(v, c) for v, c in comps.items() if is_infinite(v) and c is not None]
        D = 1
        for v, _ in fin:
            D *= v.p
        c = max([0] + [-k for _, (k, _u) in fin])
        targets = []
        for v, (k, u) in fin:
            R = self.res[v]
            Dc = K(D) ** c
            val = k + K.ideal(Dc).valuation(v)
            m = R.m.valuation(v) if R else 0
            pi = self.unif[v]
            uD = Dc / pi ** K.ideal(Dc).valuation(v)
            if R:
                want = R.element(R.mul(u, R.reduce(uD)))
            else:
                want = K(1)
            targets.append((pi ** val * want, v.ideal ** (val + m + (0 if m else 1))))
        beta = crt(targets) if targets else K(1)
        M = K.unit_ideal
        for _, I in targets:
            M = M * I
        lam = M.min_integer()
        if inf:
            xi = self._sign_element({v.index: s for v, s in inf})
            t = 1
            while True:
                cand = beta + xi * (lam * t)
                if cand and all(K.sign_at(cand, v.index) == s for v, s in inf):
                    beta = cand
                    break
                t *= 2
        if beta.is_zero():
            beta = beta + lam
        alpha = beta / K(D) ** c
        for v, cl in comps.items():
            got = self.local_class(v, alpha)
            assert got == cl, (v, got, cl)
        return alpha

    def _sign_element(self, signs: dict) -> FieldElement:
        K = self.K
        for bound in range(1, 50):
            for coeffs in itertools.product(range(-bound, bound + 1), repeat=K.n):
                x = K.from_basis(list(coeffs))
                if x and all(K.sign_at(x, k) == s for k, s in signs.items()):
                    return x
        raise ArithmeticError("no element with prescribed signs")


class NGroupRingElt:
    """Finitely supported Z-combination of NElements, optionally with collapsed places."""

    __slots__ = ("G", "coeffs", "collapsed")

    def __init__(self, G: NGroup, coeffs=None, collapsed=frozenset()):
        self.G = G
        self.collapsed = frozenset(collapsed)
        out = {}
        for g, c in (coeffs or {}).items():
            if self.collapsed:
                g = G.collapse(g, self.collapsed)
            out[g] = out.get(g, 0) + c
        self.coeffs = {g: c for g, c in out.items() if c}

    @classmethod
    def basis(cls, g: NElement, collapsed=frozenset()):
        return cls(g.G, {g: 1}, collapsed)

    def _check(self, other):
        if self.collapsed != other.collapsed:
            raise IncompatibleTags("group ring elements live in different quotients")

    def __add__(self, other):
        self._check(other)
        d = dict(self.coeffs)
        for g, c in other.coeffs.items():
            d[g] = d.get(g, 0) + c
        return NGroupRingElt(self.G, d, self.collapsed)

    def __neg__(self):
        return NGroupRingElt(self.G, {g: -c for g, c in self.coeffs.items()}, self.collapsed)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return NGroupRingElt(self.G, {g: c * other for g, c in self.coeffs.items()}, self.collapsed)
        self._check(other)
        d = {}
        for g, a in self.coeffs.items():
            for h, b in other.coeffs.items():
                gh = g * h
                d[gh] = d.get(gh, 0) + a * b
        return NGroupRingElt(self.G, d, self.collapsed)

    __rmul__ = __mul__

    def shift(self, h: NElement) -> "NGroupRingElt":
        """Multiply by the group element [h]."""
        return NGroupRingElt(self.G, {g * h: c for g, c in self.coeffs.items()}, self.collapsed)

    def __eq__(self, other):
        return (
            isinstance(other, NGroupRingElt)
            and self.collapsed == other.collapsed
            and self.coeffs == other.coeffs
        )

    def is_zero(self) -> bool:
        return not self.coeffs

    def augmentation(self) -> int:
        return sum(self.coeffs.values())

    def map(self, f):
        """Push forward along a group homomorphism f (returns a dict)."""
        out = {}
        for g, c in self.coeffs.items():
            k = f(g)
            out[k] = out.get(k, 0) + c
        return {k: c for k, c in out.items() if c}

    def items(self):
        return sorted(self.coeffs.items(), key=lambda kv: kv[0].sort_key())

    def __repr__(self):
        return " + ".join(f"{c}*{g!r}" for g, c in self.items()) or "0"


def project_to_quotient(e: NGroupRingElt, collapse) -> NGroupRingElt:
    """Collapse the N_v coordinates for the given places (a restriction map)."""
    collapse = frozenset(collapse)
    return NGroupRingElt(e.G, e.coeffs, e.collapsed | collapse)


def section(e: NGroupRingElt, keep) -> NGroupRingElt:
    """Canonical section: reinterpret with fewer collapsed places (identity inserted)."""
    keep = frozenset(keep)
    if not keep <= e.collapsed:
        raise IncompatibleTags("section can only un-collapse collapsed places")
    return NGroupRingElt(e.G, e.coeffs, e.collapsed - keep)

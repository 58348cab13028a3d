"""Ideal combinations, the smoothing element delta_{S,T} and cone-times-ideal functions."""
from __future__ import annotations

from .cones import Chain, PerturbedCone, grade_of
from .field import FieldElement, FracIdeal, NumberField, Prime


class GradeMismatch(ValueError):
    pass


class IdealCombination:
    """Finite Z-combination of fractional ideals (an element of Z[I_F])."""

    __slots__ = ("K", "terms")

    def __init__(self, K: NumberField, terms=None):
        self.K = K
        d = {}
        for I, c in (terms or {}).items():
            d[I] = d.get(I, 0) + c
        self.terms = {I: c for I, c in d.items() if c}

    @classmethod
    def single(cls, I: FracIdeal, c: int = 1):
        return cls(I.K, {I: c})

    def __add__(self, other):
        d = dict(self.terms)
        for I, c in other.terms.items():
            d[I] = d.get(I, 0) + c
        return IdealCombination(self.K, d)

    def __neg__(self):
        return IdealCombination(self.K, {I: -c for I, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return IdealCombination(self.K, {I: c * other for I, c in self.terms.items()})
        if isinstance(other, (FracIdeal, FieldElement)):
            return IdealCombination(self.K, {I * other: c for I, c in self.terms.items()})
        d = {}
        for I, a in self.terms.items():
            for J, b in other.terms.items():
                IJ = I * J
                d[IJ] = d.get(IJ, 0) + a * b
        return IdealCombination(self.K, d)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, IdealCombination) and self.terms == other.terms

    def indicator(self, x: FieldElement) -> int:
        return sum(c for I, c in self.terms.items() if I.contains(x))

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0].norm(), kv[0].rows, kv[0].den))

    def __repr__(self):
        return " + ".join(f"{c}*{I.short()}" for I, c in self.items()) or "0"


def delta_ST(K: NumberField, S_f: list[Prime], T: list[Prime]) -> IdealCombination:
    """prod_{p in S_f}(1 - [p]) prod_{q in T}(1 - N(q)[q]), expanded."""
    out = IdealCombination(K, {K.unit_ideal: 1})
    for P in S_f:
        out = out * IdealCombination(K, {K.unit_ideal: 1, P.ideal: -1})
    for Q in T:
        out = out * IdealCombination(K, {K.unit_ideal: 1, Q.ideal: -Q.norm})
    return out


def c_T(a: FracIdeal, T: list[Prime]) -> int:
    out = 1
    for Q in T:
        if a.valuation(Q) > 0:
            out *= 1 - Q.norm
    return out


def smoothed_indicator_identity_check(a: FracIdeal, x: FieldElement, S_f, T) -> bool:
    """Compare 1_{a^{-1} delta}(x) with c_T(x a) on a^{-1} cap F_(S), 0 elsewhere."""
    K = a.K
    gamma = delta_ST(K, S_f, T) * a.inverse()
    lhs = gamma.indicator(x)
    ainv = a.inverse()
    if ainv.contains(x) and all(K.ideal(x).valuation(P) == 0 for P in S_f):
        rhs = c_T(K.ideal(x) * a, T)
    else:
        rhs = 0
    return lhs == rhs


class MFunction:
    """f(x) = sum coeff * Xi-cone value(x) * 1_b(x)."""

    def __init__(self, K: NumberField, terms=None):
        self.K = K
        self.terms = list(terms or [])  # (coeff, PerturbedCone, FracIdeal)

    def __add__(self, other):
        return MFunction(self.K, self.terms + other.terms)

    def __neg__(self):
        return MFunction(self.K, [(-c, C, I) for c, C, I in self.terms])

    def __mul__(self, k: int):
        return MFunction(self.K, [(c * k, C, I) for c, C, I in self.terms])

    def __call__(self, x: FieldElement) -> int:
        total = 0
        for c, C, I in self.terms:
            if C.s and I.contains(x):
                total += c * C.value(x)
        return total

    def translate(self, x: FieldElement) -> "MFunction":
        """Cones and ideals moved by x (no sign twist): g(x y) = sgn(x) f(y)."""
        out = []
        for c, C, I in self.terms:
            out.append((c, PerturbedCone.get(tuple(x * g for g in C.gens), C.v, C.e), I * x))
        return MFunction(self.K, out)


def apply_phi(v: int, e: int, chain: Chain, gamma: IdealCombination, check_grades: bool = True) -> MFunction:
    """phi_{W,v,e}(Lambda (x) gamma) = Xi_{v,e}(j(Lambda)) * 1_gamma."""
    K = chain.K
    terms = []
    for (xs, g), c in chain.terms.items():
        if check_grades and chain.places:
            for x in xs:
                if grade_of(x, chain.places) != tuple(g):
                    raise GradeMismatch(f"generator {x} is not in F_g for g={g}")
        cone = PerturbedCone.get(tuple(xs), v, e)
        if cone.s == 0:
            continue
        for I, n in gamma.terms.items():
            terms.append((c * n, cone, I))
    return MFunction(K, terms)

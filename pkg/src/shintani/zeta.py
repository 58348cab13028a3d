"""Special values at s=0 of cone zeta functions and of zeta_f for M-functions."""
from __future__ import annotations

from fractions import Fraction
from math import gcd

import mpmath

from . import linalg
from .field import FieldElement, FracIdeal, NumberField


class UnsupportedDegree(NotImplementedError):
    pass


class DivergentCone(ValueError):
    """Cone generators of opposite signs at a place carrying an exponent."""


class NonRationalValue(ArithmeticError):
    pass


def B1(x: Fraction) -> Fraction:
    return x - Fraction(1, 2)


def B2(x: Fraction) -> Fraction:
    return x * x - x + Fraction(1, 6)


def _min_multiple_in(w: FieldElement, L: FracIdeal) -> int:
    """Smallest k >= 1 with k*w in L."""
    k = 1
    while not L.contains(w * k):
        k += 1
    return k


def _check_degree(K: NumberField):
    if K.n != 2:
        raise UnsupportedDegree(f"exact cone zeta values are implemented for degree 2, not {K.n}")


def parallelepiped_points(w1, w2, k1: int, k2: int, z0: FieldElement, L: FracIdeal):
    """Points of z0 + L in {u1 k1 w1 + u2 k2 w2 : 0 <= u_i < 1}, as coordinates (u1, u2)."""
    K = L.K
    duals = K.dual_elements([w1 * k1, w2 * k2])
    cols = []
    for b in L.basis():
        cols.append([K.trace(d * b) for d in duals])
    z = [K.trace(d * z0) for d in duals]
    D = 1
    for v in [c for r in cols for c in r] + z:
        D = D * v.denominator // gcd(D, v.denominator)
    ints = [[int(c * D) for c in r] for r in cols]
    H = linalg.hnf(ints, 2)
    (h11, h12), (h21, h22) = H
    assert h21 == 0 and D % h11 == 0 and D % h22 == 0
    zi = [int(c * D) for c in z]
    pts = []
    for a in range(D // h11):
        c1 = (a * h11 + zi[0]) % D
        base = a * h12 + zi[1]
        for b in range(D // h22):
            c2 = (base + b * h22) % D
            pts.append((Fraction(c1, D), Fraction(c2, D)))
    return pts


def _expand_point(x1: Fraction, x2: Fraction, flags):
    """Split the orbit x + N^2 (with facet rules) into 2-D and ray pieces.

    Yields ("2d", y1, y2) with y_i in (0, 1] or ("ray", y) with y in (0, 1].
    """
    opts = []
    for x, f in ((x1, flags[0]), (x2, flags[1])):
        if x != 0:
            opts.append([x])
        elif f:
            opts.append([0, Fraction(1)])
        else:
            opts.append([Fraction(1)])
    for y1 in opts[0]:
        for y2 in opts[1]:
            if y1 == 0 and y2 == 0:
                continue
            if y1 == 0:
                yield ("ray", y2)
            elif y2 == 0:
                yield ("ray", y1)
            else:
                yield ("2d", y1, y2)


def cone_coset_value(gens, flags, z0: FieldElement, L: FracIdeal, places) -> FieldElement:
    """Exact value at s=0 of sum over (z0 + L) cap C of prod_{p in P} |x|_p^{-s}.

    Returned as alpha with value = mean_{p in P} rho_p(alpha).  C is the
    half-open cone on gens, the i-th facet (coordinate i zero) included iff flags[i].
    """
    K = L.K
    _check_degree(K)
    w1, w2 = gens
    P = list(places)
    if not P:
        raise ValueError("at least one place must carry an exponent")
    for p in P:
        if K.sign_at(w1, p) != K.sign_at(w2, p):
            raise DivergentCone(f"generators have opposite signs at place {p}")
    k1 = _min_multiple_in(w1, L)
    k2 = _min_multiple_in(w2, L)
    acc = [Fraction(0)] * 3
    for x1, x2 in parallelepiped_points(w1, w2, k1, k2, z0, L):
        _add_point(acc, x1, x2, flags)
    return _assemble(acc, w1 * k1, w2 * k2)


def _add_point(acc, x1, x2, flags):
    """Accumulate (rational part, coefficient of gamma, coefficient of 1/gamma)."""
    for piece in _expand_point(x1, x2, flags):
        if piece[0] == "ray":
            acc[0] += Fraction(1, 2) - piece[1]
        else:
            _, y1, y2 = piece
            acc[0] += B1(y1) * B1(y2)
            acc[1] += B2(y1) / 2
            acc[2] += B2(y2) / 2


def _assemble(acc, v1: FieldElement, v2: FieldElement) -> FieldElement:
    gamma = v1 / v2
    return v1.K(acc[0]) + gamma * acc[1] + gamma.inverse() * acc[2]


def value_of(alpha: FieldElement, places) -> Fraction:
    """mean_{p in P} rho_p(alpha); must be rational."""
    K = alpha.K
    P = list(places)
    if len(P) == K.n:
        return K.trace(alpha) / K.n
    c = K.coords(alpha)
    if all(v == 0 for v in c[1:]) or _is_rational(alpha):
        return _rational_part(alpha)
    raise NonRationalValue(f"zeta value {alpha} at places {P} is not rational")


def _is_rational(x: FieldElement) -> bool:
    return all(v == 0 for v in x.c[1:])


def _rational_part(x: FieldElement) -> Fraction:
    return Fraction(x.c[0])


def value_numeric(alpha: FieldElement, places, dps: int = 30):
    K = alpha.K
    with mpmath.workdps(dps):
        return sum(K.embed(alpha, p, dps) for p in places) / len(places)


# ---------------------------------------------------------------------------
# numeric oracle: Euler-Maclaurin over Hurwitz zeta, independent enumeration


def _barnes2_numeric(a1, a2, x1, x2, s, K_terms=6):
    """sum_{m >= 0} (a1 (m1 + x1) + a2 (m2 + x2))^{-s} for tiny s, by Euler-Maclaurin in m2."""
    beta = a2 / a1
    z0 = x1 + beta * x2
    total = mpmath.zeta(s - 1, z0) / (beta * (s - 1))
    total += mpmath.zeta(s, z0) / 2
    for k in range(1, K_terms + 1):
        j = 2 * k - 1
        deriv = beta ** j * (-1) ** j * mpmath.rf(s, j) * mpmath.zeta(s + j, z0)
        total -= mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * deriv
    return a1 ** (-s) * total


def oracle_cone_coset_value(gens, flags, z0: FieldElement, L: FracIdeal, places, dps: int = 60):
    """Numeric value at s -> 0 by brute-force enumeration and Hurwitz zeta sums."""
    K = L.K
    w1, w2 = gens
    P = list(places)
    k1 = next(k for k in range(1, 10 ** 7) if L.contains(w1 * k))
    k2 = next(k for k in range(1, 10 ** 7) if L.contains(w2 * k))
    v1, v2 = w1 * k1, w2 * k2
    d1, d2 = K.dual_elements([v1, v2])
    b1, b2 = L.basis()
    # reduce z0 modulo L into a small box, then scan a box of L-translates
    M = [[K.trace(d1 * b1), K.trace(d1 * b2)], [K.trace(d2 * b1), K.trace(d2 * b2)]]
    Minv = linalg.rational_inverse(M)
    zc = [K.trace(d1 * z0), K.trace(d2 * z0)]
    corners = [(0, 0), (1, 0), (0, 1), (1, 1)]
    ij = []
    for c in corners:
        target = [Fraction(c[0]) - zc[0], Fraction(c[1]) - zc[1]]
        ij.append([Minv[r][0] * target[0] + Minv[r][1] * target[1] for r in range(2)])
    lo = [int(mpmath.floor(min(p[r] for p in ij))) - 1 for r in range(2)]
    hi = [int(mpmath.ceil(max(p[r] for p in ij))) + 1 for r in range(2)]
    pts = []
    for i in range(lo[0], hi[0] + 1):
        for j in range(lo[1], hi[1] + 1):
            z = z0 + b1 * i + b2 * j
            u1, u2 = K.trace(d1 * z), K.trace(d2 * z)
            if 0 <= u1 < 1 and 0 <= u2 < 1:
                pts.append((u1, u2))
    with mpmath.workdps(dps):
        s = mpmath.mpf(10) ** (-25)
        total = mpmath.mpf(0)
        emb = [(abs(K.embed(v1, p, dps)), abs(K.embed(v2, p, dps))) for p in P]
        for u1, u2 in pts:
            opts = []
            for x, f in ((u1, flags[0]), (u2, flags[1])):
                if x != 0:
                    opts.append([x])
                elif f:
                    opts.append([0, 1])
                else:
                    opts.append([1])
            for y1 in opts[0]:
                for y2 in opts[1]:
                    if y1 == 0 and y2 == 0:
                        continue
                    if y1 == 0 or y2 == 0:
                        y = y2 if y1 == 0 else y1
                        total += mpmath.zeta(len(P) * s, mpmath.mpf(y.numerator) / y.denominator)
                        continue
                    acc = mpmath.mpf(0)
                    for a1, a2 in emb:
                        acc += _barnes2_numeric(a1, a2, mpmath.mpf(y1.numerator) / y1.denominator,
                                                mpmath.mpf(y2.numerator) / y2.denominator, len(P) * s)
                    total += acc / len(P)
        return total, len(pts)


def cone_zeta_at_zero(cone, lattice: FracIdeal, z0: FieldElement, places):
    """Xi-weighted value at 0 of the cone sum over z0 + lattice.

    Rational when every real place carries an exponent; otherwise the value is
    the embedding at the single exponent place of the returned field element.
    """
    if cone.s == 0:
        return Fraction(0)
    alpha = cone_coset_value(cone.gens, cone.flags, z0, lattice, places) * cone.s
    if len(list(places)) == lattice.K.n or _is_rational(alpha):
        return value_of(alpha, places)
    return alpha


# ---------------------------------------------------------------------------
# zeta_f graded by N_{W-bar}


class UnsupportedMFunction(ValueError):
    """M-function not supported on elements prime to S_f."""


class GradedZetaValue:
    def __init__(self, G, values: dict, collapsed, smoothed: bool):
        from .places import NGroupRingElt

        self.G = G
        self.values = {y: v for y, v in values.items() if v}
        self.collapsed = frozenset(collapsed)
        self.element = NGroupRingElt(G, {y.inverse(): v for y, v in self.values.items()}, self.collapsed)
        self.smoothed = smoothed

    def is_integral(self) -> bool:
        return all(Fraction(v).denominator == 1 for v in self.values.values())

    def __neg__(self):
        return GradedZetaValue(self.G, {y: -v for y, v in self.values.items()}, self.collapsed, self.smoothed)

    def __eq__(self, other):
        return isinstance(other, GradedZetaValue) and self.values == other.values and self.collapsed == other.collapsed

    def __repr__(self):
        return f"GradedZetaValue({self.element!r})"


def w_bar(places, W) -> list:
    W = set(W)
    return [v for v in places.S if v in W or v not in places.V]


def check_support(f, S_f, samples: int = 60) -> None:
    """Reject f if it is visibly nonzero at small elements with nonzero S_f-valuation."""
    K = f.K
    seen = 0
    for _c, _cone, I in f.terms:
        for x in I.box_points(6):
            if seen >= samples:
                return
            if any(K.ideal(x).valuation(P) != 0 for P in S_f):
                seen += 1
                if f(x) != 0:
                    raise UnsupportedMFunction(f"f({x}) = {f(x)} although x is not prime to S_f")


def zeta_f(f, G, W, smoothed: bool = True, verify_support: bool = True) -> GradedZetaValue:
    """zeta_f(0) = sum_y zeta_{f,y}(0) [y^{-1}] in Z[N_{W-bar}].

    Each term of f is restricted to elements prime to the finite places of
    W-bar (f itself vanishes there), its support split into parallelepiped cells, and each cell graded
    by the local classes at W-bar.
    """
    from .places import is_infinite

    K = f.K
    _check_degree(K)
    places = G.places
    Wb = w_bar(places, W)
    collapsed = [v for v in places.S if v not in Wb]
    P = [v.index for v in Wb if is_infinite(v)]
    # f need only vanish off elements prime to the finite places of W-bar
    S_f = [Q for Q in places.S_f if Q in Wb]
    fin_grade = [Q for Q in S_f if G.res[Q] is not None]
    inf_grade = [v for v in Wb if is_infinite(v) and G.level.flag(v.index)]
    if verify_support and S_f:
        check_support(f, S_f)
    M = K.unit_ideal
    for Q in S_f:
        M = M * Q.ideal ** (G.level.m.get(Q, 1) if Q in fin_grade else 1)
    acc_alpha: dict = {}
    for c, cone, I in f.terms:
        if cone.s == 0 or c == 0:
            continue
        b = I
        skip = False
        for Q in S_f:
            k = b.valuation(Q)
            if k > 0:
                skip = True
                break
            if k < 0:
                b = b * Q.ideal ** (-k)
        if skip:
            continue
        for p in P:
            if K.sign_at(cone.gens[0], p) != K.sign_at(cone.gens[1], p):
                raise DivergentCone(f"generators have opposite signs at place {p}")
        w1, w2 = cone.gens
        L = b * M
        k1, k2 = _min_multiple_in(w1, L), _min_multiple_in(w2, L)
        v1, v2 = w1 * k1, w2 * k2
        bad = [Q.ideal * b for Q in S_f]
        signs = {v: K.sign_at(w1, v.index) for v in inf_grade}
        per_y: dict = {}
        for u1, u2 in parallelepiped_points(w1, w2, k1, k2, K(0), b):
            x = v1 * u1 + v2 * u2
            if any(B.contains(x) for B in bad):
                continue
            comps = dict(signs)
            for Q in fin_grade:
                comps[Q] = (0, G.res[Q].reduce(x))
            y = G.make(comps)
            acc = per_y.setdefault(y, [Fraction(0)] * 3)
            _add_point(acc, u1, u2, cone.flags)
        for y, acc in per_y.items():
            alpha = _assemble(acc, v1, v2) * (c * cone.s)
            acc_alpha[y] = acc_alpha[y] + alpha if y in acc_alpha else alpha
    values = {}
    for y, alpha in acc_alpha.items():
        val = value_of(alpha, P)
        if val:
            values[y] = val
    out = GradedZetaValue(G, values, collapsed, smoothed)
    if smoothed and not out.is_integral():
        raise ArithmeticError(f"T-smoothed zeta value is not integral: {out.values}")
    return out


# ---------------------------------------------------------------------------
# Stickelberger element from partial zeta values of ray classes


class StickelbergerElement:
    def __init__(self, element, provenance: str, per_class: dict | None = None):
        self.element = element
        self.provenance = provenance
        self.per_class = per_class or {}

    def __repr__(self):
        return f"StickelbergerElement({self.provenance}: {self.element!r})"


def _eta_mod(K: NumberField, Rbig) -> FieldElement:
    """Generator of totally positive units congruent to 1 modulo the finite modulus."""
    e = K.totally_positive_units[0]
    x = e
    while Rbig.res is not None and Rbig.res.reduce(x) != Rbig.res.one:
        x = x * e
    return x


def ray_partial_zetas(K: NumberField, modulus: dict, avoid=()) -> tuple:
    """zeta_m(0, c) for every narrow ray class c mod m, with representative ideals.

    The ideals a = alpha * b in the class of b correspond to alpha in
    (1 + m b^{-1}) cap F_+, taken modulo the units eta generating E_+ cap (1 + m).
    """
    from .galois import class_representatives
    from .groups import RayClassStructure

    _check_degree(K)
    Rbig = RayClassStructure(K, modulus, (True,) * K.n)
    reps = class_representatives(Rbig, avoid)
    eta = _eta_mod(K, Rbig)
    m_ideal = Rbig.m
    out = {}
    for c, b in reps.items():
        L = m_ideal * b.inverse()
        # half-open cone: ray of 1 included, ray of eta excluded
        alpha = cone_coset_value((K(1), eta), (False, True), K(1), L, range(K.n))
        out[c] = value_of(alpha, range(K.n))
    return Rbig, reps, out


def theta_per_class(target, places, max_subsets: int = 12) -> dict:
    """Theta_{E,S,T}(0, C) for every narrow class C, from ray class partial zeta values."""
    from .groups import GroupRingElt, RayClassStructure

    K = target.K
    _check_degree(K)
    level = target.N.level
    modulus = {P: level.m.get(P, 1) for P in places.S_f if level.m.get(P, 1) > 0}
    R0 = [P for P in places.S_f if P not in modulus]
    T = list(places.T)
    Rbig, reps, z = ray_partial_zetas(K, modulus, avoid=list(places.S_f) + T)
    narrow = RayClassStructure(K, {}, (True,) * K.n)
    Gal = target.group
    cls_narrow = {c: narrow.artin(b) for c, b in reps.items()}
    sigma = {c: target.artin(b) for c, b in reps.items()}
    # Theta_m(C') = sum_{c -> C'} zeta_m(0,c) [sigma_c^{-1}]
    base = {}
    for c, val in z.items():
        C = cls_narrow[c]
        d = base.setdefault(C, {})
        g = Gal.neg(sigma[c])
        d[g] = d.get(g, 0) + val
    # Euler factors: removed primes of S_f outside the modulus, T-smoothing
    factors = []
    for P in R0:
        factors.append((P, -1))
    for Q in T:
        factors.append((Q, -Q.norm))
    if len(factors) > max_subsets:
        raise ValueError("too many Euler factors")
    terms = [(K.unit_ideal, 1)]
    for P, w in factors:
        terms = terms + [(I * P.ideal, c * w) for I, c in terms]
    out = {}
    for C in narrow.group.elements():
        acc = {}
        for I, coef in terms:
            shift_n = narrow.artin(I)
            shift_g = target.artin(I)
            src = narrow.group.sub(C, shift_n)
            for g, val in base.get(src, {}).items():
                h = Gal.sub(g, shift_g)
                acc[h] = acc.get(h, 0) + coef * val
        out[C] = GroupRingElt(Gal, acc)
    return out


def theta_oracle(target, places) -> StickelbergerElement:
    from .groups import GroupRingElt

    per = theta_per_class(target, places)
    total = GroupRingElt(target.group, {})
    for v in per.values():
        total = total + v
    return StickelbergerElement(total, "oracle", per)

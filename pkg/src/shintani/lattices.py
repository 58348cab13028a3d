"""Z[G]-lattices, the star modules (M, G)^r_*, the maps P, Q-bar and R, and the e_chi filter."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import factorial, gcd

import sympy

from . import linalg
from .groups import FinAbGroup, GroupRingElt


def _perm_sign(p) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            s = -s
    return s


class ZGLattice:
    """M = Z^d with G acting through integer matrices (acting on column vectors)."""

    def __init__(self, G: FinAbGroup, action: dict):
        self.G = G
        self.action = {g: [list(map(int, r)) for r in action[g]] for g in G.elements()}
        self.d = len(self.action[G.zero])
        self._check()

    def _check(self):
        G = self.G
        one = linalg.identity(self.d)
        if self.action[G.zero] != one:
            raise ValueError("identity does not act trivially")
        for g in G.elements():
            if abs(linalg.det(self.action[g])) != 1:
                raise ValueError("action matrix is not invertible over Z")
            for h in G.elements():
                if linalg.matmul(self.action[g], self.action[h]) != self.action[G.add(g, h)]:
                    raise ValueError("matrices do not define a G-action")

    def act(self, g, m) -> tuple:
        A = self.action[g]
        return tuple(sum(a * x for a, x in zip(row, m)) for row in A)

    @classmethod
    def regular(cls, G: FinAbGroup):
        els = G.elements()
        idx = {g: i for i, g in enumerate(els)}
        action = {}
        for g in els:
            A = [[0] * len(els) for _ in els]
            for h in els:
                A[idx[G.add(g, h)]][idx[h]] = 1
            action[g] = A
        return cls(G, action)

    @classmethod
    def direct_sum(cls, parts):
        G = parts[0].G
        d = sum(p.d for p in parts)
        action = {}
        for g in G.elements():
            A = [[0] * d for _ in range(d)]
            off = 0
            for p in parts:
                for i in range(p.d):
                    for j in range(p.d):
                        A[off + i][off + j] = p.action[g][i][j]
                off += p.d
            action[g] = A
        return cls(G, action)

    @classmethod
    def trivial(cls, G: FinAbGroup, d: int = 1):
        return cls(G, {g: linalg.identity(d) for g in G.elements()})

    def conjugate(self, U):
        """Same module in the basis given by the unimodular matrix U."""
        Ui = [[int(x) for x in row] for row in linalg.rational_inverse(U)]
        return ZGLattice(self.G, {g: linalg.matmul(linalg.matmul(Ui, A), U) for g, A in self.action.items()})

    @classmethod
    def random(cls, G: FinAbGroup, rng: random.Random, max_rank: int = 4):
        parts = []
        budget = max_rank
        while budget > 0:
            kind = rng.choice(["regular", "trivial", "twist"] if G.order <= budget else ["trivial", "twist"])
            if kind == "regular":
                parts.append(cls.regular(G))
                budget -= G.order
            elif kind == "twist" and any(G.element_order(g) == 2 for g in G.elements()):
                chi = _random_sign_character(G, rng)
                parts.append(cls(G, {g: [[chi[g]]] for g in G.elements()}))
                budget -= 1
            else:
                parts.append(cls.trivial(G))
                budget -= 1
            if rng.random() < 0.4:
                break
        M = cls.direct_sum(parts)
        return M.conjugate(_random_unimodular(M.d, rng))


def _random_sign_character(G: FinAbGroup, rng: random.Random) -> dict:
    while True:
        vals = [rng.choice([1, -1]) if d % 2 == 0 else 1 for d in G.invariants]
        chi = {g: (-1) ** sum(a for a, v in zip(g, vals) if v == -1) for g in G.elements()}
        if any(c == -1 for c in chi.values()) or G.order % 2:
            return chi


def _random_unimodular(d: int, rng: random.Random):
    U = linalg.identity(d)
    for _ in range(3 * d):
        i, j = rng.sample(range(d), 2) if d > 1 else (0, 0)
        if i == j:
            continue
        k = rng.randint(-2, 2)
        for r in range(d):
            U[r][j] += k * U[r][i]
    return U


# ---------------------------------------------------------------------------
# tensors in (tensor^r M)[G] as {(i_1..i_r, g): coefficient}


class Tensor:
    __slots__ = ("M", "r", "c")

    def __init__(self, M: ZGLattice, r: int, coeffs=None):
        self.M = M
        self.r = r
        d = {}
        for k, v in (coeffs or {}).items():
            d[k] = d.get(k, 0) + v
        self.c = {k: v for k, v in d.items() if v}

    def __add__(self, other):
        d = dict(self.c)
        for k, v in other.c.items():
            d[k] = d.get(k, 0) + v
        return Tensor(self.M, self.r, d)

    def __neg__(self):
        return Tensor(self.M, self.r, {k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a):
        return Tensor(self.M, self.r, {k: v * a for k, v in self.c.items()})

    def __eq__(self, other):
        return isinstance(other, Tensor) and self.c == other.c

    def is_zero(self):
        return not self.c

    def is_integral(self) -> bool:
        return all(Fraction(v).denominator == 1 for v in self.c.values())

    @classmethod
    def pure(cls, M: ZGLattice, vecs, g, coeff=1):
        """coeff * v_1 (x) ... (x) v_r (x) [g] for coordinate vectors v_j."""
        d: dict = {}
        _accumulate_pure(d, vecs, g, coeff)
        return cls(M, len(vecs), d)

    def group_act(self, s):
        """sigma(m (x) [tau]) = m (x) [sigma tau]."""
        G = self.M.G
        return Tensor(self.M, self.r, {(i, G.add(s, g)): v for (i, g), v in self.c.items()})

    def c_sigma(self, s):
        """m_1^sigma (x) m_2 (x) ... (x) [tau]."""
        A = self.M.action[s]
        d = {}
        for (idx, g), v in self.c.items():
            j = idx[0]
            for i in range(self.M.d):
                a = A[i][j]
                if a:
                    key = ((i,) + idx[1:], g)
                    d[key] = d.get(key, 0) + a * v
        return Tensor(self.M, self.r, d)

    def permute(self, p):
        """(f m) puts the j-th factor in slot p[j]."""
        d = {}
        for (idx, g), v in self.c.items():
            new = [0] * self.r
            for j, i in enumerate(idx):
                new[p[j]] = i
            key = (tuple(new), g)
            d[key] = d.get(key, 0) + v
        return Tensor(self.M, self.r, d)

    def is_star(self) -> bool:
        for p in itertools.permutations(range(self.r)):
            if self.permute(p) != self.scale(_perm_sign(p)):
                return False
        G = self.M.G
        return all(self.c_sigma(s) == self.group_act(s) for s in G.elements())

    def contract(self, ls) -> GroupRingElt:
        """(l_1 (x) ... (x) l_r (x) id)(m) for Z-linear forms l_j (coordinate vectors)."""
        d = {}
        for (idx, g), v in self.c.items():
            c = v
            for l, i in zip(ls, idx):
                c *= l[i]
            if c:
                d[g] = d.get(g, 0) + c
        return GroupRingElt(self.M.G, d)

    def vector(self, keys) -> list:
        return [self.c.get(k, 0) for k in keys]


def _accumulate_pure(d: dict, vecs, g, coeff) -> None:
    for idx in itertools.product(*[[(i, x) for i, x in enumerate(v) if x] for v in vecs]):
        key = (tuple(i for i, _ in idx), g)
        c = coeff
        for _, x in idx:
            c *= x
        d[key] = d.get(key, 0) + c


def tensor_keys(M: ZGLattice, r: int) -> list:
    return [(idx, g) for idx in itertools.product(range(M.d), repeat=r) for g in M.G.elements()]


# ---------------------------------------------------------------------------
# wedges over Q[G], compared through the values of phi_1 ^ ... ^ phi_r


class Wedge:
    """Finite sum of a_k [g_k] m_{k,1} ^ ... ^ m_{k,r} in Q wedge^r_{Z[G]} M."""

    def __init__(self, M: ZGLattice, r: int, terms=None):
        self.M = M
        self.r = r
        self.terms = list(terms or [])  # (coeff, g, [vectors])

    def __add__(self, other):
        return Wedge(self.M, self.r, self.terms + other.terms)

    def scale(self, a):
        return Wedge(self.M, self.r, [(c * a, g, vs) for c, g, vs in self.terms])

    @classmethod
    def pure(cls, M, vecs, coeff=1, g=None):
        return cls(M, len(vecs), [(coeff, M.G.zero if g is None else g, [tuple(v) for v in vecs])])

    def coordinates(self) -> dict:
        """det(l-hat_{i_a}(m_b)) in Q[G] for each sorted r-subset of the dual basis."""
        M = self.M
        out = {}
        for I in itertools.combinations(range(M.d), self.r):
            total = GroupRingElt(M.G)
            for c, g, vs in self.terms:
                mat = [[hat(M, i, v) for v in vs] for i in I]
                total = total + group_ring_det(mat, M.G) * GroupRingElt(M.G, {g: c})
            out[I] = total
        return out

    def __eq__(self, other):
        return self.coordinates() == other.coordinates()


def hat(M: ZGLattice, i: int, m) -> GroupRingElt:
    """l-hat(m) = sum_sigma l(m^{sigma^{-1}}) [sigma] for the i-th coordinate form l."""
    G = M.G
    return GroupRingElt(G, {s: M.act(G.neg(s), m)[i] for s in G.elements()})


def group_ring_det(mat, G) -> GroupRingElt:
    n = len(mat)
    total = GroupRingElt(G)
    for p in itertools.permutations(range(n)):
        term = GroupRingElt(G, {G.zero: _perm_sign(p)})
        for i in range(n):
            term = term * mat[i][p[i]]
        total = total + term
    return total


def P_map(w: Wedge) -> Tensor:
    """P(m_1 ^ ... ^ m_r) = sum_f sgn(f) (x)_j (sum_sigma m_{f(j)}^{sigma^{-1}} [sigma])."""
    M, r = w.M, w.r
    G = M.G
    acc: dict = {}
    for c, g0, vs in w.terms:
        orbit = {s: [M.act(G.neg(s), v) for v in vs] for s in G.elements()}
        for f in itertools.permutations(range(r)):
            sg = _perm_sign(f) * c
            for sig in itertools.product(G.elements(), repeat=r):
                vecs = [orbit[s][f[j]] for j, s in enumerate(sig)]
                g = g0
                for s in sig:
                    g = G.add(g, s)
                _accumulate_pure(acc, vecs, g, sg)
    return Tensor(M, r, acc)


def Qbar_map(t: Tensor) -> Wedge:
    """Q-bar(m_1 (x) ... (x) m_r [sigma]) = m_1 ^ ... ^ m_r^sigma / ((#G)^r r!)."""
    M, r = t.M, t.r
    scale = Fraction(1, M.G.order ** r * factorial(r))
    terms = []
    for (idx, g), v in t.c.items():
        vecs = [tuple(1 if k == i else 0 for k in range(M.d)) for i in idx]
        vecs[-1] = M.act(g, vecs[-1])
        terms.append((v * scale, M.G.zero, vecs))
    return Wedge(M, r, terms)


def R_map(t: Tensor) -> Tensor:
    """The projector P o Q-bar, written out directly."""
    M, r = t.M, t.r
    G = M.G
    scale = Fraction(1, G.order ** r * factorial(r))
    acc: dict = {}
    for (idx, tau), v in t.c.items():
        base = [tuple(1 if k == i else 0 for k in range(M.d)) for i in idx]
        orbit = {s: [M.act(G.neg(s), b) for b in base] for s in G.elements()}
        for f in itertools.permutations(range(r)):
            for sig in itertools.product(G.elements(), repeat=r):
                vecs = [orbit[s][f[j]] for j, s in enumerate(sig)]
                g = tau
                for s in sig:
                    g = G.add(g, s)
                _accumulate_pure(acc, vecs, g, v * scale * _perm_sign(f))
    return Tensor(M, r, acc)


def in_wedge0(w: Wedge) -> bool:
    """m in wedge_0^r M iff P(m) is integral."""
    return P_map(w).is_integral()


def in_wedge0_brute(w: Wedge, rng: random.Random, trials: int = 30) -> bool:
    """Direct test of (phi_1 ^ ... ^ phi_r)(m) in Z[G] on coordinate forms and random Z[G]-combinations."""
    if not all(x.is_integral() for x in w.coordinates().values()):
        return False
    M = w.M
    G = M.G
    for _ in range(trials):
        phis = []
        for _j in range(w.r):
            coeffs = [GroupRingElt(G, {g: rng.randint(-2, 2) for g in G.elements()}) for _ in range(M.d)]
            phis.append(coeffs)
        total = GroupRingElt(G)
        for c, g0, vs in w.terms:
            mat = [[_phi_value(M, phi, v) for v in vs] for phi in phis]
            total = total + group_ring_det(mat, G) * GroupRingElt(G, {g0: c})
        if not total.is_integral():
            return False
    return True


def _phi_value(M, phi, v) -> GroupRingElt:
    total = GroupRingElt(M.G)
    for i, a in enumerate(phi):
        total = total + a * hat(M, i, v)
    return total


# ---------------------------------------------------------------------------
# exact bases


def star_module_basis(M: ZGLattice, r: int) -> list[Tensor]:
    """Z-basis of (M, G)^r_*: integer kernel of the antisymmetry and c_sigma = sigma conditions."""
    keys = tensor_keys(M, r)
    pos = {k: i for i, k in enumerate(keys)}
    conds = []

    def add_condition(fn):
        for k in keys:
            t = Tensor(M, r, {k: 1})
            conds.append(fn(t).vector(keys))

    for j in range(r - 1):
        p = list(range(r))
        p[j], p[j + 1] = p[j + 1], p[j]
        add_condition(lambda t, p=p: t.permute(p) + t)
    G = M.G
    for s in _group_generators(G):
        add_condition(lambda t, s=s: t.c_sigma(s) - t.group_act(s))
    # conds[i] is the image of the i-th basis tensor under the stacked maps; a
    # tensor x = sum x_k e_k is a star element iff sum_k x_k image(e_k) = 0
    rows = []
    n = len(keys)
    blocks = len(conds) // n
    for k in range(n):
        row = []
        for b in range(blocks):
            row.extend(conds[b * n + k])
        rows.append(row)
    ker = linalg.left_kernel(rows)
    return [Tensor(M, r, {keys[i]: v for i, v in enumerate(vec) if v}) for vec in ker] if pos else []


def _group_generators(G: FinAbGroup) -> list:
    k = len(G.invariants)
    return [tuple(1 if i == j else 0 for i in range(k)) for j in range(k)]


def characters(G: FinAbGroup) -> list:
    """All characters as tuples of exponents; chi(g) = prod zeta_{d_i}^{a_i g_i}."""
    return [tuple(a) for a in itertools.product(*(range(d) for d in G.invariants))]


def char_value(G: FinAbGroup, chi, g):
    return sympy.prod([sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(a * x, d)) for a, x, d in zip(chi, g, G.invariants)])


def kernel_of_character(G: FinAbGroup, chi) -> set:
    return {g for g in G.elements() if sum(Fraction(a * x, d) for a, x, d in zip(chi, g, G.invariants)).denominator == 1}


def lambda_filter(M: ZGLattice, r: int, rS) -> list[Tensor]:
    """Basis of {alpha in (M, G)^r_* : e_chi alpha = 0 whenever rS(chi) > r}.

    e_chi alpha = 0 is imposed through its Q-rational shadow: for each Galois
    orbit O of such characters, the idempotent sum_{chi in O} e_chi has
    rational coefficients and kills alpha iff every e_chi in O does.
    """
    G = M.G
    basis = star_module_basis(M, r)
    bad = [chi for chi in characters(G) if rS(chi) > r]
    if not bad or not basis:
        return basis
    idems = []
    seen = set()
    for chi in bad:
        if chi in seen:
            continue
        orbit = _galois_orbit(G, chi)
        seen |= orbit
        if not orbit <= set(bad):
            raise ValueError("r_S must be constant on Galois orbits of characters")
        idems.append(_orbit_idempotent(G, orbit))
    keys = tensor_keys(M, r)
    rows = []
    for b in basis:
        row = []
        for e in idems:
            row.extend(_mul_group_ring(b, e).vector(keys))
        rows.append(_clear(row))
    ker = linalg.left_kernel(rows)
    out = []
    for vec in ker:
        t = Tensor(M, r)
        for c, b in zip(vec, basis):
            if c:
                t = t + b.scale(c)
        out.append(t)
    return out


def _galois_orbit(G: FinAbGroup, chi) -> frozenset:
    n = 1
    for d in G.invariants:
        n = linalg.lcm(n, d)
    return frozenset(tuple((a * k) % d for a, d in zip(chi, G.invariants)) for k in range(1, n + 1) if gcd(k, n) == 1)


def _orbit_idempotent(G: FinAbGroup, orbit) -> GroupRingElt:
    """sum_{chi in orbit} e_chi with e_chi = (1/#G) sum chi(g) [g^{-1}]; rational coefficients."""
    d = {}
    for g in G.elements():
        val = sum(char_value(G, chi, g) for chi in orbit)
        val = sympy.nsimplify(sympy.simplify(sympy.expand_complex(val)))
        q = Fraction(int(sympy.numer(val)), int(sympy.denom(val))) / G.order
        if q:
            d[G.neg(g)] = q
    return GroupRingElt(G, d)


def _mul_group_ring(t: Tensor, e: GroupRingElt) -> Tensor:
    out = Tensor(t.M, t.r)
    for g, c in e.coeffs.items():
        out = out + t.group_act(g).scale(c)
    return out


def _clear(row):
    den = 1
    for x in row:
        den = linalg.lcm(den, Fraction(x).denominator)
    return [int(Fraction(x) * den) for x in row]

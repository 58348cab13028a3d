"""Exact arithmetic in a totally real number field.

Elements are stored on the power basis of a root of the defining polynomial;
ideals are Z-lattices in Hermite normal form over the integral basis. Sign
decisions never trust floating point: quadratic fields use exact comparison
of squares, higher degree uses rational interval refinement of the roots.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt, prod

import mpmath
import sympy

from . import linalg


class NotTotallyReal(ValueError):
    pass


class Reducible(ValueError):
    pass


class UnverifiedUnits(ValueError):
    pass


class MissingUnitInput(ValueError):
    pass


def _squarefree_part(n: int) -> tuple[int, int]:
    """n = f^2 * d with d squarefree; returns (d, f)."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    f = 1
    for p, k in sympy.factorint(n).items():
        f *= p ** (k // 2)
    return sign * (n // (f * f)), f


def _denominator_lcm(values) -> int:
    d = 1
    for v in values:
        d = linalg.lcm(d, Fraction(v).denominator)
    return d


class FieldElement:
    __slots__ = ("K", "c")

    def __init__(self, K: "NumberField", coeffs):
        self.K = K
        self.c = tuple(Fraction(v) for v in coeffs)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, Fraction)):
            return self.K(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.K, [a + b for a, b in zip(self.c, other.c)])

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.K, [-a for a in self.c])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElement(self.K, [a - b for a, b in zip(self.c, other.c)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.K, [a * other for a in self.c])
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.K._mul(self, other)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        return self.K._inverse(self)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.K, [a / other for a in self.c])
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.K(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.K(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.c == other.c

    def __hash__(self):
        return hash(self.c)

    def is_zero(self) -> bool:
        return not any(self.c)

    def __bool__(self):
        return not self.is_zero()

    def norm(self) -> Fraction:
        return self.K.norm(self)

    def trace(self) -> Fraction:
        return self.K.trace(self)

    def coords(self) -> list[Fraction]:
        return self.K.coords(self)

    def sign_vector(self) -> tuple[int, ...]:
        return self.K.sign_vector(self)

    def sgn(self) -> int:
        return prod(self.sign_vector())

    def is_totally_positive(self) -> bool:
        return all(s > 0 for s in self.sign_vector())

    def conjugate(self) -> "FieldElement":
        """Nontrivial conjugate (quadratic fields only)."""
        return self.K.conjugate(self)

    def __repr__(self):
        return f"FieldElement({self.K.format(self)})"

    def __str__(self):
        return self.K.format(self)


@dataclass(frozen=True)
class Prime:
    """A prime ideal together with its residue characteristic, e and f."""

    ideal: "FracIdeal"
    p: int
    e: int
    f: int

    @property
    def norm(self) -> int:
        return self.p ** self.f

    def __repr__(self):
        return f"Prime(p={self.p}, e={self.e}, f={self.f}, {self.ideal!r})"


class NumberField:
    """A totally real number field given by a monic integer polynomial.

    ``poly`` lists coefficients from the leading one down, e.g. ``[1, 0, -5]``.
    Embeddings are ordered by decreasing real root, so for ``x^2 - 5`` the
    first embedding sends the root to ``+sqrt(5)``.
    """

    def __init__(self, poly, integral_basis=None, units=None, name=None):
        poly = [int(a) for a in poly]
        if poly[0] != 1:
            raise ValueError("defining polynomial must be monic")
        self.poly = poly
        self.n = n = len(poly) - 1
        self.name = name
        x = sympy.Symbol("x")
        P = sympy.Poly(poly, x)
        if n > 1 and not P.is_irreducible:
            raise Reducible(f"{poly} is reducible over Q")
        if P.count_roots() != n or len(set(P.real_roots())) != n:
            raise NotTotallyReal(f"{poly} has non-real roots")
        self._sympoly = P
        # theta^k reduced mod poly, k < 2n - 1
        low = [Fraction(-a) for a in reversed(poly[1:])]  # theta^n = sum low[i] theta^i
        red = [[Fraction(int(i == k)) for i in range(n)] for k in range(n)]
        for k in range(n, 2 * n - 1):
            prev = red[-1]
            nxt = [Fraction(0)] + prev[:-1]
            top = prev[-1]
            nxt = [a + top * b for a, b in zip(nxt, low)]
            red.append(nxt)
        self._red = red
        ivs = P.intervals()
        self._intervals = sorted(
            ([Fraction(a), Fraction(b)] for (a, b), _ in ivs), key=lambda iv: -iv[0]
        )
        self._disc_poly = int(sympy.discriminant(P))
        if n == 2:
            self._quad_setup()
        if integral_basis is None:
            integral_basis = self._default_integral_basis()
        self.basis = [self.element(b) for b in integral_basis]
        self._B = [list(b.c) for b in self.basis]
        self._Binv = linalg.rational_inverse(self._B)
        if abs(self.discriminant) != abs(Fraction(self._disc_poly)) / self.index ** 2:
            raise ValueError("inconsistent integral basis")
        self._supplied_units = units

    # --- construction helpers -------------------------------------------------
    def _quad_setup(self):
        _, b, c = self.poly
        delta = b * b - 4 * c
        d, f = _squarefree_part(delta)
        self.d = d
        self._sqrt_delta_f = f  # sqrt(delta) = f * sqrt(d)
        # sqrt(d) = (2 theta + b) / f
        self.sqrt_d = FieldElement(self, [Fraction(b, f), Fraction(2, f)])

    def _default_integral_basis(self):
        n = self.n
        if n == 1:
            return [[1]]
        if n == 2:
            s = self.sqrt_d
            if self.d % 4 == 1:
                w = (s + 1) / 2
            else:
                w = s
            return [[1, 0], list(w.c)]
        for p, k in sympy.factorint(abs(self._disc_poly)).items():
            if k > 1 and not _dedekind_p_maximal(self.poly, p):
                raise ValueError(
                    f"Z[theta] is not {p}-maximal; supply integral_basis"
                )
        return [[int(i == j) for i in range(n)] for j in range(n)]

    def __call__(self, v) -> FieldElement:
        if isinstance(v, FieldElement):
            return v
        return FieldElement(self, [v] + [0] * (self.n - 1))

    def element(self, coeffs) -> FieldElement:
        coeffs = list(coeffs) + [0] * (self.n - len(coeffs))
        return FieldElement(self, coeffs)

    def from_basis(self, coords) -> FieldElement:
        c = [Fraction(0)] * self.n
        for a, row in zip(coords, self._B):
            if a:
                for i, b in enumerate(row):
                    c[i] += a * b
        return FieldElement(self, c)

    @property
    def theta(self) -> FieldElement:
        return self.element([0, 1])

    def coords(self, x: FieldElement) -> list[Fraction]:
        n = self.n
        return [sum(x.c[i] * self._Binv[i][j] for i in range(n)) for j in range(n)]

    def int_coords(self, x: FieldElement) -> list[int]:
        c = self.coords(x)
        if any(v.denominator != 1 for v in c):
            raise ValueError(f"{x} is not integral")
        return [int(v) for v in c]

    def is_integral(self, x: FieldElement) -> bool:
        return all(v.denominator == 1 for v in self.coords(x))

    # --- arithmetic -----------------------------------------------------------
    def _mul(self, x: FieldElement, y: FieldElement) -> FieldElement:
        n = self.n
        prodc = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(x.c):
            if a:
                for j, b in enumerate(y.c):
                    if b:
                        prodc[i + j] += a * b
        out = [Fraction(0)] * n
        for k, a in enumerate(prodc):
            if a:
                for i, r in enumerate(self._red[k]):
                    if r:
                        out[i] += a * r
        return FieldElement(self, out)

    def mult_matrix(self, x: FieldElement) -> list[list[Fraction]]:
        """Matrix of multiplication by x on the power basis (rows = images)."""
        rows = []
        for k in range(self.n):
            rows.append(list(self._mul(x, self.element([0] * k + [1])).c))
        return rows

    def norm(self, x: FieldElement) -> Fraction:
        if self.n == 2:
            a, b = x.c
            _, p, q = self.poly
            # N(a + b t) = a^2 - a b p + b^2 q  for t^2 + p t + q = 0
            return a * a - a * b * p + b * b * q
        return Fraction(linalg.det(self.mult_matrix(x)))

    def trace(self, x: FieldElement) -> Fraction:
        M = self.mult_matrix(x)
        return sum(M[i][i] for i in range(self.n))

    def _inverse(self, x: FieldElement) -> FieldElement:
        if x.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.n == 2:
            return x.conjugate() / self.norm(x)
        # solve x * y = 1 on the power basis
        M = self.mult_matrix(x)
        sol = linalg.rational_solve(linalg.transpose(M), [Fraction(int(i == 0)) for i in range(self.n)])
        return FieldElement(self, sol)

    def conjugate(self, x: FieldElement) -> FieldElement:
        if self.n != 2:
            raise NotImplementedError("conjugation only for quadratic fields")
        a, b = x.c
        p = self.poly[1]
        # t -> -p - t
        return FieldElement(self, [a - b * p, -b])

    @cached_property
    def discriminant(self) -> Fraction:
        T = [[self.trace(a * b) for b in self.basis] for a in self.basis]
        return Fraction(linalg.det(T))

    @cached_property
    def index(self) -> Fraction:
        """[O_F : Z[theta]]."""
        return abs(1 / Fraction(linalg.det(self._B)))

    @cached_property
    def dual_basis(self) -> list[FieldElement]:
        T = [[self.trace(a * b) for b in self.basis] for a in self.basis]
        Ti = linalg.rational_inverse(T)
        return [sum((self.basis[k] * Ti[i][k] for k in range(self.n)), self(0)) for i in range(self.n)]

    def det(self, xs) -> Fraction:
        """Determinant of the integral-basis coordinate matrix of n elements."""
        return Fraction(linalg.det([self.coords(x) for x in xs]))

    def dual_elements(self, xs) -> list[FieldElement] | None:
        """Trace-dual basis x_i^* with Tr(x_i^* x_j) = delta_ij, or None if dependent."""
        n = self.n
        T = [[self.trace(a * b) for b in xs] for a in xs]
        if linalg.det(T) == 0:
            return None
        Ti = linalg.rational_inverse(T)
        return [sum((xs[k] * Ti[i][k] for k in range(n)), self(0)) for i in range(n)]

    # --- embeddings and signs -------------------------------------------------
    def _refine(self, k: int):
        lo, hi = self._intervals[k]
        mid = (lo + hi) / 2
        P = self._sympoly
        pm = P.eval(sympy.Rational(mid.numerator, mid.denominator))
        if pm == 0:
            self._intervals[k] = [mid, mid]
            return
        plo = P.eval(sympy.Rational(lo.numerator, lo.denominator))
        if (plo < 0) == (pm < 0):
            self._intervals[k] = [mid, hi]
        else:
            self._intervals[k] = [lo, mid]

    def _eval_interval(self, x: FieldElement, k: int):
        lo, hi = self._intervals[k]
        rlo, rhi = Fraction(0), Fraction(0)
        for a in reversed(x.c):
            cands = [rlo * lo, rlo * hi, rhi * lo, rhi * hi]
            rlo, rhi = min(cands) + a, max(cands) + a
        return rlo, rhi

    def sign_at(self, x: FieldElement, k: int) -> int:
        if x.is_zero():
            raise ValueError("sign of zero")
        if self.n == 1:
            return 1 if x.c[0] > 0 else -1
        if self.n == 2:
            a, b = x.c
            p = self.poly[1]
            u = a - b * p / 2
            v = b / 2 * self._sqrt_delta_f  # x = u + v sqrt(d), sign of sqrt(d) by k
            if k == 1:
                v = -v
            if u >= 0 and v >= 0:
                return 1
            if u <= 0 and v <= 0:
                return -1
            # opposite signs: compare u^2 with v^2 d
            big_u = u * u > v * v * self.d
            return (1 if u > 0 else -1) if big_u else (1 if v > 0 else -1)
        for _ in range(400):
            lo, hi = self._eval_interval(x, k)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            self._refine(k)
        raise ArithmeticError("sign refinement did not terminate")

    def sign_vector(self, x: FieldElement) -> tuple[int, ...]:
        return tuple(self.sign_at(x, k) for k in range(self.n))

    def sgn(self, x: FieldElement) -> int:
        return prod(self.sign_vector(x))

    def embed(self, x: FieldElement, k: int, dps: int = 30):
        """Numeric value of the k-th real embedding at `dps` digits."""
        with mpmath.workdps(dps + 10):
            r = self.root(k, dps)
            val = mpmath.mpf(0)
            for a in reversed(x.c):
                val = val * r + mpmath.mpf(a.numerator) / a.denominator
            return +val

    def root(self, k: int, dps: int = 30):
        with mpmath.workdps(dps + 10):
            if self.n == 2:
                _, b, c = self.poly
                s = mpmath.sqrt(b * b - 4 * c)
                return (-b + s) / 2 if k == 0 else (-b - s) / 2
            lo, hi = self._intervals[k]
            f = lambda t: mpmath.polyval(self.poly, t)
            return mpmath.findroot(f, (mpmath.mpf(lo.numerator) / lo.denominator, mpmath.mpf(hi.numerator) / hi.denominator), solver="anderson")

    def format(self, x: FieldElement) -> str:
        if self.n == 2:
            a, b = x.c
            p = self.poly[1]
            u = a - b * p / 2
            v = b / 2 * self._sqrt_delta_f
            if v == 0:
                return str(u)
            return f"{u}{'+' if v >= 0 else '-'}{abs(v)}*sqrt({self.d})"
        return " + ".join(f"{a}*t^{i}" for i, a in enumerate(x.c) if a) or "0"

    # --- ideals and primes ----------------------------------------------------
    def ideal(self, *gens) -> "FracIdeal":
        return FracIdeal.from_gens(self, [self(g) for g in gens])

    @cached_property
    def unit_ideal(self) -> "FracIdeal":
        return self.ideal(1)

    def _kd_generator(self) -> FieldElement:
        return self.basis[1] if self.n == 2 else self.theta

    def factor_rational_prime(self, p: int) -> list[Prime]:
        if not sympy.isprime(p):
            raise ValueError(f"{p} is not prime")
        gamma = self._kd_generator()
        if self.n == 1:
            return [Prime(self.ideal(p), p, 1, 1)]
        x = sympy.Symbol("x")
        if self.n == 2:
            mp = [1, -int(gamma.trace()), int(gamma.norm())]
            ind = 1
        else:
            mp = self.poly
            ind = self.index
        if Fraction(ind) % p == 0:
            raise NotImplementedError("p divides the index of the Kummer-Dedekind order")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            _, factors = sympy.factor_list(sympy.Poly(mp, x), modulus=p)
        out = []
        for g, e in factors:
            coeffs = [int(c) % p for c in sympy.Poly(g, x).all_coeffs()]
            val = self(0)
            for c in coeffs:
                val = val * gamma + c
            I = FracIdeal.from_gens(self, [self(p), val])
            out.append(Prime(I, p, e, sympy.Poly(g, x).degree()))
        out.sort(key=lambda P: (P.f, P.ideal.rows))
        assert sum(P.e * P.f for P in out) == self.n
        return out

    def primes_above(self, p: int) -> list[Prime]:
        return self.factor_rational_prime(p)

    def prime_of(self, ideal: "FracIdeal") -> Prime:
        N = ideal.norm()
        if N.denominator != 1:
            raise ValueError("not an integral ideal")
        p = sympy.factorint(int(N))
        if len(p) != 1:
            raise ValueError("not a prime ideal")
        (pp,) = p
        for P in self.factor_rational_prime(pp):
            if P.ideal == ideal:
                return P
        raise ValueError("not a prime ideal")

    def primes_up_to(self, bound: int) -> list[Prime]:
        out = []
        for p in sympy.primerange(2, bound + 1):
            for P in self.factor_rational_prime(p):
                if P.norm <= bound:
                    out.append(P)
        out.sort(key=lambda P: (P.norm, P.ideal.rows))
        return out

    # --- units ----------------------------------------------------------------
    @cached_property
    def fundamental_units(self) -> list[FieldElement]:
        if self.n == 1:
            return []
        if self.n == 2:
            return [self._quadratic_fundamental_unit()]
        if not self._supplied_units:
            raise MissingUnitInput("unit generators must be supplied for degree >= 3")
        units = [self(u) if isinstance(u, FieldElement) else self.element(u) for u in self._supplied_units]
        for u in units:
            if not self.is_integral(u) or abs(u.norm()) != 1:
                raise UnverifiedUnits(f"{u} is not a unit")
        if len(units) != self.n - 1:
            raise UnverifiedUnits("wrong number of unit generators")
        logs = [[mpmath.log(abs(self.embed(u, k))) for k in range(self.n - 1)] for u in units]
        if abs(mpmath.det(mpmath.matrix(logs))) < mpmath.mpf(10) ** -10:
            raise UnverifiedUnits("unit generators are multiplicatively dependent")
        return units

    def _quadratic_fundamental_unit(self) -> FieldElement:
        d = self.d
        s = isqrt(d)
        if d % 4 == 1:
            P, Q = 1, 2
        else:
            P, Q = 0, 1
        w = self.basis[1]
        h0, h1 = 0, 1
        k0, k1 = 1, 0
        for _ in range(10000):
            a = (P + s) // Q if Q > 0 else (P + s + 1) // Q
            h0, h1 = h1, a * h1 + h0
            k0, k1 = k1, a * k1 + k0
            eta = self(h1) - w * k1
            if abs(eta.norm()) == 1:
                for cand in (eta, -eta, eta.inverse(), -eta.inverse()):
                    if self.embed(cand, 0) > 1:
                        return cand
            P = a * Q - P
            Q = (d - P * P) // Q
        raise ArithmeticError("continued fraction did not produce a unit")

    @cached_property
    def totally_positive_units(self) -> list[FieldElement]:
        """Generators of E_+ (kernel of the sign map on E)."""
        gens = [self(-1)] + self.fundamental_units
        n = self.n
        # exponent vectors (a_0 mod 2 for -1, a_i) with trivial sign
        rows = []
        for g in gens:
            rows.append([0 if s > 0 else 1 for s in self.sign_vector(g)])
        m = len(gens)
        M = [r + [int(i == j) for j in range(m)] for i, r in enumerate(rows)]
        # relations: combination c with sum c_i rows_i == 0 mod 2
        big = [[2 * int(i == j) for j in range(n)] + [0] * m for i in range(n)]
        H = linalg.hnf(M + big, n + m)
        ker = [row[n:] for row in H if not any(row[:n])]
        out = []
        for vec in ker:
            u = self(1)
            for g, k in zip(gens[1:], vec[1:]):
                u = u * g ** k
            if vec[0] % 2:
                u = -u
            if u != 1 and u != -1:
                if not u.is_totally_positive():
                    u = -u
                assert u.is_totally_positive()
                out.append(u)
        # reduce to a basis (rank n-1, torsion-free)
        return _independent_units(self, out)

    def unit_sign_index(self) -> int:
        """[E : E_+]."""
        gens = [self(-1)] + self.fundamental_units
        vecs = {tuple(0 for _ in range(self.n))}
        for g in gens:
            sv = tuple(0 if s > 0 else 1 for s in self.sign_vector(g))
            vecs |= {tuple((a + b) % 2 for a, b in zip(v, sv)) for v in vecs}
        return len(vecs)

    def unit_log_vector(self, u: FieldElement, dps: int = 30):
        return [mpmath.log(abs(self.embed(u, k, dps))) for k in range(self.n)]

    # --- principal ideals (quadratic) ----------------------------------------
    def principal_generator(self, I: "FracIdeal") -> FieldElement | None:
        """A generator of I, or None if I is not principal (quadratic fields)."""
        if self.n != 2:
            raise NotImplementedError("principal ideal test only for quadratic fields")
        N = I.norm()
        eps = self.fundamental_units[0]
        e1 = self.embed(eps, 0)
        bound = mpmath.sqrt(mpmath.mpf(N.numerator) / N.denominator * e1) * (1 + mpmath.mpf(10) ** -12)
        for x in I.box_points(bound):
            if abs(x.norm()) == N:
                return x
        return None

    def totally_positive_generator(self, I: "FracIdeal") -> FieldElement | None:
        x = self.principal_generator(I)
        if x is None:
            return None
        for u in [self(1), self(-1)] + [s * e for e in self.fundamental_units for s in (1, -1)]:
            if (x * u).is_totally_positive():
                return x * u
        return None

    @cached_property
    def class_number(self) -> int:
        """Class number via the analytic class number formula (real quadratic)."""
        if self.n != 2:
            raise NotImplementedError
        D = int(self.discriminant)
        eps = self.fundamental_units[0]
        with mpmath.workdps(30):
            s = mpmath.mpf(0)
            for a in range(1, D):
                k = kronecker(D, a)
                if k:
                    s += k * mpmath.log(mpmath.sin(mpmath.pi * a / D))
            h = -s / (2 * mpmath.log(self.embed(eps, 0)))
            hi = int(mpmath.nint(h))
            assert abs(h - hi) < mpmath.mpf(10) ** -10
        return hi

    def s_units(self, primes: list[Prime]) -> list[FieldElement]:
        """Generators of O_{F,S}^x modulo torsion: fundamental units plus S-part."""
        gens = list(self.fundamental_units)
        if not primes:
            return gens
        h = self.class_number
        found = []
        for ks in itertools.product(range(h + 1), repeat=len(primes)):
            if not any(ks):
                continue
            I = self.unit_ideal
            for P, k in zip(primes, ks):
                I = I * P.ideal ** k
            if self.principal_generator(I) is not None:
                found.append(list(ks))
        rel = linalg.hnf(found, len(primes))
        for row in rel:
            I = self.unit_ideal
            for P, k in zip(primes, row):
                I = I * P.ideal ** k
            g = self.principal_generator(I)
            gens.append(g)
        return gens

    def __repr__(self):
        return f"NumberField({self.poly})"


def _independent_units(K: NumberField, units: list[FieldElement]) -> list[FieldElement]:
    if K.n == 2:
        # rank one: the smallest unit > 1 among powers generates
        eps = K.fundamental_units[0]
        if eps.is_totally_positive():
            return [eps]
        return [eps * eps]
    logs = [[int(mpmath.nint(v * 10**6)) for v in K.unit_log_vector(u)[:-1]] for u in units]
    keep = []
    for u, l in zip(units, logs):
        trial = [logs[units.index(k)] for k in keep] + [l]
        if linalg.hnf(trial) and len(linalg.hnf(trial)) == len(trial):
            keep.append(u)
    return keep[: K.n - 1]


def _dedekind_p_maximal(poly, p: int) -> bool:
    """Dedekind's criterion: is Z[theta] maximal at p?"""
    x = sympy.Symbol("x")
    f = sympy.Poly(poly, x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, factors = sympy.factor_list(sympy.Poly(poly, x, modulus=p))
    g = sympy.Poly(1, x)
    h = sympy.Poly(1, x)
    for gi, e in factors:
        lift = sympy.Poly([int(c) % p for c in gi.all_coeffs()], x)
        g = g * lift
        h = h * lift ** (e - 1)
    F = (g * h - f).quo_ground(p)
    gp, hp, Fp = (sympy.Poly(q.all_coeffs(), x, modulus=p) for q in (g, h, F))
    d = sympy.gcd(sympy.gcd(gp, hp), Fp)
    return d.degree() == 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n > 0."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    return result * sympy.jacobi_symbol(a % n, n)


class FracIdeal:
    """Fractional ideal stored as (1/den) * (HNF row lattice over the integral basis)."""

    __slots__ = ("K", "den", "rows", "__weakref__")

    def __init__(self, K: NumberField, rows, den: int = 1):
        g = den
        for r in rows:
            for v in r:
                g = gcd(g, v)
        if g > 1:
            rows = [[v // g for v in r] for r in rows]
            den //= g
        self.K = K
        self.den = den
        self.rows = tuple(tuple(r) for r in rows)

    @classmethod
    def from_gens(cls, K: NumberField, gens: list[FieldElement]) -> "FracIdeal":
        vecs = []
        for g in gens:
            for w in K.basis:
                vecs.append(K.coords(g * w))
        return cls.from_lattice(K, vecs)

    @classmethod
    def from_lattice(cls, K: NumberField, vecs) -> "FracIdeal":
        den = _denominator_lcm(v for vec in vecs for v in vec)
        ints = [[int(v * den) for v in vec] for vec in vecs]
        H = linalg.hnf(ints, K.n)
        if len(H) != K.n:
            raise ValueError("zero ideal")
        return cls(K, H, den)

    def basis(self) -> list[FieldElement]:
        return [self.K.from_basis([Fraction(v, self.den) for v in r]) for r in self.rows]

    def reduced_basis(self) -> list[FieldElement]:
        """Lagrange-Gauss reduced basis for the form Tr(x^2) (degree 2 only)."""
        K = self.K
        if K.n != 2:
            raise NotImplementedError("basis reduction is implemented for quadratic fields")
        u, w = self.basis()

        def q(x):
            return (x * x).trace()

        if q(u) > q(w):
            u, w = w, u
        while True:
            k = round((u * w).trace() / q(u))
            w = w - u * k
            if q(w) >= q(u):
                return [u, w]
            u, w = w, u

    def __eq__(self, other):
        return isinstance(other, FracIdeal) and self.den == other.den and self.rows == other.rows

    def __hash__(self):
        return hash((self.den, self.rows))

    def __mul__(self, other):
        if isinstance(other, FieldElement) or isinstance(other, (int, Fraction)):
            other = self.K(other)
            return FracIdeal.from_lattice(self.K, [self.K.coords(b * other) for b in self.basis()])
        gens = [a * b for a in self.basis() for b in other.basis()]
        return FracIdeal.from_lattice(self.K, [self.K.coords(g) for g in gens])

    __rmul__ = __mul__

    def __add__(self, other):
        return FracIdeal.from_lattice(self.K, [self.K.coords(g) for g in self.basis() + other.basis()])

    def __truediv__(self, other):
        if isinstance(other, FracIdeal):
            return self * other.inverse()
        return self * self.K(other).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.K.unit_ideal
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def norm(self) -> Fraction:
        d = linalg.det([list(r) for r in self.rows])
        return Fraction(abs(d), self.den ** self.K.n)

    def is_integral(self) -> bool:
        return self.den == 1

    def contains(self, x: FieldElement) -> bool:
        v = [c * self.den for c in self.K.coords(x)]
        if any(c.denominator != 1 for c in v):
            return False
        rem, _ = linalg.reduce_vector([list(r) for r in self.rows], [int(c) for c in v])
        return not any(rem)

    __contains__ = contains

    def __le__(self, other: "FracIdeal") -> bool:
        """Inclusion of lattices."""
        return all(other.contains(b) for b in self.basis())

    def dual(self) -> "FracIdeal":
        K = self.K
        duals = K.dual_elements(self.basis())
        return FracIdeal.from_lattice(K, [K.coords(x) for x in duals])

    def inverse(self) -> "FracIdeal":
        K = self.K
        if K.n == 2:
            conj = FracIdeal.from_lattice(K, [K.coords(b.conjugate()) for b in self.basis()])
            return conj * (1 / self.norm())
        codiff = K.unit_ideal.dual()
        return (self * codiff).dual()

    def valuation(self, P: Prime) -> int:
        I = self * self.den if self.den > 1 else self
        v = 0
        Pinv = P.ideal.inverse()
        while I.is_integral() and I <= P.ideal:
            I = I * Pinv
            v += 1
        if self.den > 1:
            vp = 0
            dd = self.den
            while dd % P.p == 0:
                dd //= P.p
                vp += 1
            v -= P.e * vp
        return v

    def factor(self) -> dict[Prime, int]:
        num = self * self.den
        out: dict[Prime, int] = {}
        ps = set(sympy.factorint(int(num.norm())).keys()) | set(sympy.factorint(self.den).keys())
        for p in sorted(ps):
            for P in self.K.factor_rational_prime(p):
                v = self.valuation(P)
                if v:
                    out[P] = v
        return out

    def is_coprime_to(self, primes) -> bool:
        return all(self.valuation(P) == 0 for P in primes)

    def min_integer(self) -> int:
        """Smallest positive integer in an integral ideal."""
        assert self.is_integral()
        H = [list(r) for r in self.rows]
        # Z-component: solve for multiples of (1,0,...,0) via reduction
        one = self.K.coords(self.K(1))
        m = 1
        while True:
            rem, _ = linalg.reduce_vector(H, [int(m * c) for c in one])
            if not any(rem):
                return m
            m += 1

    def box_points(self, bound):
        """Lattice points x != 0 with |rho_k(x)| <= bound for all k (quadratic)."""
        K = self.K
        if K.n != 2:
            raise NotImplementedError
        b1, b2 = self.basis()
        with mpmath.workdps(30):
            M = mpmath.matrix([[K.embed(b1, 0), K.embed(b2, 0)], [K.embed(b1, 1), K.embed(b2, 1)]])
            Mi = M ** -1
            lim = [abs(Mi[i, 0]) * bound + abs(Mi[i, 1]) * bound for i in range(2)]
            l0, l1 = int(mpmath.ceil(lim[0])), int(mpmath.ceil(lim[1]))
        pts = []
        for a in range(-l0, l0 + 1):
            for b in range(-l1, l1 + 1):
                if a == 0 and b == 0:
                    continue
                x = b1 * a + b2 * b
                pts.append(x)
        pts.sort(key=lambda x: (abs(x.norm()), [abs(c) for c in x.c], x.c))
        with mpmath.workdps(30):
            return [x for x in pts if all(abs(K.embed(x, k)) <= bound for k in range(2))]

    def __repr__(self):
        return f"FracIdeal(den={self.den}, rows={[list(r) for r in self.rows]})"

    def short(self) -> str:
        N = self.norm()
        return f"<N={N} {[list(r) for r in self.rows]}/{self.den}>"


def make_field(poly, integral_basis=None, units=None) -> NumberField:
    return NumberField(poly, integral_basis=integral_basis, units=units)


class Residues:
    """Arithmetic in O_F / m for an integral ideal m."""

    def __init__(self, m: FracIdeal):
        assert m.is_integral()
        self.m = m
        self.K = m.K
        self.H = [list(r) for r in m.rows]
        self.primes = list(m.factor().items())

    @cached_property
    def size(self) -> int:
        return int(self.m.norm())

    @cached_property
    def phi(self) -> int:
        out = 1
        for P, k in self.primes:
            out *= P.norm ** (k - 1) * (P.norm - 1)
        return out

    def reduce_int(self, v) -> tuple[int, ...]:
        rem, _ = linalg.reduce_vector(self.H, list(v))
        return tuple(rem)

    def reduce(self, x: FieldElement) -> tuple[int, ...]:
        """Canonical residue of x, which must be integral at every prime of m."""
        K = self.K
        c = K.coords(x)
        if all(v.denominator == 1 for v in c):
            return self.reduce_int([int(v) for v in c])
        # x = (b x) / b with b in O prime to m
        denom_ideal = (K.unit_ideal + K.ideal(x)).inverse()  # {b in O : b x in O}
        b = None
        for cand in denom_ideal.basis() + [sum(denom_ideal.basis(), K(0))]:
            if all(not P.ideal.contains(cand) for P, _ in self.primes):
                b = cand
                break
        if b is None:
            for coeffs in itertools.product(range(-3, 4), repeat=K.n):
                cand = sum((bb * k for bb, k in zip(denom_ideal.basis(), coeffs)), K(0))
                if cand and all(not P.ideal.contains(cand) for P, _ in self.primes):
                    b = cand
                    break
        if b is None:
            raise ArithmeticError("no denominator prime to the modulus")
        if any(P.ideal.contains(b) for P, _ in self.primes) or not K.is_integral(b * x):
            raise ArithmeticError("element is not integral at the modulus")
        num = self.reduce(b * x)
        binv = self.inverse(self.reduce(b))
        return self.mul(num, binv)

    def element(self, r) -> FieldElement:
        return self.K.from_basis(list(r))

    def mul(self, a, b) -> tuple[int, ...]:
        return self.reduce(self.element(a) * self.element(b))

    def pow(self, a, k: int) -> tuple[int, ...]:
        if k < 0:
            return self.pow(self.inverse(a), -k)
        result = self.reduce(self.K(1))
        base = tuple(a)
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def inverse(self, a) -> tuple[int, ...]:
        a = tuple(a)
        cache = self.__dict__.setdefault("_inverses", {})
        inv = cache.get(a)
        if inv is None:
            inv = self.pow(a, self.phi - 1)
            if self.mul(inv, a) != self.one:
                raise ZeroDivisionError("residue not invertible")
            cache[a] = inv
            cache[inv] = a
        return inv

    @cached_property
    def one(self) -> tuple[int, ...]:
        return self.reduce(self.K(1))

    def is_unit(self, a) -> bool:
        x = self.element(a)
        return all(not P.ideal.contains(x) for P, _ in self.primes)

    def all_residues(self):
        diag = [self.H[i][i] for i in range(self.K.n)]
        for coeffs in itertools.product(*(range(d) for d in diag)):
            yield self.reduce_int(list(coeffs))

    @cached_property
    def units(self) -> list[tuple[int, ...]]:
        return [a for a in self.all_residues() if self.is_unit(a)]


def uniformizer(P: Prime) -> FieldElement:
    """An element of P not in P^2."""
    K = P.ideal.K
    P2 = P.ideal * P.ideal
    gens = P.ideal.basis()
    for g in gens:
        if not P2.contains(g):
            return g
    for coeffs in itertools.product(range(-2, 3), repeat=len(gens)):
        x = sum((g * c for g, c in zip(gens, coeffs)), K(0))
        if x and not P2.contains(x):
            return x
    raise ArithmeticError("no uniformizer found")


def crt(targets: list[tuple[FieldElement, FracIdeal]]) -> FieldElement:
    """beta in O with beta = t_i mod I_i for pairwise coprime integral ideals I_i."""
    if not targets:
        raise ValueError("empty CRT system")
    K = targets[0][1].K
    beta = K(0)
    for i, (t, I) in enumerate(targets):
        rest = K.unit_ideal
        for j, (_, J) in enumerate(targets):
            if j != i:
                rest = rest * J
        A = [[int(v) for v in K.coords(b)] for b in I.basis()]
        B = [[int(v) for v in K.coords(b)] for b in rest.basis()]
        sol = linalg.solve_left(A + B, [int(v) for v in K.coords(K(1))])
        if sol is None:
            raise ValueError("CRT moduli are not coprime")
        e = sum((b * c for b, c in zip(rest.basis(), sol[len(A):])), K(0))
        beta = beta + t * e
    return beta

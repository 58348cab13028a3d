"""The abelian extension E/F as a quotient of a ray class group, and reciprocity maps."""
from __future__ import annotations

from .field import FracIdeal, NumberField
from .groups import FinAbGroup, GroupRingElt, RayClassStructure
from .places import NElement, NGroup, NGroupRingElt, is_infinite


def class_representatives(R: RayClassStructure, avoid=(), bound: int = 200) -> dict:
    """Integral ideals, coprime to the modulus and to ``avoid``, one per ray class."""
    K = R.K
    bad = set(R.modulus_exps) | set(avoid)
    reps = {R.artin(K.unit_ideal): K.unit_ideal}
    order = R.group.order
    primes = [P for P in K.primes_up_to(bound) if P not in bad]
    while len(reps) < order:
        grew = False
        for P in primes:
            for c, I in list(reps.items()):
                J = I * P.ideal
                cj = R.artin(J)
                if cj not in reps:
                    reps[cj] = J
                    grew = True
            if len(reps) == order:
                break
        if not grew:
            raise ArithmeticError("small primes do not reach every ray class")
    return reps


class GaloisTarget:
    """Gal(E/F) = Cl_m / H for the ray class group of the level's modulus.

    ``kernel`` lists ray classes generating H = Gal(ray class field / E).
    """

    def __init__(self, G: NGroup, kernel=(), prime_bound: int = 60):
        self.N = G
        self.K: NumberField = G.K
        modulus = {P: G.level.m.get(P, 1) for P in G.places.S_f if G.level.m.get(P, 1) > 0}
        self.ray = RayClassStructure(self.K, modulus, G.level.positive, prime_bound=prime_bound)
        self.kernel = [tuple(k) for k in kernel]
        self.q = self.ray.group.quotient(self.kernel)
        self.group: FinAbGroup = self.q.target
        self._cache = {}

    def artin(self, I: FracIdeal) -> tuple:
        key = (I.den, I.rows)
        out = self._cache.get(key)
        if out is None:
            out = self.q(self.ray.artin(I))
            self._cache[key] = out
        return out

    def rec(self, e: NElement) -> tuple:
        """Reciprocity on N_F: trivial on the diagonal image of F^x and on J."""
        G = self.N
        comps = {}
        for v, c in zip(G.S, e.loc):
            if c is None:
                continue
            if is_infinite(v):
                comps[v] = c  # signs are self-inverse
            else:
                comps[v] = G._inv_comp(v, c)
        out = self.artin(e.away)
        if any(c != G.trivial_component(v) for v, c in comps.items()):
            alpha = G.global_with_local(comps)
            # i_S(alpha) = e_S^{-1}, so rec(e_S) = rec(i^S(alpha))
            out = self.group.add(out, self.artin(G.strip_S(self.K.ideal(alpha))))
        return out

    def rec_ring(self, z: NGroupRingElt) -> GroupRingElt:
        """Extension to group rings, g -> [rec(g)^{-1}]."""
        d = {}
        for g, c in z.coeffs.items():
            h = self.group.neg(self.rec(g))
            d[h] = d.get(h, 0) + c
        return GroupRingElt(self.group, d)

    def decomposition_group(self, v) -> set:
        """Image under rec of N_v (finite part and uniformizer)."""
        G = self.N
        gens = []
        if is_infinite(v):
            if G.level.flag(v.index):
                gens.append(self.rec(G.make({v: -1})))
        else:
            for u in G.local_unit_classes(v):
                gens.append(self.rec(G.make({v: u})))
            gens.append(self.rec(G.make({v: (1, G.trivial_component(v)[1])})))
        return self.group.subgroup(gens)

    def frobenius(self, P) -> tuple:
        return self.artin(P.ideal)

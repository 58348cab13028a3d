"""Desk-scale instances shared by the tests."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from shintani.cones import build_signed_domain
from shintani.datum import Context, build_theta
from shintani.field import NumberField
from shintani.galois import GaloisTarget
from shintani.places import InfPlace, LevelJ, NGroup, PlaceSet


@dataclass
class Desk:
    name: str
    K: NumberField
    places: PlaceSet
    N: NGroup
    target: GaloisTarget

    @property
    def ctx(self) -> Context:
        return Context(self.places, self.N)

    def theta(self, seed: int = 0):
        return build_theta(self.ctx, build_signed_domain(self.K).chain, seed)

    @property
    def v1(self):
        return self.places.V[0]


@lru_cache(maxsize=None)
def field(d: int) -> NumberField:
    return NumberField([1, 0, -d])


def _make(name, d, p, idx, t, V, m, kernel=()):
    K = field(d)
    P = K.primes_above(p)[idx]
    T = [K.primes_above(t)[0]] if t else []
    Vl = [P if v == "p" else InfPlace(v) for v in V]
    places = PlaceSet(K, [P], T, Vl)
    N = NGroup(places, LevelJ({P: m}, (True, True)))
    return Desk(name, K, places, N, GaloisTarget(N, kernel))


@lru_cache(maxsize=None)
def desk(name: str) -> Desk:
    table = {
        # Q(sqrt 5), conductor P5^2 inf1 inf2, V = {P5}
        "sqrt5_P5": (5, 5, 0, 11, ["p"], 2),
        # Q(sqrt 3), conductor P3 inf1 inf2 (two narrow classes), V = {inf1}
        "sqrt3_P3": (3, 3, 0, 11, [0], 1),
        # flagship with an infinite v1: Q(sqrt 5), conductor P11 inf1 inf2, inf1 splits
        "sqrt5_P11": (5, 11, 0, 19, [0], 1),
        # flagship with a finite v1: Q(sqrt 3) narrow Hilbert class field, P13 splits
        "sqrt3_P13": (3, 13, 0, 11, ["p"], 0),
    }
    return _make(name, *table[name])


def desk_no_T(name: str) -> Desk:
    d = desk(name)
    P = d.places.S_f[0]
    places = PlaceSet(d.K, [P], [], list(d.places.V))
    N = NGroup(places, d.N.level)
    return Desk(name + "_noT", d.K, places, N, GaloisTarget(N))

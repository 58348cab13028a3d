"""Run configuration (YAML) and JSON reports for the command line front end."""
from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .field import NumberField, Prime
from .places import InfPlace, LevelJ, NElement, NGroup, PlaceSet


class ConfigError(ValueError):
    pass


@dataclass
class FieldBlock:
    poly: list  # coefficients, constant term last: x^2 - 5 is [1, 0, -5]


@dataclass
class PlacesBlock:
    S: list = field(default_factory=list)  # finite primes of S
    T: list = field(default_factory=list)
    V: list = field(default_factory=list)  # ordered; "inf1", "inf2" or prime names
    levels: dict | list = field(default_factory=dict)  # prime name -> m, or one m per prime of S
    flags: list = field(default_factory=lambda: [True, True])


@dataclass
class TargetsBlock:
    H: list = field(default_factory=list)  # ray classes generating Gal(ray class field / H)
    K: list = field(default_factory=lambda: [[]])  # one kernel per field K in Upsilon(J)
    v: int | None = None  # perturbation place index (0-based) outside V
    e: int = 1


@dataclass
class EngineBlock:
    prime_bound: int = 60
    witness_l_cap: int = 8
    samples: int = 20
    precision: int = 40
    jobs: int = 1
    seed: int = 0
    cache_dir: str | None = None


@dataclass
class RunConfig:
    field: FieldBlock
    places: PlacesBlock | None = None
    targets: TargetsBlock | None = None
    engine: EngineBlock | None = None

    def __post_init__(self):
        self.places = self.places or PlacesBlock()
        self.targets = self.targets or TargetsBlock()
        self.engine = self.engine or EngineBlock()

    def to_dict(self) -> dict:
        return asdict(self)


_BLOCKS = {"field": FieldBlock, "places": PlacesBlock, "targets": TargetsBlock, "engine": EngineBlock}


def config_from_dict(d: dict) -> RunConfig:
    if not isinstance(d, dict) or "field" not in d:
        raise ConfigError("configuration needs a 'field' block")
    unknown = set(d) - set(_BLOCKS)
    if unknown:
        raise ConfigError(f"unknown configuration blocks: {sorted(unknown)}")
    blocks = {}
    for name, cls in _BLOCKS.items():
        raw = d.get(name)
        if raw is None:
            raw = {}
        if not isinstance(raw, dict):
            raise ConfigError(f"block '{name}' must be a mapping")
        known = set(cls.__dataclass_fields__)
        bad = set(raw) - known
        if bad:
            raise ConfigError(f"unknown keys in '{name}': {sorted(bad)}")
        blocks[name] = cls(**raw)
    cfg = RunConfig(**blocks)
    if not isinstance(cfg.field.poly, list) or len(cfg.field.poly) != 3:
        raise ConfigError("field.poly must be the coefficient list of a quadratic polynomial")
    if cfg.targets.e not in (1, -1):
        raise ConfigError("targets.e must be 1 or -1")
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return config_from_dict(yaml.safe_load(fh))


# ---------------------------------------------------------------------------
# place names: "inf1", "inf2", "P11" (first prime above 11), "P11.1", or
# {"p": 13, "contains": [4, 1]} for the prime above p containing 4 + 1*omega


def parse_place(K: NumberField, spec):
    if isinstance(spec, dict):
        p = int(spec["p"])
        primes = K.primes_above(p)
        if "contains" in spec:
            x = K.from_basis(spec["contains"])
            hits = [P for P in primes if P.ideal.contains(x)]
            if len(hits) != 1:
                raise ConfigError(f"{spec} does not single out a prime")
            return hits[0]
        return primes[int(spec.get("index", 0))]
    if not isinstance(spec, str):
        raise ConfigError(f"cannot parse place {spec!r}")
    if spec.startswith("inf"):
        k = int(spec[3:]) - 1
        if not 0 <= k < K.n:
            raise ConfigError(f"no infinite place {spec}")
        return InfPlace(k)
    if spec.startswith("P"):
        body = spec[1:]
        p, _, idx = body.partition(".")
        primes = K.primes_above(int(p))
        k = int(idx) if idx else 0
        if k >= len(primes):
            raise ConfigError(f"only {len(primes)} primes above {p}")
        return primes[k]
    raise ConfigError(f"cannot parse place {spec!r}")


def _spec_key(spec) -> str:
    return json.dumps(spec, sort_keys=True) if isinstance(spec, dict) else str(spec)


@dataclass
class Instance:
    K: NumberField
    places: PlaceSet
    N: NGroup
    names: dict  # place -> label used in reports


def build_instance(cfg: RunConfig) -> Instance:
    K = NumberField(cfg.field.poly)
    pb = cfg.places
    names = {}

    def prime(spec):
        P = parse_place(K, spec)
        if not isinstance(P, Prime):
            raise ConfigError(f"{spec!r} must be a finite prime")
        names[P] = _spec_key(spec)
        return P

    S = [prime(s) for s in pb.S]
    T = [prime(s) for s in pb.T]
    by_name = {_spec_key(s): P for s, P in zip(pb.S, S)}
    V = []
    for s in pb.V:
        key = _spec_key(s)
        v = by_name.get(key) or parse_place(K, s)
        names[v] = key
        V.append(v)
    for k in range(K.n):
        names.setdefault(InfPlace(k), f"inf{k + 1}")
    levels = {}
    if isinstance(pb.levels, list):
        if len(pb.levels) != len(S):
            raise ConfigError("a list of levels needs one entry per prime of S")
        pb_levels = {_spec_key(s): m for s, m in zip(pb.S, pb.levels)}
    else:
        pb_levels = pb.levels
    for key, m in pb_levels.items():
        if key not in by_name:
            raise ConfigError(f"level given for {key}, which is not in S")
        levels[by_name[key]] = int(m)
    for P in S:
        levels.setdefault(P, 1)
    try:
        places = PlaceSet(K, S, T, V)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    N = NGroup(places, LevelJ(levels, tuple(bool(f) for f in pb.flags)))
    return Instance(K, places, N, names)


# ---------------------------------------------------------------------------
# reports


def versions() -> dict:
    import mpmath
    import sympy

    from . import __version__

    return {
        "shintani": __version__,
        "python": platform.python_version(),
        "mpmath": mpmath.__version__,
        "sympy": sympy.__version__,
    }


def element_json(x: NElement) -> dict:
    return {
        "loc": [list(c) if isinstance(c, tuple) else c for c in x.loc],
        "away": {"den": x.away.den, "rows": [list(r) for r in x.away.rows]},
    }


def group_ring_json(z) -> list:
    """Sorted list of [element, coefficient] pairs; works for both group ring types."""
    out = []
    for g, c in z.coeffs.items():
        key = element_json(g) if isinstance(g, NElement) else list(g)
        out.append([key, str(c)])
    out.sort(key=lambda p: json.dumps(p[0], sort_keys=True))
    return out


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


@dataclass
class Report:
    command: str
    inputs: dict
    seed: int
    C1: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)  # asserted checks: name -> bool
    comparisons: list = field(default_factory=list)  # conjecture comparisons, reported
    timings: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)
    error: str | None = None

    def exit_code(self) -> int:
        if self.error is not None or not all(self.checks.values()):
            return 1
        if not all(c["passed"] for c in self.comparisons):
            return 2
        return 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def cache_key(command: str, cfg: RunConfig) -> str:
    from . import __version__

    return digest({"command": command, "config": cfg.to_dict(), "version": __version__})


def cache_load(cfg: RunConfig, key: str):
    if not cfg.engine.cache_dir:
        return None
    path = Path(cfg.engine.cache_dir) / f"{key}.json"
    if path.exists():
        return json.loads(path.read_text())
    return None


def cache_store(cfg: RunConfig, key: str, payload: dict) -> None:
    if not cfg.engine.cache_dir:
        return
    d = Path(cfg.engine.cache_dir)
    d.mkdir(parents=True, exist_ok=True)
    (d / f"{key}.json").write_text(json.dumps(payload, sort_keys=True, default=str))

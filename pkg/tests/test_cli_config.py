import json
from pathlib import Path

import pytest

from desk import field
from shintani.cli import main, run
from shintani.config import (
    ConfigError,
    Report,
    build_instance,
    config_from_dict,
    load_config,
    parse_place,
)
from shintani.places import InfPlace

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _cfg(**over):
    d = {
        "field": {"poly": [1, 0, -3]},
        "places": {"S": ["P3"], "T": ["P11"], "V": ["inf1"], "levels": {"P3": 1}},
    }
    for k, v in over.items():
        d[k] = v
    return config_from_dict(d)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")))
def test_shipped_configs_load_and_satisfy_C1(path):
    inst = build_instance(load_config(path))
    assert inst.places.check_C1()["passed"]


@pytest.mark.parametrize("bad", [
    {},
    {"field": {"poly": [1, 0, 0, -2]}},
    {"field": {"poly": [1, 0, -3]}, "extra": {}},
    {"field": {"poly": [1, 0, -3]}, "places": {"Z": []}},
    {"field": {"poly": [1, 0, -3]}, "targets": {"e": 2}},
    {"field": {"poly": [1, 0, -3]}, "engine": []},
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_parse_place_forms():
    K = field(3)
    assert parse_place(K, "inf2") == InfPlace(1)
    P, Q = K.primes_above(13)
    assert parse_place(K, "P13") == P and parse_place(K, "P13.1") == Q
    hit = parse_place(K, {"p": 13, "contains": [4, -1]})
    assert hit.ideal.contains(K.from_basis([4, -1]))
    assert parse_place(K, {"p": 13, "index": 1}) == Q
    for bad in ["inf3", "P13.2", "Q13", 13]:
        with pytest.raises(ConfigError):
            parse_place(K, bad)


def test_level_errors():
    with pytest.raises(ConfigError):
        build_instance(_cfg(places={"S": ["P3"], "T": ["P11"], "V": ["inf1"], "levels": [1, 2]}))
    with pytest.raises(ConfigError):
        build_instance(_cfg(places={"S": ["P3"], "T": ["P11"], "V": ["inf1"], "levels": {"P13": 1}}))
    with pytest.raises(ConfigError):
        build_instance(_cfg(places={"S": ["inf1"], "T": [], "V": []}))


def test_exit_codes():
    r = Report("theta", {}, 0)
    assert r.exit_code() == 0
    r.comparisons.append({"name": "x", "passed": False})
    assert r.exit_code() == 2
    r.checks["c"] = False
    assert r.exit_code() == 1
    assert Report("theta", {}, 0, error="boom").exit_code() == 1


def test_theta_command_is_deterministic_and_cached(tmp_path):
    cfg = _cfg(engine={"cache_dir": str(tmp_path / "cache")})
    a = run("theta", cfg)
    assert a.error is None and a.checks and all(a.checks.values()) and a.C1["passed"]
    b = run("theta", _cfg())
    assert json.dumps(a.certificates, sort_keys=True) == json.dumps(b.certificates, sort_keys=True)
    c = run("theta", cfg)
    assert c.timings.get("cache") == "hit"
    assert json.dumps(c.certificates, sort_keys=True) == json.dumps(a.certificates, sort_keys=True)


@pytest.mark.parametrize("command", ["verify-vanishing", "epsilon-an"])
def test_refusal_without_V(command):
    rep = run(command, _cfg(places={"S": ["P3"], "T": ["P11"], "V": [], "levels": {"P3": 1}}))
    assert rep.error is not None and rep.error.startswith("refused")
    assert rep.exit_code() == 1


def test_main_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["theta", "--config", str(CONFIGS / "sqrt3_narrow.yaml"), "--seed", "3", "--report", str(out)])
    rep = json.loads(out.read_text())
    assert code == 0 and rep["seed"] == 3 and rep["command"] == "theta"
    assert set(rep) >= {"inputs", "C1", "certificates", "checks", "comparisons", "timings", "versions", "error"}


def test_main_bad_config_path(tmp_path, capsys):
    assert main(["theta", "--config", str(tmp_path / "missing.yaml")]) == 1
    assert "configuration error" in capsys.readouterr().err

"""Command line front end: theta | verify-vanishing | qelement | epsilon-an | check-rubin-stark."""
from __future__ import annotations

import argparse
import random
import sys
import time

from . import datum
from .cones import build_signed_domain
from .config import (
    ConfigError,
    Report,
    build_instance,
    cache_key,
    cache_load,
    cache_store,
    digest,
    element_json,
    group_ring_json,
    load_config,
    versions,
)
from .galois import GaloisTarget
from .places import is_infinite, project_to_quotient
from .zeta import theta_oracle

EXIT_OK, EXIT_INTERNAL, EXIT_CONJECTURE = 0, 1, 2


class Refused(RuntimeError):
    """The run cannot be carried out for this configuration (reported, exit code 1)."""


class Session:
    """Expensive intermediates shared between the stages of one command."""

    def __init__(self, cfg, report: Report):
        self.cfg = cfg
        self.report = report
        self.inst = build_instance(cfg)
        datum.WITNESS_L_CAP = cfg.engine.witness_l_cap
        self._timer = time.perf_counter()
        self._theta = None
        self._system = None

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.report.timings[name] = round(now - self._timer, 3)
        self._timer = now

    def target(self, kernel) -> GaloisTarget:
        return GaloisTarget(self.inst.N, [tuple(k) for k in kernel], prime_bound=self.cfg.engine.prime_bound)

    @property
    def target_H(self) -> GaloisTarget:
        return self.target(self.cfg.targets.H)

    def perturbation(self):
        t = self.cfg.targets
        if t.v is not None:
            return t.v, t.e
        V = self.inst.places.V
        for k in range(self.inst.K.n):
            if not any(is_infinite(u) and u.index == k for u in V):
                return k, t.e
        raise Refused("no infinite place outside V for the perturbation")

    def theta(self) -> datum.ThetaElement:
        if self._theta is None:
            ctx = datum.Context(self.inst.places, self.inst.N)
            dom = build_signed_domain(self.inst.K)
            self._theta = datum.build_theta(ctx, dom.chain, self.cfg.engine.seed)
            self.lap("theta")
        return self._theta

    def system(self) -> datum.CompatibleSystem:
        if self._system is None:
            th = self.theta()
            v, e = self.perturbation()
            self._system = datum.solve_compatible_system(th, v, e, self.inst.K.totally_positive_units)
            self.lap("compatible_system")
        return self._system


def _class_key(C) -> str:
    return str(list(C))


def cmd_theta(s: Session) -> None:
    rep = s.report
    tg = s.target_H
    th = s.theta()
    v, e = s.perturbation()
    per, total = datum.theta_group_ring(tg, th, v, e)
    oracle = theta_oracle(tg, s.inst.places)
    s.lap("oracle")
    rep.certificates["theta_cone"] = {
        "per_class": {_class_key(C): group_ring_json(z) for C, z in sorted(per.items())},
        "total": group_ring_json(total),
    }
    rep.certificates["theta_oracle"] = {
        "per_class": {_class_key(C): group_ring_json(z) for C, z in sorted(oracle.per_class.items())},
        "total": group_ring_json(oracle.element),
    }
    rep.checks["theta_total_matches_oracle"] = total == oracle.element
    rep.checks["theta_per_class_matches_oracle"] = all(
        per.get(C) == z for C, z in oracle.per_class.items()
    ) and set(per) == set(oracle.per_class)


def cmd_verify_vanishing(s: Session) -> None:
    rep = s.report
    V = s.inst.places.V
    if not V:
        raise Refused("V is empty: nothing to verify")
    out = []
    for kernel in s.cfg.targets.K:
        tg = s.target(kernel)
        x = theta_oracle(tg, s.inst.places).element
        cert = datum.vanishing_certificate_ring(tg, x, V)
        out.append({
            "kernel": [list(k) for k in kernel],
            "group": list(tg.group.invariants),
            "theta": group_ring_json(x),
            "certificate": None if cert is None else [[[list(u) for u in us], list(g), str(c)] for us, g, c in cert],
        })
        rep.checks[f"theta_in_prod_I_Gv[{len(out) - 1}]"] = cert is not None
    s.lap("group_ring_certificates")
    if len(V) == 1:
        case, cert = datum.vanishing_certificate(s.theta(), V[0], s.inst.K.totally_positive_units)
        rep.certificates["B_level_case"] = case
        rep.certificates["B_level_certificate_size"] = len(cert)
        rep.checks["B_level_vanishing"] = True
        s.lap("B_level_certificate")
    rep.certificates["group_ring"] = out


def _q_element(s: Session):
    rep = s.report
    sysm = s.system()
    flags = datum.verify_system(sysm)
    Q = datum.compute_Q(sysm)
    s.lap("Q")
    tg = s.target_H
    oracle = theta_oracle(tg, s.inst.places).element
    rep.checks.update({f"system_{k}": bool(v) for k, v in flags.items()})
    rep.checks["rec_Q_equals_theta"] = tg.rec_ring(Q) == oracle
    rep.checks["horizontal_boundary_of_Q_vanishes"] = project_to_quotient(Q, s.inst.places.V).is_zero()
    rep.certificates["vanishing_case"] = sysm.case
    rep.certificates["system_equations_hash"] = digest({
        "a0": _b_json(sysm.a0),
        "a1": [[element_json(s.inst.N.diag(y)), _b_json(m)] for y, m in sysm.a1],
        "b1": [group_ring_json(b) for _, b in sysm.b1],
    })
    return Q, tg


def _b_json(b) -> list:
    out = []
    for (bid, away), ch in b.terms.items():
        out.append([
            {"den": bid.den, "rows": [list(r) for r in bid.rows]},
            {"den": away.den, "rows": [list(r) for r in away.rows]},
            sorted(repr(k) + ":" + str(c) for k, c in ch.terms.items()),
        ])
    out.sort(key=repr)
    return out


def cmd_qelement(s: Session) -> None:
    Q, _ = _q_element(s)
    s.report.certificates["Q"] = group_ring_json(Q)


def _epsilon(s: Session):
    from .rubin_stark import check_cJ_kills_IHD, epsilon_an

    V = s.inst.places.V
    if len(V) != 1:
        raise Refused("the analytic element is implemented for r = 1")
    Q, _ = _q_element(s)
    tg = s.target_H
    eps = epsilon_an(Q, tg, V[0])
    s.report.certificates["epsilon_an"] = eps.to_json()
    rng = random.Random(s.cfg.engine.seed)
    s.report.checks["cJ_kills_IH_D"] = check_cJ_kills_IHD(tg, V[0], rng, s.cfg.engine.samples)
    s.lap("epsilon_an")
    return eps, tg


def cmd_epsilon_an(s: Session) -> None:
    _epsilon(s)


def cmd_check_rubin_stark(s: Session) -> None:
    from dataclasses import asdict

    import mpmath

    from .rubin_stark import (
        compare_sign_component,
        compare_valuation_component,
        precision_doubling,
        stark_unit_quadratic,
        valuation_prediction,
    )

    eps, tg = _epsilon(s)
    v = s.inst.places.V[0]
    rep = s.report
    if is_infinite(v):
        if tg.group.order != 2:
            raise Refused("no H-unit model: numeric Stark units are recognized for quadratic H/F only")
        su = stark_unit_quadratic(tg, s.inst.places, v, s.cfg.engine.precision)
        rep.certificates["stark_unit"] = {
            "t": s.inst.K.format(su.t),
            "sign_w1": su.sign_w1,
            "minus_log_abs_u": mpmath.nstr(su.log_abs, 30),
            "residual": mpmath.nstr(su.residual, 5),
            "checks": su.checks,
        }
        rep.checks["stark_unit_consistency"] = bool(
            su.checks["disc_sign_w1"] and su.checks["disc_sign_other"] and su.checks["splitting_matches_artin"]
        )
        rep.checks["stark_residual_small"] = su.residual < mpmath.mpf(10) ** (-20)
        pd = precision_doubling(tg, s.inst.places, v, s.cfg.engine.precision)
        rep.certificates["precision_doubling"] = pd
        rep.checks["precision_doubling"] = pd["passed"]
        cmp = compare_sign_component(eps, su, tg.group)
    else:
        pred = valuation_prediction(s.inst.K, s.inst.places, v, tg)
        cmp = compare_valuation_component(eps, pred)
    s.lap("comparison")
    rep.comparisons.append(asdict(cmp))


COMMANDS = {
    "theta": cmd_theta,
    "verify-vanishing": cmd_verify_vanishing,
    "qelement": cmd_qelement,
    "epsilon-an": cmd_epsilon_an,
    "check-rubin-stark": cmd_check_rubin_stark,
}


def run(command: str, cfg) -> Report:
    """Run one command; failures are recorded in the report rather than raised."""
    report = Report(command, cfg.to_dict(), cfg.engine.seed, versions=versions())
    key = cache_key(command, cfg)
    cached = cache_load(cfg, key)
    try:
        s = Session(cfg, report)
        report.C1 = s.inst.places.check_C1()
        if cached is not None:
            report.certificates = cached["certificates"]
            report.checks = cached["checks"]
            report.comparisons = cached["comparisons"]
            report.timings["cache"] = "hit"
            return report
        COMMANDS[command](s)
        cache_store(cfg, key, {
            "certificates": report.certificates,
            "checks": report.checks,
            "comparisons": report.comparisons,
        })
    except (Refused, ConfigError, NotImplementedError) as exc:
        report.error = f"refused: {exc}"
    except Exception as exc:  # internal failures are reported with their type
        report.error = f"{type(exc).__name__}: {exc}"
    return report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shintani", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="YAML run configuration")
    ap.add_argument("--seed", type=int, help="RNG seed (representatives, sampling)")
    ap.add_argument("--precision", type=int, help="decimal digits for numerics")
    ap.add_argument("--jobs", type=int, help="parallelism width")
    ap.add_argument("--report", help="write the JSON report here (default: stdout)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, ConfigError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.seed is not None:
        cfg.engine.seed = args.seed
    if args.precision is not None:
        cfg.engine.precision = args.precision
    if args.jobs is not None:
        cfg.engine.jobs = args.jobs
    report = run(args.command, cfg)
    if args.report:
        report.write(args.report)
    else:
        print(report.to_json())
    if report.error:
        print(report.error, file=sys.stderr)
    return report.exit_code()


if __name__ == "__main__":
    sys.exit(main())

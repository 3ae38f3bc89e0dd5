"""Acceptance checks shared by the ``selftest`` subcommand and the test suite.

Each check returns a CheckResult; ``passed`` is decided at the stated
tolerance and nothing is retried or relaxed on failure.
"""

from __future__ import annotations

import math
import random
import statistics
import time
from dataclasses import dataclass, field

import mpmath
from mpmath import mp

from . import asymptotics, enumerate as enum, equilibrium as eqm, exact, subleading, theta


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.name} ({self.seconds:.2f} s) {self.detail}"


def _draws(seed: int, count: int, g_lo: float = 0.3, g_hi: float = 2.5, frac: float = 0.9):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        g = rng.uniform(g_lo, g_hi)
        out.append(eqm.ModelParams(g, rng.uniform(-frac, frac) * g))
    return out


def _rel(a, b, bits):
    with mp.workprec(bits):
        return abs(a - b) / abs(b)


def _timed(number: int, name: str, fn, limit: float | None) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    dt = time.perf_counter() - t0
    if limit is not None:
        detail["runtime_limit_s"] = limit
        passed = passed and dt < limit
    return CheckResult(number, name, passed, detail, dt)


def check_exact_vs_brute() -> CheckResult:
    def run():
        worst = 0.0
        anchor = 0.0
        for p in _draws(101, 20):
            for n in range(1, 5):
                ex = exact.partition_exact(p, n, 512).Z_n
                bf = enum.brute_force_Z(p, n, 512)
                worst = max(worst, float(_rel(ex, bf, 600)))
                if n == 1:
                    with mp.workprec(512):
                        anchor = max(anchor, float(_rel(ex, mpmath.sinh(2 * mpmath.mpf(p.gamma)), 600)))
        return worst <= 1e-40 and anchor <= 1e-40, {"max_rel": worst, "Z1_vs_sinh2g": anchor}
    return _timed(1, "exact vs brute force, n=1..4, 20 draws, 512 bits", run, 10.0)


def check_tau_routes() -> CheckResult:
    P = 2048

    def run():
        worst = -math.inf
        for p in _draws(202, 3):
            table = exact.moments(p, 16, P, guard=64)
            for n in range(1, 17):
                t1 = exact.tau(table, n)
                t2 = exact.tau_from_phi_determinant(table, n)
                worst = max(worst, float(mpmath.log(_rel(t1, t2, P + 64) + mpmath.mpf(2) ** (-4 * P), 2)))
        return worst <= -P / 2, {"max_log2_rel": worst, "bound_log2": -P / 2}
    return _timed(2, "tau by norm product vs phi-Hankel determinant, n<=16, 2048 bits", run, 30.0)


def check_toda() -> CheckResult:
    P = 1024

    def run():
        worst = -math.inf
        for p in _draws(303, 5):
            for n in range(1, 11):
                r = exact.toda_residual(p, n, P)
                with mp.workprec(P):
                    lg = float(mpmath.log(r, 2)) if r > 0 else -math.inf
                worst = max(worst, lg)
        return worst <= -P / 2, {"max_log2_residual": worst, "bound_log2": -P / 2}
    return _timed(3, "Toda equation, n=1..10, 1024 bits, 5 draws", run, None)


def check_identities() -> CheckResult:
    def run():
        res = theta.identity_suite(1000, seed=404)
        worst_name = max(res, key=res.get)
        return res[worst_name] <= 1e-12, {"max_residual": res[worst_name], "worst": worst_name,
                                          "identities": len(res)}
    return _timed(4, "theta identity suite, 1000 draws each", run, 5.0)


EQUILIBRIUM_POINTS = ((1.0, 0.3), (1.0, 0.0), (0.5, -0.2), (2.5, 1.5))


def check_equilibrium() -> CheckResult:
    t0 = time.perf_counter()
    detail = {}
    ok = True
    for g, t in EQUILIBRIUM_POINTS:
        s = time.perf_counter()
        p = eqm.ModelParams(g, t)
        eq = eqm.EquilibriumMeasure(p)
        mass = abs(eqm.total_mass(eq) - 1.0)
        right = abs(eqm.mass_right_of_zero(eq) - 0.5 * (1.0 + p.zeta))
        ell = eqm.elliptic_consistency(p)
        ell_res = max(v for k, v in ell.items() if k.startswith("res_"))
        var = max(abs(eqm.variational_residual(x, eq)) for x in eqm.support_points(eq, 10))
        gaps = max(eqm.endpoint_gap_residuals(p).values())
        dt = time.perf_counter() - s
        point_ok = mass <= 1e-8 and right <= 1e-8 and ell_res <= 1e-8 and var <= 1e-6 and gaps <= 1e-12 and dt < 20
        ok = ok and point_ok
        detail[f"{g},{t}"] = {"mass": mass, "mass_right_of_0": right, "elliptic": ell_res,
                              "variational": var, "gaps": gaps, "seconds": round(dt, 2)}
    return CheckResult(5, "equilibrium measure", ok, detail, time.perf_counter() - t0)


CONVERGENCE_POINTS = ((1.0, 0.0), (1.0, 0.4), (0.7, -0.3))


def check_convergence() -> CheckResult:
    def run():
        ok = True
        detail = {}
        for g, t in CONVERGENCE_POINTS:
            cmp = asymptotics.compare(eqm.ModelParams(g, t), range(4, 29))
            scaled = {n: n * inc for n, inc in cmp.c_estimate.increments}
            K = max(scaled.values())
            early = max(v for n, v in scaled.items() if n < 16)
            late = max(v for n, v in scaled.items() if n >= 16)
            window = [r.n2_dev for r in cmp.rows if 8 <= r.n <= 28]
            med = statistics.median(window)
            ratio = max(window) / med
            point_ok = late <= early and ratio <= 3.0
            ok = ok and point_ok
            detail[f"{g},{t}"] = {"K": K, "K_early": early, "K_late": late,
                                  "max_over_median_n2dev": ratio, "C": cmp.C_estimate}
        return ok, detail
    return _timed(6, "convergence of c_n and of the h-ratio, n=4..28", run, 300.0)


SUBLEADING_GAMMAS = (0.3, 0.8, 1.5, 2.2, 3.0)
SUBLEADING_T_FRACTIONS = (-0.9, -0.4, 0.0, 0.4, 0.9)


def check_subleading() -> CheckResult:
    def run():
        worst = 0.0
        drift = 0.0
        count = 0
        for g in SUBLEADING_GAMMAS:
            for r in SUBLEADING_T_FRACTIONS:
                p = eqm.ModelParams(g, r * g)
                vals = [subleading.f_value(p, n) for n in range(1, 14)]
                for n in range(12):
                    worst = max(worst, abs(vals[n] - 1.0 / 6.0))
                    drift = max(drift, abs(vals[n + 1] - vals[n]))
                    count += 1
        return worst <= 1e-10 and drift <= 1e-10, {"max_dev": worst, "max_n_drift": drift, "points": count}
    return _timed(7, "f = 1/6 on the 5 x 5 x 12 grid", run, 30.0)


def check_m1() -> CheckResult:
    def run():
        rng = random.Random(808)
        worst = 0.0
        for _ in range(100):
            g = rng.uniform(0.3, 3.0)
            p = eqm.ModelParams(g, rng.uniform(-0.95, 0.95) * g)
            m = asymptotics.m1_entries(p, rng.randint(1, 40))
            worst = max(worst, abs(m.raw12 / m.clean12 - 1), abs(m.raw21 / m.clean21 - 1))
        return worst <= 1e-10, {"max_rel": worst}
    return _timed(8, "raw vs clean M1 entries, 100 draws", run, None)


# starting precision 64 at this point hits a non-positive Hankel pivot
LADDER_POINT = (10.0, 0.0)


def check_ladder() -> CheckResult:
    def run():
        detail = {}
        worst = -math.inf
        for p, n in zip(_draws(909, 4), (4, 8, 12, 16)):
            P = exact.default_precision(n)
            lo = exact.partition_exact(p, n, P)
            hi = exact.partition_exact(p, n, 2 * lo.precision_bits)
            bits = 2 * hi.precision_bits
            rels = [_rel(a, b, bits) for a, b in zip(lo.h, hi.h)]
            rels += [_rel(lo.tau_n, hi.tau_n, bits), _rel(lo.Z_n, hi.Z_n, bits)]
            with mp.workprec(64):
                lg = float(mpmath.log(max(rels) + mpmath.ldexp(1, -4 * bits), 2)) + lo.precision_bits
            worst = max(worst, lg)
        detail["max_log2_rel_plus_P"] = worst
        agree = worst <= 16
        p = eqm.ModelParams(*LADDER_POINT)
        sol = exact.partition_exact(p, 12, 64)
        events = [e["event"] for e in sol.ladder]
        doublings = int(round(math.log2(sol.precision_bits / 64)))
        ref = exact.partition_exact(p, 12, 1024)
        err = float(_rel(sol.Z_n, ref.Z_n, 2048))
        pivot_path = "non-positive pivot" in events
        detail.update({"ladder": events, "doublings": doublings, "final_P": sol.precision_bits,
                       "rel_err_vs_1024_bits": err})
        ok = agree and pivot_path and doublings <= 4 and err <= 2.0 ** (-sol.precision_bits + 16)
        return ok, detail
    return _timed(9, "precision ladder", run, None)


CHECKS = {
    1: check_exact_vs_brute,
    2: check_tau_routes,
    3: check_toda,
    4: check_identities,
    5: check_equilibrium,
    6: check_convergence,
    7: check_subleading,
    8: check_m1,
    9: check_ladder,
}


def run_all(numbers=None, stream=None) -> list[CheckResult]:
    out = []
    for k in sorted(CHECKS if numbers is None else numbers):
        r = CHECKS[k]()
        out.append(r)
        if stream is not None:
            print(r.line(), file=stream, flush=True)
    return out

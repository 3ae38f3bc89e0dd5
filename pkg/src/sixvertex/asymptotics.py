"""Large-n formulas for Z_n and h_n in the antiferroelectric phase, and their
comparison with the exact solver.

    Z_n ~ C theta4(n omega) F^{n^2}
    h_n / (n!)^2 ~ G^{2n+1} theta4((n+1) omega) / theta4(n omega)

C is not known in closed form; it is estimated from exact values and only
its stability is examined.  Everything that touches Z_n runs in log space.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

import mpmath
from mpmath import mp

from .equilibrium import ModelParams, endpoint_gap_formulas
from .errors import DomainError
from .exact import partition_exact
from .theta import reduce_mod_pi, theta, theta_constants


@dataclass(frozen=True)
class AsymptoticConstants:
    params: ModelParams
    F: float
    G: float
    A: float
    l: float

    def as_dict(self) -> dict:
        return {"F": self.F, "G": self.G, "A": self.A, "l": self.l}


def _theta_mod_pi(j: int, z: float, nome) -> float:
    zr, sign = reduce_mod_pi(j, z)
    return sign * theta(j, zr, nome)


def constants(params: ModelParams) -> AsymptoticConstants:
    nome = params.nome
    t1p = theta_constants(nome)[1]
    t1w = theta(1, params.omega, nome)
    g = params.gamma
    G = math.pi * t1p / (4 * g * t1w)
    F = math.pi * params.a * params.b * t1p / (2 * g * t1w)
    A = math.pi * t1p / (2 * t1w)
    l = -2.0 + 2.0 * math.log(A)
    return AsymptoticConstants(params=params, F=F, G=G, A=A, l=l)


def log_h_ratio_asym(params: ModelParams, n: int) -> float:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    k = constants(params)
    w, nome = params.omega, params.nome
    return ((2 * n + 1) * math.log(k.G) + math.log(_theta_mod_pi(4, (n + 1) * w, nome))
            - math.log(_theta_mod_pi(4, n * w, nome)))


def h_ratio_asym(params: ModelParams, n: int) -> float:
    """G^{2n+1} theta4((n+1) omega) / theta4(n omega)."""
    return math.exp(log_h_ratio_asym(params, n))


def z_asym(params: ModelParams, n: int, C: float) -> float:
    """ln(C theta4(n omega) F^{n^2})."""
    if not C > 0:
        raise DomainError(f"C must be positive, got {C!r}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    k = constants(params)
    return math.log(C) + math.log(_theta_mod_pi(4, n * params.omega, params.nome)) + n * n * math.log(k.F)


# --------------------------------------------------------------------------
# exact comparison
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactSweep:
    """ln Z_k and ln(h_k / (k!)^2) for k up to n_max from one factorisation."""

    params: ModelParams
    n_max: int
    log_Z: dict       # k -> ln Z_k, k = 1..n_max
    log_h: dict       # k -> ln(h_k / (k!)^2), k = 0..n_max
    precision_bits: int


def exact_sweep(params: ModelParams, n_max: int, P: int | None = None) -> ExactSweep:
    # one extra pivot so that h_{n_max} is available
    sol = partition_exact(params, n_max + 1, P)
    bits = sol.precision_bits
    with mp.workprec(bits + 32):
        logs = sol.log_Z_prefix()
        log_Z = {k: logs[k - 1] for k in range(1, n_max + 1)}
        log_h = {k: mpmath.log(sol.h[k]) - 2 * mpmath.loggamma(k + 1) for k in range(n_max + 1)}
    return ExactSweep(params=params, n_max=n_max, log_Z=log_Z, log_h=log_h, precision_bits=bits)


def _log_c(params: ModelParams, k: AsymptoticConstants, n: int, log_Z) -> float:
    # ln Z_n - ln theta4(n omega) - n^2 ln F, subtracted in high precision
    with mp.workprec(mp.prec + 64):
        val = (log_Z - mpmath.log(_theta_mod_pi(4, n * params.omega, params.nome))
               - n * n * mpmath.log(k.F))
    return float(val)


@dataclass(frozen=True)
class CEstimate:
    C: float
    sequence: list      # (n, c_n)
    increments: list    # (n, |c_{n+1}/c_n - 1|)


def estimate_C(params: ModelParams, n_range, sweep: ExactSweep | None = None) -> CEstimate:
    """c_n = Z_n / (theta4(n omega) F^{n^2}) over n_range; C is the last c_n."""
    ns = sorted(n_range)
    if not ns or ns[0] < 1:
        raise DomainError("n_range must be a non-empty set of positive integers")
    if sweep is None or sweep.n_max < ns[-1]:
        sweep = exact_sweep(params, ns[-1])
    k = constants(params)
    seq = [(n, math.exp(_log_c(params, k, n, sweep.log_Z[n]))) for n in ns]
    inc = [(n0, abs(c1 / c0 - 1)) for (n0, c0), (n1, c1) in zip(seq, seq[1:]) if n1 == n0 + 1]
    return CEstimate(C=seq[-1][1], sequence=seq, increments=inc)


def h_ratio_deviation(params: ModelParams, sweep: ExactSweep, n: int) -> float:
    """r_n - 1 with r_n = exact h_n/(n!)^2 over its asymptotic form."""
    with mp.workprec(mp.prec + 64):
        return float(mpmath.expm1(sweep.log_h[n] - log_h_ratio_asym(params, n)))


@dataclass(frozen=True)
class CompareRow:
    n: int
    Z_exact_log: float
    Z_asym_log: float
    r_n: float
    n2_dev: float

    def as_list(self) -> list:
        return [self.n, self.Z_exact_log, self.Z_asym_log, self.r_n, self.n2_dev]


@dataclass(frozen=True)
class Comparison:
    rows: list
    C_estimate: float
    max_n2_dev: float
    max_n_dev: float
    median_n2_dev: float
    c_estimate: CEstimate

    def summary(self) -> dict:
        return {"C_estimate": self.C_estimate, "max_n2_dev": self.max_n2_dev, "max_n_dev": self.max_n_dev}


def compare(params: ModelParams, n_range, P: int | None = None) -> Comparison:
    ns = sorted(n_range)
    sweep = exact_sweep(params, ns[-1], P)
    est = estimate_C(params, ns, sweep)
    rows = []
    n_devs = []
    for n in ns:
        zl = float(sweep.log_Z[n])
        za = z_asym(params, n, est.C)
        dev = h_ratio_deviation(params, sweep, n)
        rows.append(CompareRow(n=n, Z_exact_log=zl, Z_asym_log=za, r_n=1.0 + dev, n2_dev=n * n * abs(dev)))
        n_devs.append(n * abs(math.expm1(zl - za)))
    n2 = [r.n2_dev for r in rows]
    return Comparison(rows=rows, C_estimate=est.C, max_n2_dev=max(n2), max_n_dev=max(n_devs),
                      median_n2_dev=statistics.median(n2), c_estimate=est)


# --------------------------------------------------------------------------
# M_1 entries
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class M1Entries:
    """Magnitudes of the off-diagonal entries of M_1, raw theta-quotient and clean forms.

    ``clean21`` is A theta4((n-1) omega)/theta4(n omega), the form the raw
    quotient reduces to; ``clean21_inverted`` keeps the reciprocal-ratio
    variant A theta4(n omega)/theta4((n-1) omega) for reference.
    """

    raw12: float
    raw21: float
    clean12: float
    clean21: float
    clean21_inverted: float

    def residuals(self) -> tuple[float, float]:
        return abs(self.raw12 - self.clean12), abs(self.raw21 - self.clean21)


def m1_entries(params: ModelParams, n: int) -> M1Entries:
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    nome, w = params.nome, params.omega
    T3 = lambda x: _theta_mod_pi(3, x, nome)  # noqa: E731
    T4 = lambda x: _theta_mod_pi(4, x, nome)  # noqa: E731
    g = endpoint_gap_formulas(params)
    S = (g["beta-beta_p"] + g["alpha_p-alpha"]) / 4
    u = math.pi * (1 - params.zeta) / 4
    d = -u
    half_omega_n = n * w + math.pi / 2
    raw12 = T3(-u + d + half_omega_n) * T3(u + d) / (T3(u + d + half_omega_n) * T3(-u + d)) * S
    raw21 = T3(u - d + half_omega_n) * T3(-u - d) / (T3(-u - d + half_omega_n) * T3(u - d)) * S
    A = constants(params).A
    return M1Entries(
        raw12=abs(raw12), raw21=abs(raw21),
        clean12=A * T4((n + 1) * w) / T4(n * w),
        clean21=A * T4((n - 1) * w) / T4(n * w),
        clean21_inverted=A * T4(n * w) / T4((n - 1) * w),
    )

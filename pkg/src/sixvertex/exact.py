"""Exact finite-n partition function through the Hankel moment determinant.

Z_n = [ab]^{n^2} tau_n / (prod_{j<n} j!)^2 with tau_n = det(phi^{(i+j)}),
phi^{(k)} = 2^{k+1} m_k and m_j = sum_l l^j exp(2 t l - 2 gamma |l|).
Equivalently tau_n = 2^{n^2} prod h_k where h_k are the pivots of the
LDL^T factorisation of the moment Hankel matrix H_ij = m_{i+j}.

Arithmetic is mpmath at an explicit bit precision ("BigReal").  Results are
delivered at P bits but computed at W = P + guard bits, where the guard is
sized from the cancellation actually observed in the factorisation: the
Hankel pivots lose a roughly P-independent number of leading bits, so P
alone never buys accuracy once that loss exceeds the agreement target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .equilibrium import ModelParams
from .errors import DomainError, PrecisionExhausted

MIN_BITS = 64
MAX_RETRIES = 4


def default_precision(n: int) -> int:
    return max(256, 96 * n)


# --------------------------------------------------------------------------
# moments
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentTable:
    params: ModelParams
    precision_bits: int
    work_bits: int
    m: tuple
    L: tuple[int, int]

    @property
    def order(self) -> int:
        return len(self.m) - 1


def truncation_bound(decay: float, order: int, bits: int) -> int:
    """Smallest L with the one-sided tail sum_{l>L} l^order e^{-2 decay l} below 2^-bits.

    Term ratios are bounded by r = (1 + 1/L)^order e^{-2 decay} < 1, so the tail
    is at most L^order e^{-2 decay L} r / (1 - r).  m_0 >= 1, so this is also a
    relative bound.
    """
    if decay <= 0:
        raise DomainError("moment sums diverge for |t| >= gamma")
    L = max(1, int(order / (2 * decay)) + 1)

    def log2_tail(L: int) -> float:
        log_r = order * math.log1p(1.0 / L) - 2 * decay
        if log_r >= 0:
            return math.inf
        r = math.exp(log_r)
        ln = order * math.log(L) - 2 * decay * L + math.log(r / (1 - r))
        return ln / math.log(2)

    while log2_tail(L) >= -bits:
        L = max(L + 1, int(L * 1.25))
    lo, hi = max(1, int(L / 1.25)), L
    while lo < hi:
        mid = (lo + hi) // 2
        if log2_tail(mid) < -bits:
            hi = mid
        else:
            lo = mid + 1
    return lo


def moments(params: ModelParams, n: int, P: int, order: int | None = None, guard: int = 32) -> MomentTable:
    """m_0 .. m_order (default 2n-2) summed at P + guard bits.

    The lattice is truncated separately on each side since the weight decays
    like e^{-2(gamma - t) l} for l > 0 and e^{-2(gamma + t)|l|} for l < 0.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if P < MIN_BITS:
        raise DomainError(f"precision must be at least {MIN_BITS} bits, got {P}")
    J = 2 * n - 2 if order is None else order
    W = P + guard
    g, t = float(params.gamma), float(params.t)
    Lp = truncation_bound(g - t, J, W)
    Lm = truncation_bound(g + t, J, W)
    with mp.workprec(W):
        gm, tm = mpf(g), mpf(t)
        acc = [mpf(0)] * (J + 1)
        acc[0] = mpf(1)  # l = 0
        for sign, decay, L in ((1, gm - tm, Lp), (-1, gm + tm, Lm)):
            x = mpmath.exp(-2 * decay)
            side = [mpf(0)] * (J + 1)
            w = mpf(1)
            for l in range(1, L + 1):
                w *= x
                term = w
                for j in range(J + 1):
                    side[j] += term
                    term *= l
            for j in range(J + 1):
                acc[j] += side[j] if (sign > 0 or j % 2 == 0) else -side[j]
        m = tuple(+v for v in acc)
    return MomentTable(params=params, precision_bits=P, work_bits=W, m=m, L=(Lm, Lp))


# --------------------------------------------------------------------------
# factorisation
# --------------------------------------------------------------------------

def ldl_hankel(m, n: int, bits: int) -> tuple[list, list]:
    """LDL^T of H_ij = m_{i+j}; returns (pivots h_k, unit lower factor rows).

    Raises PrecisionExhausted on a non-positive pivot.
    """
    with mp.workprec(bits):
        A = [[+m[i + j] for j in range(n)] for i in range(n)]
        Lf = [[mpf(0)] * n for _ in range(n)]
        h = []
        for k in range(n):
            piv = A[k][k]
            if piv <= 0:
                raise PrecisionExhausted(f"non-positive Hankel pivot at k={k}", precision_bits=bits)
            h.append(piv)
            Lf[k][k] = mpf(1)
            for i in range(k + 1, n):
                f = A[i][k] / piv
                Lf[i][k] = f
                row_i, row_k = A[i], A[k]
                for j in range(k + 1, i + 1):
                    row_i[j] -= f * row_k[j]
            # keep symmetry explicit for the lower triangle only
            for i in range(k + 1, n):
                for j in range(k + 1, i):
                    A[j][i] = A[i][j]
    return h, Lf


def norms(table: MomentTable, n: int) -> list:
    """Orthogonal-polynomial norms h_0..h_{n-1} (LDL^T pivots), at the table's working precision."""
    if table.order < 2 * n - 2:
        raise DomainError(f"moment table only reaches m_{table.order}, need m_{2 * n - 2}")
    h, _ = ldl_hankel(table.m, n, table.work_bits)
    return h


def cancellation_bits(table: MomentTable, h: list) -> float:
    """Largest leading-bit loss log2(m_{2k}/h_k) seen in the factorisation."""
    with mp.workprec(table.work_bits):
        return max(float(mpmath.log(table.m[2 * k] / h[k], 2)) for k in range(len(h)))


def tau_from_norms(h: list, bits: int):
    n = len(h)
    with mp.workprec(bits):
        return mpmath.ldexp(mpmath.fprod(h), n * n)


def phi_hankel(table: MomentTable, rows: list[int], n: int):
    """Matrix with row r equal to (phi^{(r+j)})_{j<n}, phi^{(k)} = 2^{k+1} m_k."""
    need = max(rows) + n - 1
    if table.order < need:
        raise DomainError(f"moment table only reaches m_{table.order}, need m_{need}")
    return mpmath.matrix([[mpmath.ldexp(table.m[r + j], r + j + 1) for j in range(n)] for r in rows])


def tau_from_phi_determinant(table: MomentTable, n: int):
    """tau_n = det(phi^{(i+j)}) by LU with partial pivoting (mpmath.det)."""
    with mp.workprec(table.work_bits):
        return mpmath.det(phi_hankel(table, list(range(n)), n))


def tau(table: MomentTable, n: int):
    """tau_n = 2^{n^2} prod h_k (production route)."""
    return tau_from_norms(norms(table, n), table.work_bits)


# --------------------------------------------------------------------------
# partition function
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExactSolution:
    n: int
    tau_n: mpf
    h: tuple
    Z_n: mpf
    precision_bits: int
    est_rel_err: mpf
    params: ModelParams | None = None
    ladder: tuple = field(default=())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "precision_bits": self.precision_bits,
            "tau_n": to_decimal(self.tau_n, self.precision_bits),
            "h": [to_decimal(x, self.precision_bits) for x in self.h],
            "Z_n": to_decimal(self.Z_n, self.precision_bits),
            "est_rel_err": to_decimal(self.est_rel_err, 53),
        }

    def log_Z_prefix(self) -> list:
        """ln Z_k for k = 1..n from the leading pivots (the k x k factor is a prefix)."""
        if self.params is None:
            raise ValueError("solution carries no parameters")
        out = []
        with mp.workprec(self.precision_bits + 32):
            lab = mpmath.log(mpmath.sinh(mpf(self.params.gamma) - mpf(self.params.t))
                             * mpmath.sinh(mpf(self.params.gamma) + mpf(self.params.t)))
            log_h_sum = mpf(0)
            log_fact_sum = mpf(0)
            for k in range(1, self.n + 1):
                log_h_sum += mpmath.log(self.h[k - 1])
                if k >= 2:
                    log_fact_sum += mpmath.loggamma(k)  # ln (k-1)!
                out.append(k * k * (lab + mpmath.log(2)) + log_h_sum - 2 * log_fact_sum)
        return out


def to_decimal(x, bits: int) -> str:
    """Round-to-nearest decimal in scientific notation with digits matching ``bits``."""
    digits = max(1, int(math.ceil(bits * math.log10(2))))
    with mp.workprec(max(bits, 53) + 16):
        return mpmath.libmp.to_str(mpf(x)._mpf_, digits, min_fixed=1, max_fixed=0)


def _solve_once(params: ModelParams, n: int, P: int, extra_order: int = 0):
    """One rung: moments, factorisation and Z_n at P bits with adaptive guard.

    Returns (h, tau, Z, table).
    """
    guard = 32 + 2 * n
    for _ in range(8):
        table = moments(params, n, P, order=2 * n - 2 + extra_order, guard=guard)
        h, _ = ldl_hankel(table.m, n, table.work_bits)
        canc = cancellation_bits(table, h)
        if guard >= canc + 48:
            break
        guard = int(canc) + 64
    W = table.work_bits
    with mp.workprec(W):
        gm, tm = mpf(params.gamma), mpf(params.t)
        ab = mpmath.sinh(gm - tm) * mpmath.sinh(gm + tm)
        t_n = tau_from_norms(h, W)
        fact = mpmath.fprod(mpmath.factorial(j) for j in range(n))
        Z = mpmath.power(ab, n * n) * t_n / (fact * fact)
    with mp.workprec(P):
        return [+x for x in h], +t_n, +Z, table


def _rel(a, b, bits):
    with mp.workprec(bits):
        return abs(a - b) / abs(b)


def partition_exact(params: ModelParams, n: int, P: int | None = None,
                    max_retries: int = MAX_RETRIES) -> ExactSolution:
    """Z_n with the precision ladder.

    Each rung computes the solution at P and 2P bits; it is accepted when all
    outputs agree to 2^(-P+16).  A non-positive pivot or a disagreement
    doubles P, at most ``max_retries`` times.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    P = default_precision(n) if P is None else int(P)
    if P < MIN_BITS:
        raise DomainError(f"precision must be at least {MIN_BITS} bits, got {P}")
    log = []
    cached = None
    for attempt in range(max_retries + 1):
        try:
            lo = cached if cached is not None and cached[0] == P else (P, _solve_once(params, n, P))
            hi = (2 * P, _solve_once(params, n, 2 * P))
        except PrecisionExhausted as exc:
            log.append({"P": P, "event": "non-positive pivot", "detail": str(exc)})
            P *= 2
            cached = None
            continue
        cached = hi
        (h1, t1, Z1, _), (h2, t2, Z2, _) = lo[1], hi[1]
        bits = 2 * P + 16
        diffs = [_rel(a, b, bits) for a, b in zip(h1, h2)] + [_rel(t1, t2, bits), _rel(Z1, Z2, bits)]
        worst = max(diffs)
        with mp.workprec(64):
            tol = mpmath.ldexp(1, -P + 16)
        if worst <= tol:
            log.append({"P": P, "event": "accepted"})
            with mp.workprec(64):
                est = max(worst, mpmath.ldexp(1, -P))
            return ExactSolution(n=n, tau_n=t1, h=tuple(h1), Z_n=Z1, precision_bits=P,
                                 est_rel_err=est, params=params, ladder=tuple(log))
        log.append({"P": P, "event": "P/2P disagreement", "detail": float(worst)})
        P *= 2
    steps = "; ".join(f"P={e['P']} {e['event']}" for e in log)
    raise PrecisionExhausted(f"precision ladder exhausted at {P // 2} bits ({steps})",
                             precision_bits=P // 2, ladder=log)


# --------------------------------------------------------------------------
# Toda equation
# --------------------------------------------------------------------------

def toda_terms(params: ModelParams, n: int, P: int) -> dict:
    """tau_{n-1}, tau_n, tau_{n+1} and the exact t-derivatives of tau_n.

    d/dt phi^{(k)} = phi^{(k+1)}, so by Jacobi's formula only the last row of
    the phi-Hankel matrix survives differentiation:
        tau_n'  = det(rows 0..n-2, n)
        tau_n'' = det(rows 0..n-3, n-1, n) + det(rows 0..n-2, n+1)
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    guard = 32 + 2 * n
    for _ in range(8):
        table = moments(params, n + 1, P, order=2 * n, guard=guard)
        h, _ = ldl_hankel(table.m, n + 1, table.work_bits)
        canc = cancellation_bits(table, h)
        if guard >= canc + 48:
            break
        guard = int(canc) + 64
    W = table.work_bits
    with mp.workprec(W):
        base = list(range(n - 1))
        tau_nm1 = tau_from_norms(h[: n - 1], W) if n > 1 else mpf(1)
        tau_n = tau_from_norms(h[:n], W)
        tau_np1 = tau_from_norms(h[: n + 1], W)
        d1 = mpmath.det(phi_hankel(table, base + [n], n))
        d2a = mpmath.det(phi_hankel(table, base[:-1] + [n - 1, n], n)) if n >= 2 else mpf(0)
        d2b = mpmath.det(phi_hankel(table, base + [n + 1], n))
        return {"tau_nm1": tau_nm1, "tau_n": tau_n, "tau_np1": tau_np1,
                "d1": d1, "d2": d2a + d2b, "work_bits": W}


def toda_residual(params: ModelParams, n: int, P: int):
    """|tau tau'' - tau'^2 - tau_{n+1} tau_{n-1}| / (tau_{n+1} tau_{n-1})."""
    T = toda_terms(params, n, P)
    with mp.workprec(T["work_bits"]):
        lhs = T["tau_n"] * T["d2"] - T["d1"] ** 2
        rhs = T["tau_np1"] * T["tau_nm1"]
        return abs(lhs - rhs) / rhs


# --------------------------------------------------------------------------
# orthogonal polynomials
# --------------------------------------------------------------------------

def monic_polynomials(table: MomentTable, n: int) -> list[list]:
    """Coefficients (ascending) of the monic orthogonal polynomials P_0..P_{n-1}.

    Row k of L^{-1} from H = L D L^T holds the coefficients of P_k.
    """
    _, Lf = ldl_hankel(table.m, n, table.work_bits)
    with mp.workprec(table.work_bits):
        inv = [[mpf(0)] * n for _ in range(n)]
        for i in range(n):
            inv[i][i] = mpf(1)
            for j in range(i - 1, -1, -1):
                inv[i][j] = -mpmath.fsum(Lf[i][k] * inv[k][j] for k in range(j, i))
        # forward substitution above solves L X = I column-wise; rows of X are P_k
    return [inv[k][: k + 1] for k in range(n)]


def recurrence_coefficients(table: MomentTable, n: int) -> tuple[list, list]:
    """(a_k, b_k) with x P_k = P_{k+1} + a_k P_k + b_k P_{k-1}, for k < n-1.

    b_k = h_k / h_{k-1}; a_k is the difference of subleading coefficients.
    """
    polys = monic_polynomials(table, n)
    h = norms(table, n)
    with mp.workprec(table.work_bits):
        a = []
        b = []
        for k in range(n - 1):
            sub_k = polys[k][k - 1] if k >= 1 else mpf(0)
            sub_k1 = polys[k + 1][k]
            a.append(sub_k - sub_k1)
            b.append(h[k] / h[k - 1] if k >= 1 else mpf(0))
    return a, b

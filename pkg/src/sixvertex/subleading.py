"""Subleading correction to the norm ratio h_n / h_{n-1}.

The correction is assembled from four turning-point contributions
(alpha, alpha', beta', beta).  Each contribution is a combination of theta
ratios evaluated at z = n omega + omega/2 and at omega/2; the assembled
value f(n omega, omega) equals 1/6 identically.

Each turning point j is described by a row (a, b, s_xi, s_eta, D):
    a      theta index evaluated at z,
    b      theta index evaluated at omega/2,
    s_xi   sign of the first-derivative (xi) term,
    s_eta  sign of the second-order (eta) term,
    D      the endpoint gap in the denominator of the eta term.
The alpha row is (4, 3, +, +, beta'-alpha); the other three follow by the
substitution 4 -> 1 -> 2 -> 3 on the z-index and 3 -> 2 -> 1 -> 4 on the
omega/2-index.  The two signs differ at beta'.  Only the alpha row is written out in closed form in the
source derivation; the others are checked by f = 1/6 and by the residue
cancellations below.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .equilibrium import ModelParams, endpoint_gap_formulas
from .theta import theta, theta_constants, theta_deriv

TURNING_POINTS = ("alpha", "alpha_p", "beta_p", "beta")

# (z-theta, omega/2-theta, xi sign, eta sign)
ROWS = {
    "alpha": (4, 3, 1, 1),
    "alpha_p": (1, 2, -1, -1),
    "beta_p": (2, 1, 1, -1),
    "beta": (3, 4, -1, 1),
}

# which gap sits in the denominator of each eta term
_DENOM = {"alpha": "beta_p-alpha", "alpha_p": "beta-alpha_p",
          "beta_p": "beta_p-alpha", "beta": "beta-alpha_p"}


@dataclass(frozen=True)
class SubleadingConstants:
    Xi: dict
    xi: dict
    eta: dict
    Cc: dict
    Aa: dict
    Bb: dict

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in ("Xi", "xi", "eta", "Cc", "Aa", "Bb")}


@dataclass(frozen=True)
class CorrectionTerm:
    """Per-turning-point contributions X_xi (stored as real magnitudes) and their total f."""

    X_alpha: float
    X_alpha_p: float
    X_beta_p: float
    X_beta: float
    f_value: float


def _lg(j, x, nome):
    return theta_deriv(j, x, nome, 1) / theta(j, x, nome)


def _r2(j, x, nome):
    return theta_deriv(j, x, nome, 2) / theta(j, x, nome)


def _gaps(params: ModelParams) -> dict:
    return endpoint_gap_formulas(params)


def C_constants(g: dict) -> dict:
    """C_xi from the endpoint gaps."""
    a_a = g["alpha_p-alpha"]
    bp_a = g["beta_p-alpha"]
    b_a = g["beta-alpha"]
    b_ap = g["beta-alpha_p"]
    bp_ap = g["beta_p-alpha_p"]
    b_bp = g["beta-beta_p"]
    return {
        "alpha": 3.5 * bp_a + 1.5 * b_a + 1.5 * a_a - a_a * b_a / bp_a,
        "alpha_p": -3.5 * b_ap - 1.5 * bp_ap + 1.5 * a_a - a_a * bp_ap / b_ap,
        "beta_p": -3.5 * bp_a - 1.5 * bp_ap + 1.5 * b_bp - b_bp * bp_ap / bp_a,
        "beta": 3.5 * b_ap + 1.5 * b_a + 1.5 * b_bp - b_bp * b_a / b_ap,
    }


def constants_at(params: ModelParams, n: int) -> SubleadingConstants:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    nome = params.nome
    w = params.omega
    h = 0.5 * w
    z = n * w + h
    c3 = theta_constants(nome)[3]
    t4n = theta(4, n * w, nome)
    g = _gaps(params)

    Xi, xi, eta = {}, {}, {}
    for name, (a, b, sx, se) in ROWS.items():
        Xi[name] = c3 ** 2 * theta(a, z, nome) ** 2 / (theta(b, h, nome) ** 2 * t4n ** 2)
        lz, lh = _lg(a, z, nome), _lg(b, h, nome)
        xi[name] = sx * (lh - lz)
        eta[name] = se * (5 * _r2(a, z, nome) - 5 * _r2(b, h, nome)
                         + 7 * lz * lz + 17 * lh * lh - 24 * lz * lh)

    a_a, bp_a, b_a = g["alpha_p-alpha"], g["beta_p-alpha"], g["beta-alpha"]
    bp_ap, b_ap, b_bp = g["beta_p-alpha_p"], g["beta-alpha_p"], g["beta-beta_p"]
    Aa = {
        "alpha": math.sqrt(a_a * bp_a * b_a),
        "alpha_p": math.sqrt(a_a * bp_ap * b_ap),
        "beta_p": math.sqrt(bp_a * bp_ap * b_bp),
        "beta": math.sqrt(b_a * b_ap * b_bp),
    }
    Bb = {
        "alpha": 1 / a_a + 1 / bp_a + 1 / b_a,
        "alpha_p": -1 / a_a + 1 / bp_ap + 1 / b_ap,
        "beta_p": 1 / bp_a + 1 / bp_ap - 1 / b_bp,
        "beta": 1 / b_a + 1 / b_ap + 1 / b_bp,
    }
    return SubleadingConstants(Xi=Xi, xi=xi, eta=eta, Cc=C_constants(g), Aa=Aa, Bb=Bb)


def _A(nome, w):
    return math.pi * theta_constants(nome)[1] / (2 * theta(1, w, nome))


def correction_term(params: ModelParams, n: int) -> CorrectionTerm:
    """Assemble X_xi = Xi/96 (C + 12 pi xi + pi^2 eta / (2 D)) and f."""
    k = constants_at(params, n)
    g = _gaps(params)
    nome, w = params.nome, params.omega
    scale = theta(4, n * w, nome) / (_A(nome, w) * theta(4, (n + 1) * w, nome))
    X = {}
    for name in TURNING_POINTS:
        D = g[_DENOM[name]]
        X[name] = k.Xi[name] / 96 * (k.Cc[name] + 12 * math.pi * k.xi[name]
                                     + math.pi ** 2 * k.eta[name] / (2 * D))
    total = math.fsum(X.values()) * scale
    return CorrectionTerm(X_alpha=X["alpha"], X_alpha_p=X["alpha_p"],
                          X_beta_p=X["beta_p"], X_beta=X["beta"], f_value=total)


def f_value(params: ModelParams, n: int) -> float:
    return correction_term(params, n).f_value


# --------------------------------------------------------------------------
# the Q_jk / h_jk form
# --------------------------------------------------------------------------

def _q_rows(omega: float, nome, gaps: dict, C: dict | None) -> dict:
    """Q_j1..Q_j4 for every turning point.  Q_j1 needs C and is None without it."""
    h = 0.5 * omega
    c = theta_constants(nome)
    base = theta(1, omega, nome) * c[3] ** 2 / (48 * math.pi * c[1])
    out = {}
    for name, (_, b, sx, se) in ROWS.items():
        tb = theta(b, h, nome)
        P = base / tb ** 2
        D = gaps[_DENOM[name]]
        lb = theta_deriv(b, h, nome, 1) / tb
        rb = theta_deriv(b, h, nome, 2) / tb
        q1 = None
        if C is not None:
            q1 = P * (C[name] + sx * 12 * math.pi * lb
                      + se * math.pi ** 2 / (2 * D) * (-5 * rb + 17 * lb * lb))
        q2 = P * (-sx * 12 * math.pi - se * 12 * math.pi ** 2 * lb / D)
        q3 = se * 7 * math.pi ** 2 * P / (2 * D)
        q4 = se * 5 * math.pi ** 2 * P / (2 * D)
        out[name] = (q1, q2, q3, q4)
    return out


def _h_row(a: int, z: float, omega: float, nome) -> tuple:
    h = 0.5 * omega
    den = theta(4, z - h, nome) * theta(4, z + h, nome)
    t0 = theta(a, z, nome)
    t1 = theta_deriv(a, z, nome, 1)
    t2 = theta_deriv(a, z, nome, 2)
    return (t0 * t0 / den, t1 * t0 / den, t1 * t1 / den, t2 * t0 / den)


def _gaps_from_omega(omega: float, nome) -> dict:
    h = 0.5 * omega
    c = theta_constants(nome)
    t1, t2, t3, t4 = (theta(j, h, nome) for j in (1, 2, 3, 4))
    pi = math.pi
    return {
        "alpha_p-alpha": pi * c[4] ** 2 * t2 * t3 / (t1 * t4),
        "beta_p-alpha_p": pi * c[2] ** 2 * t1 * t2 / (t3 * t4),
        "beta-beta_p": pi * c[4] ** 2 * t1 * t4 / (t2 * t3),
        "beta-alpha": pi * c[2] ** 2 * t3 * t4 / (t1 * t2),
        "beta-alpha_p": pi * c[3] ** 2 * t1 * t3 / (t2 * t4),
        "beta_p-alpha": pi * c[3] ** 2 * t2 * t4 / (t1 * t3),
    }


def q34_closed_forms(omega: float, nome) -> dict:
    """Q_j3 + Q_j4 written with theta values at omega/2 only (no gaps)."""
    h = 0.5 * omega
    c = theta_constants(nome)
    t1, t2, t3, t4 = (theta(j, h, nome) for j in (1, 2, 3, 4))
    k = theta(1, omega, nome) / (8 * c[1])
    return {
        "alpha": k * t1 / (t2 * t3 * t4),
        "alpha_p": -k * t4 / (t1 * t2 * t3),
        "beta_p": -k * t3 / (t1 * t2 * t4),
        "beta": k * t2 / (t1 * t3 * t4),
    }


def q34_sums(omega: float, nome) -> dict:
    rows = _q_rows(omega, nome, _gaps_from_omega(omega, nome), None)
    return {name: r[2] + r[3] for name, r in rows.items()}


def residue_sums(z: float, omega: float, nome) -> dict:
    """The three sums that must vanish for the Y_j to be doubly periodic.

    q2:      sum_j Q_j2 h_j1(z)
    q34_h1:  sum_j (Q_j3 + Q_j4) h_j1(z)
    q34_h2:  sum_j (Q_j3 + Q_j4) h_j2(z)

    ``scale`` holds sum_j |term_j| for each, the natural size against which
    cancellation is judged.
    """
    rows = _q_rows(omega, nome, _gaps_from_omega(omega, nome), None)
    s2, s34a, s34b = [], [], []
    for name, (a, *_) in ROWS.items():
        hr = _h_row(a, z, omega, nome)
        _, q2, q3, q4 = rows[name]
        s2.append(q2 * hr[0])
        s34a.append((q3 + q4) * hr[0])
        s34b.append((q3 + q4) * hr[1])
    return {"q2": math.fsum(s2), "q34_h1": math.fsum(s34a), "q34_h2": math.fsum(s34b),
            "scale": {"q2": math.fsum(map(abs, s2)), "q34_h1": math.fsum(map(abs, s34a)),
                      "q34_h2": math.fsum(map(abs, s34b))}}


def residue_identities(params: ModelParams, z: float) -> tuple[float, float, float]:
    """Absolute values of the three residue sums at real z."""
    r = residue_sums(z, params.omega, params.nome)
    return abs(r["q2"]), abs(r["q34_h1"]), abs(r["q34_h2"])


def f_from_rows(params: ModelParams, n: int) -> float:
    """f as sum_j sum_k Q_jk h_jk(n omega + omega/2): the Y_j form."""
    nome, w = params.nome, params.omega
    g = _gaps(params)
    rows = _q_rows(w, nome, g, C_constants(g))
    z = n * w + 0.5 * w
    terms = []
    for name, (a, *_) in ROWS.items():
        hr = _h_row(a, z, w, nome)
        terms.extend(q * hv for q, hv in zip(rows[name], hr))
    return math.fsum(terms)


def random_residue_check(params: ModelParams, trials: int, seed: int) -> float:
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        worst = max(worst, *residue_identities(params, rng.uniform(-math.pi, math.pi)))
    return worst


__all__ = [
    "CorrectionTerm", "SubleadingConstants", "TURNING_POINTS", "constants_at", "correction_term",
    "f_from_rows", "f_value", "q34_closed_forms", "q34_sums", "residue_identities", "residue_sums",
]

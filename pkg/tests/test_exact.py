import json
import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from sixvertex import exact
from sixvertex.enumerate import brute_force_Z
from sixvertex.equilibrium import ModelParams
from sixvertex.errors import DomainError, PrecisionExhausted

P = 256


def rel(a, b, bits=1024):
    with mp.workprec(bits):
        return abs(a - b) / abs(b)


def two_pow(k):
    return mpmath.ldexp(mpf(1), k)


def polylog_moment(g, t, k, bits):
    # sum over l>0 and l<0 separately in closed form
    with mp.workprec(bits):
        x = mpmath.exp(-2 * (mpf(g) - mpf(t)))
        y = mpmath.exp(-2 * (mpf(g) + mpf(t)))
        if k == 0:
            return 1 + x / (1 - x) + y / (1 - y)
        return mpmath.polylog(-k, x) + (-1) ** k * mpmath.polylog(-k, y)


def test_m0_closed_forms():
    T = exact.moments(ModelParams(1.0, 0.0), 2, P)
    with mp.workprec(P + 32):
        assert rel(T.m[0], mpmath.coth(1), P + 32) <= two_pow(-P + 8)
    assert float(T.m[0]) == pytest.approx(1.3130352854993312, rel=1e-16)
    assert T.m[1] == 0
    for g, t in ((0.7, 0.3), (2.0, -1.1)):
        T = exact.moments(ModelParams(g, t), 1, P)
        with mp.workprec(P + 32):
            gm, tm = mpf(g), mpf(t)
            closed = mpmath.sinh(2 * gm) / (mpmath.sinh(gm - tm) * mpmath.sinh(gm + tm))
            assert rel(2 * T.m[0], closed) <= two_pow(-P + 8)


@pytest.mark.parametrize("g,t", [(1.0, 0.2), (0.4, -0.3), (2.5, 1.9)])
def test_moments_polylog_oracle(g, t):
    T = exact.moments(ModelParams(g, t), 6, P)
    for k, mk in enumerate(T.m):
        assert rel(mk, polylog_moment(g, t, k, P + 64)) <= two_pow(-P + 8)


def _spec_L(g, t, n, bits, m0):
    d = g - abs(t)
    L = 1
    while (math.log(2 * n) + (2 * n - 2) * math.log(L) - 2 * d * L
           - math.log1p(-math.exp(-2 * d))) >= -bits * math.log(2) + math.log(m0):
        L += 1
    return L


@pytest.mark.parametrize("g,t,n", [(1.0, 0.2, 3), (0.3, 0.25, 10), (2.0, -1.5, 20)])
def test_truncation_tail(g, t, n):
    T = exact.moments(ModelParams(g, t), n, P)
    assert max(T.L) >= _spec_L(g, t, n, P, float(T.m[0]))
    J = 2 * n - 2
    with mp.workprec(T.work_bits + 64):
        Lm, Lp = T.L
        tail = mpmath.nsum(lambda l: l ** J * mpmath.exp(-2 * (g - t) * l), [Lp + 1, mpmath.inf])
        tail += mpmath.nsum(lambda l: l ** J * mpmath.exp(-2 * (g + t) * l), [Lm + 1, mpmath.inf])
        assert tail < two_pow(-T.work_bits) * T.m[0]


def test_low_norms():
    T = exact.moments(ModelParams(0.9, 0.4), 4, P)
    h = exact.norms(T, 4)
    with mp.workprec(T.work_bits):
        m = T.m
        assert rel(h[0], m[0]) <= two_pow(-P)
        assert rel(h[1], m[2] - m[1] ** 2 / m[0]) <= two_pow(-P + 8)
    assert all(x > 0 for x in h)


def test_h2_gram_schmidt_oracle():
    g, t, n = 1.0, 0.2, 3
    T = exact.moments(ModelParams(g, t), n, P)
    h = exact.norms(T, n)
    with mp.workprec(2 * P):
        gm, tm = mpf(g), mpf(t)
        Lm, Lp = T.L
        lattice = range(-Lm, Lp + 1)
        w = [mpmath.exp(2 * tm * l - 2 * gm * abs(l)) for l in lattice]

        def values(coeffs):
            return [mpmath.polyval(coeffs[::-1], l) for l in lattice]

        def ip(u, v):
            return mpmath.fsum(a * b * c for a, b, c in zip(w, u, v))

        # orthogonalise 1, x, x^2 against each other on the lattice directly
        basis = []
        for k in range(n):
            v = values([0] * k + [1])
            for b in basis:
                c = ip(v, b) / ip(b, b)
                v = [x - c * y for x, y in zip(v, b)]
            basis.append(v)
        h2 = ip(basis[2], basis[2])
    assert rel(h[2], h2) <= two_pow(-P // 2)


def test_tau_small_n():
    T = exact.moments(ModelParams(1.0, 0.0), 2, P)
    with mp.workprec(P):
        assert rel(exact.tau(T, 1), 2 * T.m[0]) <= two_pow(-P + 4)
        tau2 = 16 * (T.m[0] * T.m[2] - T.m[1] ** 2)
        assert rel(exact.tau(T, 2), tau2) <= two_pow(-P + 8)
        assert rel(exact.tau_from_phi_determinant(T, 2), tau2) <= two_pow(-P + 8)


@settings(max_examples=10, deadline=None)
@given(g=st.floats(min_value=0.3, max_value=2.5), f=st.floats(min_value=-0.9, max_value=0.9),
       n=st.integers(1, 12))
def test_tau_two_routes(g, f, n):
    bits = 512
    T = exact.moments(ModelParams(g, f * g), n, bits, guard=64)
    t1 = exact.tau(T, n)
    t2 = exact.tau_from_phi_determinant(T, n)
    assert t1 > 0
    assert rel(t1, t2) <= two_pow(-bits // 2)


@settings(max_examples=15, deadline=None)
@given(g=st.floats(min_value=0.1, max_value=4.0), f=st.floats(min_value=-0.99, max_value=0.99))
def test_Z1_is_c(g, f):
    sol = exact.partition_exact(ModelParams(g, f * g), 1)
    with mp.workprec(sol.precision_bits):
        assert rel(sol.Z_n, mpmath.sinh(2 * mpf(g))) <= two_pow(-sol.precision_bits // 2)


@pytest.mark.parametrize("n", [2, 5, 9])
def test_t_reflection(n):
    a = exact.partition_exact(ModelParams(1.1, 0.35), n)
    b = exact.partition_exact(ModelParams(1.1, -0.35), n)
    assert rel(a.Z_n, b.Z_n) <= two_pow(-a.precision_bits // 2)


def test_n4_against_brute_force():
    p = ModelParams(1.0, 0.3)
    sol = exact.partition_exact(p, 4)
    assert rel(sol.Z_n, brute_force_Z(p, 4, sol.precision_bits)) <= two_pow(-sol.precision_bits // 2)


def test_positive_and_minors():
    sol = exact.partition_exact(ModelParams(0.6, -0.5), 10)
    assert sol.Z_n > 0
    assert all(x > 0 for x in sol.h)
    with mp.workprec(sol.precision_bits):
        minors = [mpmath.fprod(sol.h[: k + 1]) for k in range(10)]
    assert all(d > 0 for d in minors)


def test_toda_examples():
    bits = 512
    assert exact.toda_residual(ModelParams(1.0, 0.3), 1, bits) <= two_pow(-bits // 2)
    r = exact.toda_residual(ModelParams(0.8, -0.2), 5, bits)
    assert r <= two_pow(-bits // 2)
    r_flip = exact.toda_residual(ModelParams(0.8, 0.2), 5, bits)
    assert r_flip <= two_pow(-bits // 2)


def test_toda_derivatives_by_finite_differences():
    # independent check of the shifted-row derivative formulas
    g, t, n, bits = 0.8, -0.2, 4, 512
    T = exact.toda_terms(ModelParams(g, t), n, bits)
    with mp.workprec(bits):
        def tau_at(tt):
            table = exact.moments(ModelParams(g, float(tt)), n, bits, guard=128)
            return exact.tau(table, n)
        # the shifted t values are exactly representable doubles
        hstep = 2.0 ** -40
        tp, t0, tm = tau_at(t + hstep), tau_at(t), tau_at(t - hstep)
        d1 = (tp - tm) / (2 * hstep)
        d2 = (tp - 2 * t0 + tm) / hstep ** 2
        assert rel(T["d1"], d1, bits) <= mpf("1e-18")
        assert rel(T["d2"], d2, bits) <= mpf("1e-18")


@pytest.mark.parametrize("n", [3, 8])
def test_orthogonality(n):
    T = exact.moments(ModelParams(0.9, 0.25), n, P)
    polys = exact.monic_polynomials(T, n)
    h = exact.norms(T, n)
    with mp.workprec(T.work_bits):
        hmax = max(h)
        for j in range(n):
            for k in range(j):
                ipjk = mpmath.fsum(a * b * T.m[r + s] for r, a in enumerate(polys[j])
                                   for s, b in enumerate(polys[k]))
                assert abs(ipjk) <= two_pow(-P // 2) * hmax


def test_recurrence_coefficients():
    T = exact.moments(ModelParams(1.0, 0.0), 6, P)
    a, b = exact.recurrence_coefficients(T, 6)
    # even weight: zero diagonal coefficients
    assert all(abs(x) <= two_pow(-P // 2) for x in a)
    assert all(x > 0 for x in b[1:])


def test_ladder_recovers_from_pivot_failure(monkeypatch):
    real = exact._solve_once

    def flaky(params, n, P, extra_order=0):
        if P < 1024:
            raise PrecisionExhausted("forced", precision_bits=P)
        return real(params, n, P, extra_order)

    monkeypatch.setattr(exact, "_solve_once", flaky)
    sol = exact.partition_exact(ModelParams(1.0, 0.3), 4, 256)
    assert sol.precision_bits == 1024
    events = [e["event"] for e in sol.ladder]
    assert events == ["non-positive pivot", "non-positive pivot", "accepted"]


def test_ladder_exhaustion(monkeypatch):
    def always(params, n, P, extra_order=0):
        raise PrecisionExhausted("forced", precision_bits=P)

    monkeypatch.setattr(exact, "_solve_once", always)
    with pytest.raises(PrecisionExhausted):
        exact.partition_exact(ModelParams(1.0, 0.3), 4, 256, max_retries=2)


def test_large_gamma_pivot_path():
    sol = exact.partition_exact(ModelParams(10.0, 0.0), 12, 64)
    assert sol.ladder[0]["event"] == "non-positive pivot"
    assert sol.ladder[-1]["event"] == "accepted"
    with pytest.raises(PrecisionExhausted):
        exact.partition_exact(ModelParams(15.0, 0.0), 12, 64, max_retries=1)


def test_json_schema():
    sol = exact.partition_exact(ModelParams(1.0, 0.3), 3)
    d = json.loads(json.dumps(sol.to_json()))
    assert set(d) == {"n", "precision_bits", "tau_n", "h", "Z_n", "est_rel_err"}
    assert d["n"] == 3 and len(d["h"]) == 3
    with mp.workprec(sol.precision_bits):
        assert rel(mpf(d["Z_n"]), sol.Z_n, sol.precision_bits) <= two_pow(-sol.precision_bits + 4)
    assert "e" in d["Z_n"]


def test_log_prefix():
    sol = exact.partition_exact(ModelParams(1.0, 0.3), 6)
    logs = sol.log_Z_prefix()
    for k in (1, 3, 6):
        Zk = exact.partition_exact(ModelParams(1.0, 0.3), k).Z_n
        assert float(logs[k - 1]) == pytest.approx(float(mpmath.log(Zk)), rel=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        exact.partition_exact(ModelParams(1.0, 0.3), 0)
    with pytest.raises(DomainError):
        exact.partition_exact(ModelParams(1.0, 0.3), 3, 32)
    assert exact.default_precision(2) == 256
    assert exact.default_precision(10) == 960

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixvertex.elliptic import (
    K_quadrature,
    Kprime_quadrature,
    cn,
    context_from_gamma,
    dn,
    gauss_legendre,
    jacobi_Z,
    sn,
    sn_by_inversion,
)
from sixvertex.theta import ThetaDomainError

gammas = st.floats(min_value=0.3, max_value=3.0)


def test_nome_at_half_pi():
    assert context_from_gamma(math.pi / 2).nome.q == pytest.approx(math.exp(-math.pi), rel=1e-15)


@pytest.mark.parametrize("gamma", [0.3, 0.7, 1.0, 1.8, 3.0])
def test_K_against_quadrature(gamma):
    ctx = context_from_gamma(gamma)
    assert ctx.K == pytest.approx(K_quadrature(ctx.k), abs=1e-10)
    assert ctx.Kprime == pytest.approx(Kprime_quadrature(ctx.k), rel=1e-10)
    assert ctx.Kprime / ctx.K == pytest.approx(math.pi / (2 * gamma), rel=1e-12)


def test_large_gamma_limit():
    ctx = context_from_gamma(50.0)
    assert ctx.nome.q > 0.9
    assert ctx.Kprime / ctx.K < 0.04


def test_values_at_zero_and_K():
    ctx = context_from_gamma(1.0)
    assert sn(0.0, ctx) == 0.0
    assert cn(0.0, ctx) == pytest.approx(1.0, rel=1e-15)
    assert dn(0.0, ctx) == pytest.approx(1.0, rel=1e-15)
    assert sn(ctx.K, ctx) == pytest.approx(1.0, rel=1e-13)
    assert jacobi_Z(0.0, ctx) == 0.0


@settings(max_examples=100, deadline=None)
@given(g=gammas, x=st.floats(min_value=-1.0, max_value=1.0))
def test_pythagorean_identities(g, x):
    ctx = context_from_gamma(g)
    u = x * 2 * ctx.K
    s, c, d = sn(u, ctx), cn(u, ctx), dn(u, ctx)
    assert s * s + c * c == pytest.approx(1.0, abs=1e-12)
    assert d * d + ctx.k ** 2 * s * s == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(g=gammas, x=st.floats(min_value=-1.0, max_value=1.0))
def test_Z_period(g, x):
    ctx = context_from_gamma(g)
    u = x * ctx.K
    assert jacobi_Z(u + 2 * ctx.K, ctx) == pytest.approx(jacobi_Z(u, ctx), abs=1e-12)


def test_Z_addition_formula():
    rng = random.Random(5)
    for _ in range(200):
        ctx = context_from_gamma(rng.uniform(0.3, 3.0))
        u = rng.uniform(-2, 2) * ctx.K
        a = rng.uniform(-2, 2) * ctx.K
        k2 = ctx.k ** 2
        sa, su = sn(a, ctx), sn(u, ctx)
        den = 1 - k2 * sa * sa * su * su
        if den < 1e-3:
            continue
        lhs = jacobi_Z(u - a, ctx) - jacobi_Z(u + a, ctx) + 2 * jacobi_Z(a, ctx)
        rhs = 2 * k2 * sa * cn(a, ctx) * dn(a, ctx) * su * su / den
        assert lhs == pytest.approx(rhs, abs=1e-11)


def test_sn_addition_formula():
    rng = random.Random(6)
    for _ in range(200):
        ctx = context_from_gamma(rng.uniform(0.3, 3.0))
        u = rng.uniform(-2, 2) * ctx.K
        a = rng.uniform(-2, 2) * ctx.K
        k2 = ctx.k ** 2
        su, sa = sn(u, ctx), sn(a, ctx)
        den = 1 - k2 * su * su * sa * sa
        if den < 1e-3:
            continue
        rhs = (su * cn(a, ctx) * dn(a, ctx) + sa * cn(u, ctx) * dn(u, ctx)) / den
        assert sn(u + a, ctx) == pytest.approx(rhs, abs=1e-12)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.5])
def test_sn_by_inversion(gamma):
    ctx = context_from_gamma(gamma)
    for frac in (0.1, 0.37, 0.8, 1.0):
        u = frac * ctx.K
        assert sn_by_inversion(u, ctx.k) == pytest.approx(sn(u, ctx), abs=1e-11)


def test_gauss_legendre_polynomial_exact():
    assert gauss_legendre(lambda x: x ** 5 - 3 * x ** 2, -1.0, 2.0) == pytest.approx(10.5 - 9.0, rel=1e-13)


def test_bad_gamma():
    with pytest.raises(ThetaDomainError):
        context_from_gamma(0.0)

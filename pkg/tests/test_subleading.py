import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sixvertex import subleading as sub
from sixvertex.equilibrium import ModelParams, endpoint_gap_formulas
from sixvertex.theta import theta, theta_constants, theta_deriv

params = st.builds(
    lambda g, f: ModelParams(g, f * g),
    st.floats(min_value=0.3, max_value=3.0),
    st.floats(min_value=-0.9, max_value=0.9),
)


@settings(max_examples=100, deadline=None)
@given(p=params, n=st.integers(1, 30))
def test_f_is_one_sixth(p, n):
    assert sub.f_value(p, n) == pytest.approx(1 / 6, abs=1e-10)
    assert sub.f_value(p, n + 1) == pytest.approx(sub.f_value(p, n), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(p=params, n=st.integers(1, 12))
def test_two_assembly_routes(p, n):
    assert sub.f_from_rows(p, n) == pytest.approx(sub.f_value(p, n), abs=1e-11)


def test_residue_examples():
    p = ModelParams(1.2, 0.4)
    q2, q34a, q34b = sub.residue_identities(p, 0.7)
    assert q34a <= 1e-11
    assert max(q2, q34b) <= 1e-11


def test_residues_random():
    rng = random.Random(21)
    worst = 0.0
    for _ in range(1000):
        g = rng.uniform(0.3, 3.0)
        p = ModelParams(g, rng.uniform(-0.9, 0.9) * g)
        worst = max(worst, *sub.residue_identities(p, rng.uniform(-math.pi, math.pi)))
    assert worst <= 1e-11


@settings(max_examples=100, deadline=None)
@given(p=params)
def test_q34_closed_forms(p):
    closed = sub.q34_closed_forms(p.omega, p.nome)
    sums = sub.q34_sums(p.omega, p.nome)
    assert set(closed) == set(sums) == set(sub.TURNING_POINTS)
    for k in closed:
        assert sums[k] == pytest.approx(closed[k], rel=1e-12, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(p=params, n=st.integers(1, 20))
def test_constants_structure(p, n):
    k = sub.constants_at(p, n)
    assert all(v > 0 for v in k.Aa.values())
    for d in k.as_dict().values():
        assert all(math.isfinite(v) for v in d.values())
    # Xi_alpha theta3^2(w/2) theta4^2(nw) = theta3^2(0) theta4^2(nw + w/2)
    w, nome = p.omega, p.nome
    lhs = k.Xi["alpha"] * theta(3, w / 2, nome) ** 2 * theta(4, n * w, nome) ** 2
    rhs = theta_constants(nome)[3] ** 2 * theta(4, n * w + w / 2, nome) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_xi_alpha_zero_field():
    p = ModelParams(1.0, 0.0)
    nome = p.nome
    lg = lambda j, x: theta_deriv(j, x, nome) / theta(j, x, nome)  # noqa: E731
    for n in (2, 3, 4):
        expected = lg(3, math.pi / 4) - lg(4, math.pi / 4 + n * math.pi / 2)
        assert sub.constants_at(p, n).xi["alpha"] == pytest.approx(expected, rel=1e-12, abs=1e-14)
    assert sub.constants_at(p, 2).xi["alpha"] == pytest.approx(sub.constants_at(p, 4).xi["alpha"], rel=1e-13)


def test_C_sum_two_orders():
    p = ModelParams(1.3, -0.5)
    g = endpoint_gap_formulas(p)
    C = sub.C_constants(g)
    # the same sum collected by gap instead of by turning point
    by_gap = (1.5 * 2 * g["alpha_p-alpha"] + 1.5 * 2 * g["beta-alpha"] + 1.5 * 2 * g["beta-beta_p"]
              - 1.5 * g["beta_p-alpha_p"] * 2
              - g["alpha_p-alpha"] * g["beta-alpha"] / g["beta_p-alpha"]
              - g["alpha_p-alpha"] * g["beta_p-alpha_p"] / g["beta-alpha_p"]
              - g["beta-beta_p"] * g["beta_p-alpha_p"] / g["beta_p-alpha"]
              - g["beta-beta_p"] * g["beta-alpha"] / g["beta-alpha_p"])
    assert math.fsum(C.values()) == pytest.approx(by_gap, rel=1e-13)


def test_correction_term_total():
    ct = sub.correction_term(ModelParams(0.8, 0.1), 3)
    assert ct.f_value == pytest.approx(1 / 6, abs=1e-10)
    assert all(math.isfinite(x) for x in (ct.X_alpha, ct.X_alpha_p, ct.X_beta_p, ct.X_beta))

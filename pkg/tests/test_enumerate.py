import random

import mpmath
import pytest
from mpmath import mp

from sixvertex.enumerate import (
    VERTEX_TYPES,
    SizeError,
    brute_force_Z,
    enumerate_configs,
    vertex_census,
    weighted_count,
)
from sixvertex.equilibrium import ModelParams
from sixvertex.exact import partition_exact

ASM_COUNTS = {1: 1, 2: 2, 3: 7, 4: 42, 5: 429, 6: 7436}
ARROWS = {v: k for k, v in VERTEX_TYPES.items()}  # type -> (L, R, U, D)


def rel(a, b, bits=1024):
    with mp.workprec(bits):
        return abs(a - b) / abs(b)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_counts(n):
    assert sum(1 for _ in enumerate_configs(n)) == ASM_COUNTS[n]


def test_count_n6():
    assert sum(1 for _ in enumerate_configs(6)) == 7436


def test_single_vertex():
    (cfg,) = list(enumerate_configs(1))
    assert vertex_census(cfg) == (0, 0, 0, 0, 1, 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ice_rule_and_boundaries(n):
    for cfg in enumerate_configs(n):
        arrows = [[ARROWS[t] for t in row] for row in cfg.types]
        for i in range(n):
            for j in range(n):
                L, R, U, D = arrows[i][j]
                assert L - R + D - U == 0
                if j + 1 < n:
                    assert R == arrows[i][j + 1][0]
                if i + 1 < n:
                    assert D == arrows[i + 1][j][2]
        assert all(arrows[0][j][2] == -1 for j in range(n))
        assert all(arrows[n - 1][j][3] == 1 for j in range(n))
        assert all(arrows[i][0][0] == -1 for i in range(n))
        assert all(arrows[i][n - 1][1] == 1 for i in range(n))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_census_invariants(n):
    configs = list(enumerate_configs(n))
    assert len(set(configs)) == len(configs)
    for cfg in configs:
        N = vertex_census(cfg)
        assert sum(N) == n * n
        assert N[4] - N[5] == n


def test_asm_rows():
    for cfg in enumerate_configs(4):
        M = cfg.asm()
        for row in M + [list(c) for c in zip(*M)]:
            assert sum(row) == 1
            partial = [sum(row[: k + 1]) for k in range(4)]
            assert all(p in (0, 1) for p in partial)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_unit_weights_give_asm_count(n):
    assert weighted_count(n, 1, 1, 1) == ASM_COUNTS[n]


def test_Z1_and_n2():
    p = ModelParams(1.2, 0.0)
    with mp.workprec(256):
        assert rel(brute_force_Z(p, 1, 256), mpmath.sinh(mpmath.mpf(2.4))) <= mpmath.ldexp(1, -250)
    Z2 = brute_force_Z(p, 2, 256)
    assert rel(Z2, partition_exact(p, 2, 256).Z_n) <= mpmath.ldexp(1, -128)
    # Z_2 = c^2 (a^2 + b^2), symmetric in a and b
    assert weighted_count(2, 2, 3, 1) == weighted_count(2, 3, 2, 1) == 13


def test_reflection_and_exact_agreement():
    rng = random.Random(11)
    for _ in range(20):
        g = rng.uniform(0.3, 2.5)
        t = rng.uniform(-0.9, 0.9) * g
        for n in (3, 4):
            bf = brute_force_Z(ModelParams(g, t), n, 256)
            assert rel(bf, brute_force_Z(ModelParams(g, -t), n, 256)) <= mpmath.ldexp(1, -240)
            assert rel(bf, partition_exact(ModelParams(g, t), n, 256).Z_n) <= mpmath.ldexp(1, -128)


def test_line_format():
    lines = [cfg.to_line() for cfg in enumerate_configs(2)]
    # anti-diagonal and identity ASMs
    assert sorted(lines) == ["25 51", "53 45"]


def test_size_limits():
    for n in (0, 7, 2.5):
        with pytest.raises(SizeError):
            list(enumerate_configs(n))

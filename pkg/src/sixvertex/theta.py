"""Jacobi theta functions by direct q-series.

Convention (nome q, 0 < q < 1):

    theta1(z) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) z)
    theta2(z) = 2 sum_{n>=0}        q^{(n+1/2)^2} cos((2n+1) z)
    theta3(z) = 1 + 2 sum_{n>=1}        q^{n^2} cos(2 n z)
    theta4(z) = 1 + 2 sum_{n>=1} (-1)^n q^{n^2} cos(2 n z)

Arguments may be Python floats (double precision), complex numbers (used
only for quasi-period shifts by pi*tau) or mpmath ``mpf`` values, in which
case the series is summed at the current ``mp.prec``.

Besides evaluation, the module carries a catalogue of classical theta
identities (``IDENTITIES``) together with ``identity_residual``, which
returns |LHS - RHS| for a named identity.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Callable, Union

import mpmath
from mpmath import mp

from .errors import DomainError

Real = Union[float, "mpmath.mpf"]

MAX_TERMS = 100_000


class ThetaDomainError(DomainError):
    """Bad nome, unknown index or unknown identity name."""


class ThetaPoleError(ZeroDivisionError):
    """An identity was evaluated where its rational form has a pole."""


@dataclass(frozen=True)
class Nome:
    """Nome q = exp(i*pi*tau) with tau purely imaginary."""

    q: float

    def __post_init__(self) -> None:
        if not 0.0 < float(self.q) < 1.0:
            raise ThetaDomainError(f"nome must lie in (0, 1), got {self.q!r}")

    @property
    def tau(self) -> complex:
        return complex(0.0, -math.log(float(self.q)) / math.pi)

    @property
    def pi_tau(self) -> complex:
        """The quasi-period pi*tau (purely imaginary)."""
        return complex(0.0, -math.log(float(self.q)))

    @classmethod
    def from_gamma(cls, gamma: float) -> "Nome":
        """Nome tied to the anisotropy parameter: q = exp(-pi^2 / (2 gamma))."""
        if not gamma > 0:
            raise ThetaDomainError(f"gamma must be positive, got {gamma!r}")
        if isinstance(gamma, mpmath.mpf):
            return cls(mpmath.exp(-mpmath.pi ** 2 / (2 * gamma)))
        return cls(math.exp(-math.pi ** 2 / (2.0 * gamma)))


@dataclass(frozen=True)
class ThetaValue:
    value: Real
    derivative1: Real
    derivative2: Real


def _q_of(nome: Nome | float) -> Real:
    q = nome.q if isinstance(nome, Nome) else nome
    if isinstance(q, mpmath.mpf):
        if not 0 < q < 1:
            raise ThetaDomainError(f"nome must lie in (0, 1), got {q!r}")
        return q
    if isinstance(q, complex) or not 0.0 < float(q) < 1.0:
        raise ThetaDomainError(f"nome must lie in (0, 1), got {q!r}")
    return float(q)


def _backend(z, q):
    """Pick (sin, cos, eps, exp, abs_imag) for the argument types."""
    if isinstance(z, (mpmath.mpf, mpmath.mpc)) or isinstance(q, mpmath.mpf):
        z = mpmath.mpmathify(z)
        q = mpmath.mpf(q)
        imag = abs(mpmath.im(z)) if isinstance(z, mpmath.mpc) else 0
        return z, q, mpmath.sin, mpmath.cos, mpmath.exp, mp.eps, imag
    if isinstance(z, complex):
        return z, q, cmath.sin, cmath.cos, math.exp, 2.0 ** -53, abs(z.imag)
    return float(z), q, math.sin, math.cos, math.exp, 2.0 ** -53, 0.0


def _series(j: int, z, q, order: int):
    if j not in (1, 2, 3, 4):
        raise ThetaDomainError(f"theta index must be 1..4, got {j!r}")
    if order not in (0, 1, 2):
        raise ThetaDomainError(f"derivative order must be 0, 1 or 2, got {order!r}")
    z, q, sin, cos, exp, eps, imag = _backend(z, q)

    odd = j in (1, 2)
    alternating = j in (1, 4)
    use_sin = j == 1
    # sin(kz) -> k cos(kz) -> -k^2 sin(kz); cos(kz) -> -k sin(kz) -> -k^2 cos(kz)
    if order == 0:
        total = 0 if odd else 1
        scale = 0 if odd else 1
    else:
        total = 0
        scale = 0

    if odd:
        coef = q ** 0.25 if not isinstance(q, mpmath.mpf) else mpmath.root(q, 4)
        step = q ** 2  # q^{(n+1)(n+2)} / q^{n(n+1)} = q^{2(n+1)}
        n = 0
    else:
        coef = q
        step = q ** 3  # q^{(n+1)^2} / q^{n^2} = q^{2n+1}
        n = 1
    q2 = q * q

    count = 0
    while True:
        k = 2 * n + 1 if odd else 2 * n
        kd = k ** order
        bound = coef * kd * (exp(k * imag) if imag else 1)
        if count >= 3 and bound < eps * scale:
            break
        sign = -1 if (alternating and n % 2) else 1
        if order == 0:
            trig = sin(k * z) if use_sin else cos(k * z)
        elif order == 1:
            trig = k * cos(k * z) if use_sin else -k * sin(k * z)
        else:
            trig = -k * k * (sin(k * z) if use_sin else cos(k * z))
        total += 2 * sign * coef * trig
        scale += 2 * bound
        coef *= step
        step *= q2
        n += 1
        count += 1
        if count > MAX_TERMS:
            raise ThetaDomainError("theta series failed to converge")
    return total


def _series_real3(j: int, z: float, q: float) -> tuple[float, float, float]:
    """Value, first and second derivative for real float z in one pass.

    Same truncation rule as ``_series``, applied to each order separately; the
    loop runs until all three are converged.
    """
    odd = j in (1, 2)
    alternating = j in (1, 4)
    use_sin = j == 1
    eps = 2.0 ** -53
    if odd:
        coef, step, n = q ** 0.25, q ** 2, 0
        v = s0 = 0.0
    else:
        coef, step, n = q, q ** 3, 1
        v = s0 = 1.0
    d1 = d2 = s1 = s2 = 0.0
    q2 = q * q
    count = 0
    while True:
        k = 2 * n + 1 if odd else 2 * n
        if count >= 3:
            b0 = coef
            if b0 < eps * s0 and b0 * k < eps * s1 and b0 * k * k < eps * s2:
                break
        c = -2.0 * coef if (alternating and n % 2) else 2.0 * coef
        sk, ck = math.sin(k * z), math.cos(k * z)
        if use_sin:
            v += c * sk
            d1 += c * k * ck
            d2 -= c * k * k * sk
        else:
            v += c * ck
            d1 -= c * k * sk
            d2 -= c * k * k * ck
        s0 += 2 * coef
        s1 += 2 * coef * k
        s2 += 2 * coef * k * k
        coef *= step
        step *= q2
        n += 1
        count += 1
        if count > MAX_TERMS:
            raise ThetaDomainError("theta series failed to converge")
    return v, d1, d2


def theta(j: int, z, nome: Nome | float):
    """theta_j(z) for j in 1..4.

    The series is truncated once the magnitude bound of the next term drops
    below machine epsilon times the accumulated magnitude of the series, and
    at least three oscillating terms have been taken.
    """
    return _series(j, z, _q_of(nome), 0)


def theta_deriv(j: int, z, nome: Nome | float, order: int = 1):
    """d^order/dz^order theta_j(z), by term-wise differentiation."""
    if order not in (1, 2):
        raise ThetaDomainError(f"order must be 1 or 2, got {order!r}")
    return _series(j, z, _q_of(nome), order)


def theta_value(j: int, z, nome: Nome | float) -> ThetaValue:
    q = _q_of(nome)
    return ThetaValue(_series(j, z, q, 0), _series(j, z, q, 1), _series(j, z, q, 2))


def theta_all(z, nome: Nome | float) -> dict[int, ThetaValue]:
    """All four theta functions with derivatives at one point."""
    q = _q_of(nome)
    if isinstance(z, float) and isinstance(q, float):
        return {j: ThetaValue(*_series_real3(j, z, q)) for j in (1, 2, 3, 4)}
    return {j: ThetaValue(_series(j, z, q, 0), _series(j, z, q, 1), _series(j, z, q, 2))
            for j in (1, 2, 3, 4)}


def theta_constants(nome: Nome | float) -> dict[int, Real]:
    """theta_j(0) for j = 2, 3, 4, with theta1'(0) stored under key 1."""
    q = _q_of(nome)
    if isinstance(q, float):
        return dict(_constants_float(q))
    zero = mpmath.mpf(0)
    return {1: _series(1, zero, q, 1), 2: _series(2, zero, q, 0),
            3: _series(3, zero, q, 0), 4: _series(4, zero, q, 0)}


@functools.lru_cache(maxsize=256)
def _constants_float(q: float) -> tuple:
    return ((1, _series(1, 0.0, q, 1)), (2, _series(2, 0.0, q, 0)),
            (3, _series(3, 0.0, q, 0)), (4, _series(4, 0.0, q, 0)))


def reduce_mod_pi(j: int, z: float) -> tuple[float, int]:
    """Shift z into [-pi/2, pi/2) and return (z', sign) with theta_j(z) = sign*theta_j(z')."""
    k = math.floor((z + math.pi / 2) / math.pi)
    zr = z - k * math.pi
    sign = -1 if (j in (1, 2) and k % 2) else 1
    return zr, sign


# --------------------------------------------------------------------------
# identity catalogue
# --------------------------------------------------------------------------

def _check_pole(x, label: str) -> None:
    if x == 0:
        raise ThetaPoleError(f"identity has a pole here ({label} = 0)")


def _pointwise(z, q):
    T = theta_all(z, q)
    th = {j: T[j].value for j in T}
    d1 = {j: T[j].derivative1 for j in T}
    d2 = {j: T[j].derivative2 for j in T}
    return th, d1, d2


def _id_theta1_prime_zero(z, y, q):
    c = theta_constants(q)
    return c[1] - c[2] * c[3] * c[4]


def _first_deriv_via(base: int, target: int, other: tuple[int, int], const: int, sign: int):
    # theta_t' = (theta_b' theta_t + sign * c^2 theta_o1 theta_o2) / theta_b
    def f(z, y, q):
        th, d1, _ = _pointwise(z, q)
        c = theta_constants(q)
        _check_pole(th[base], f"theta{base}(z)")
        rhs = (d1[base] * th[target] + sign * c[const] ** 2 * th[other[0]] * th[other[1]]) / th[base]
        return d1[target] - rhs
    return f


def _second_deriv_via_theta2(target: int, pair: tuple[int, int], c_mid: int,
                              sq: tuple[int, int, int, int]):
    # theta_t'' = theta2'' theta_t / theta2 + 2 theta2' theta_p theta_r c_mid^2 / theta2^2
    #             + theta_t c_w^2 / theta2^2 (theta_a^2 c_b^2 + theta_c^2 c_d^2)
    a, b, cc, d = sq

    def f(z, y, q):
        th, d1, d2 = _pointwise(z, q)
        c = theta_constants(q)
        _check_pole(th[2], "theta2(z)")
        rhs = (d2[2] * th[target] / th[2]
               + 2 * d1[2] * th[pair[0]] * th[pair[1]] * c[c_mid] ** 2 / th[2] ** 2
               + th[target] * c[c_mid] ** 2 / th[2] ** 2 * (th[a] ** 2 * c[b] ** 2 + th[cc] ** 2 * c[d] ** 2))
        return d2[target] - rhs
    return f


def _second_deriv_via_theta1(target: int, pair: tuple[int, int], c_mid: int,
                              sq: tuple[int, int, int, int]):
    # theta_t'' = theta1'' theta_t / theta1 - 2 theta1' theta_p theta_r c_mid^2 / theta1^2
    #             + c_mid^2 theta_t / theta1^2 (theta_a^2 c_b^2 + theta_c^2 c_d^2)
    a, b, cc, d = sq

    def f(z, y, q):
        th, d1, d2 = _pointwise(z, q)
        c = theta_constants(q)
        _check_pole(th[1], "theta1(z)")
        rhs = (d2[1] * th[target] / th[1]
               - 2 * d1[1] * th[pair[0]] * th[pair[1]] * c[c_mid] ** 2 / th[1] ** 2
               + c[c_mid] ** 2 * th[target] / th[1] ** 2 * (th[a] ** 2 * c[b] ** 2 + th[cc] ** 2 * c[d] ** 2))
        return d2[target] - rhs
    return f


def _id_duplication_theta1(z, y, q):
    th, _, _ = _pointwise(z, q)
    c = theta_constants(q)
    return theta(1, 2 * z, q) - 2 * th[1] * th[2] * th[3] * th[4] / c[1]


def _id_duplication_theta3(z, y, q):
    th, _, _ = _pointwise(z, q)
    c = theta_constants(q)
    return theta(3, 2 * z, q) * c[3] * c[2] ** 2 - (th[1] ** 2 * th[4] ** 2 + th[2] ** 2 * th[3] ** 2)


def _id_duplication_theta4(z, y, q):
    th, _, _ = _pointwise(z, q)
    c = theta_constants(q)
    lhs = theta(4, 2 * z, q) * c[4] ** 3
    r1 = lhs - (th[3] ** 4 - th[2] ** 4)
    r2 = lhs - (th[4] ** 4 - th[1] ** 4)
    return r1 if abs(r1) >= abs(r2) else r2


def _id_addition_theta3(z, y, q):
    th, _, _ = _pointwise(z, q)
    ty, _, _ = _pointwise(y, q)
    c = theta_constants(q)
    lhs = theta(3, y + z, q) * theta(3, y - z, q) * c[2] ** 2
    r1 = lhs - (ty[3] ** 2 * th[2] ** 2 + ty[4] ** 2 * th[1] ** 2)
    r2 = lhs - (ty[1] ** 2 * th[4] ** 2 + ty[2] ** 2 * th[3] ** 2)
    return r1 if abs(r1) >= abs(r2) else r2


def _square_relation(left: int, plus: tuple[int, int], minus: tuple[int, int]):
    # theta_l^2 theta4(0)^2 = theta_p^2 c_p^2 - theta_m^2 c_m^2
    def f(z, y, q):
        th, _, _ = _pointwise(z, q)
        c = theta_constants(q)
        return th[left] ** 2 * c[4] ** 2 - (th[plus[0]] ** 2 * c[plus[1]] ** 2 - th[minus[0]] ** 2 * c[minus[1]] ** 2)
    return f


def _id_log_derivative_double(z, y, q):
    th, d1, _ = _pointwise(z, q)
    t2 = theta(1, 2 * z, q)
    _check_pole(t2, "theta1(2z)")
    return theta_deriv(1, 2 * z, q, 1) / t2 - sum(d1[j] / th[j] for j in (1, 2, 3, 4)) / 2


def _residue_sum(which: str):
    def f(z, y, q):
        from .subleading import residue_sums
        _check_pole(theta(1, 0.5 * y, q), "theta1(y/2)")
        return residue_sums(z, y, q)[which]
    return f


IDENTITIES: dict[str, Callable] = {
    "theta1_prime_zero": _id_theta1_prime_zero,
    # first derivatives through theta1
    "d_theta4_via_theta1": _first_deriv_via(1, 4, (2, 3), 4, -1),
    "d_theta2_via_theta1": _first_deriv_via(1, 2, (3, 4), 2, -1),
    "d_theta3_via_theta1": _first_deriv_via(1, 3, (2, 4), 3, -1),
    # first derivatives through theta2
    "d_theta4_via_theta2": _first_deriv_via(2, 4, (1, 3), 3, +1),
    "d_theta1_via_theta2": _first_deriv_via(2, 1, (3, 4), 2, +1),
    "d_theta3_via_theta2": _first_deriv_via(2, 3, (1, 4), 4, +1),
    # second derivatives through theta2
    "d2_theta4_via_theta2": _second_deriv_via_theta2(4, (1, 3), 3, (3, 2, 1, 4)),
    "d2_theta1_via_theta2": _second_deriv_via_theta2(1, (3, 4), 2, (3, 3, 4, 4)),
    "d2_theta3_via_theta2": _second_deriv_via_theta2(3, (1, 4), 4, (4, 2, 1, 3)),
    # second derivatives through theta1
    "d2_theta4_via_theta1": _second_deriv_via_theta1(4, (2, 3), 4, (3, 2, 2, 3)),
    "d2_theta2_via_theta1": _second_deriv_via_theta1(2, (3, 4), 2, (4, 3, 3, 4)),
    "d2_theta3_via_theta1": _second_deriv_via_theta1(3, (2, 4), 3, (4, 2, 2, 4)),
    "duplication_theta1": _id_duplication_theta1,
    "duplication_theta3": _id_duplication_theta3,
    "duplication_theta4": _id_duplication_theta4,
    "addition_theta3": _id_addition_theta3,
    "square_theta1": _square_relation(1, (3, 2), (2, 3)),
    "square_theta2": _square_relation(2, (4, 2), (1, 3)),
    "square_theta3": _square_relation(3, (4, 3), (1, 2)),
    "square_theta4": _square_relation(4, (3, 3), (2, 2)),
    "log_derivative_double": _id_log_derivative_double,
    # residue cancellations; the second argument plays the role of omega
    "residue_sum_q2": _residue_sum("q2"),
    "residue_sum_q34_h1": _residue_sum("q34_h1"),
    "residue_sum_q34_h2": _residue_sum("q34_h2"),
}


def identity_residual(name: str, z, y, nome: Nome | float):
    """|LHS - RHS| of a catalogued identity at (z, y) and nome.

    Identities in a single variable ignore ``y``.  Raises ThetaPoleError
    where the identity's rational form is singular.
    """
    try:
        fn = IDENTITIES[name]
    except KeyError:
        raise ThetaDomainError(f"unknown identity {name!r}") from None
    q = _q_of(nome)
    return abs(fn(z, y, q))


# identities whose rational form divides by theta values at z
_Z_POLES = tuple(k for k in IDENTITIES if k.startswith(("d_", "d2_", "log_derivative")))
SUITE_Q_RANGE = (0.01, 0.3)
SUITE_POLE_MARGIN = 0.1
SUITE_OMEGA_MARGIN = 0.2


def identity_suite(trials: int = 1000, seed: int = 0, names=None) -> dict[str, float]:
    """Max residual of every catalogued identity over ``trials`` random draws.

    q is uniform on SUITE_Q_RANGE and z, y on [-pi, pi].  For the residue
    sums y plays omega and is drawn from (0, pi) minus SUITE_OMEGA_MARGIN at
    both ends.  Draws of z within SUITE_POLE_MARGIN of a multiple of pi/2 are
    redrawn for identities that divide by theta1 or theta2 at z, where double
    precision cannot hold a fixed absolute tolerance.
    """
    import random

    rng = random.Random(seed)
    names = list(IDENTITIES) if names is None else list(names)
    worst = {}
    for name in names:
        if name not in IDENTITIES:
            raise ThetaDomainError(f"unknown identity {name!r}")
        m = 0.0
        for _ in range(trials):
            q = rng.uniform(*SUITE_Q_RANGE)
            while True:
                z = rng.uniform(-math.pi, math.pi)
                k = round(z / (0.5 * math.pi))
                if name not in _Z_POLES or abs(z - 0.5 * math.pi * k) >= SUITE_POLE_MARGIN:
                    break
            if name.startswith("residue_sum"):
                y = rng.uniform(SUITE_OMEGA_MARGIN, math.pi - SUITE_OMEGA_MARGIN)
            else:
                y = rng.uniform(-math.pi, math.pi)
            m = max(m, identity_residual(name, z, y, q))
        worst[name] = m
    return worst

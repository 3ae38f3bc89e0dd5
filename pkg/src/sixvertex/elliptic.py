"""Complete elliptic integrals and Jacobi elliptic functions via theta ratios.

The modulus is tied to the anisotropy gamma through the nome
q = exp(-pi^2/(2 gamma)), so that K'/K = pi/(2 gamma).  Production values
come from theta constants only; the quadrature routines at the bottom are
independent oracles used by the consistency checks and the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError
from .theta import Nome, ThetaDomainError, theta, theta_constants, theta_deriv


@dataclass(frozen=True)
class EllipticContext:
    k: float
    K: float
    Kprime: float
    nome: Nome

    @property
    def kprime(self) -> float:
        return math.sqrt(1.0 - self.k * self.k)


def context_from_gamma(gamma: float) -> EllipticContext:
    if not gamma > 0:
        raise ThetaDomainError(f"gamma must be positive, got {gamma!r}")
    nome = Nome.from_gamma(gamma)
    c = theta_constants(nome)
    K = 0.5 * math.pi * c[3] ** 2
    k = c[2] ** 2 / c[3] ** 2
    return EllipticContext(k=k, K=K, Kprime=K * math.pi / (2.0 * gamma), nome=nome)


def _v(u: float, ctx: EllipticContext) -> float:
    return math.pi * u / (2.0 * ctx.K)


def sn(u: float, ctx: EllipticContext) -> float:
    c = theta_constants(ctx.nome)
    v = _v(u, ctx)
    return c[3] / c[2] * theta(1, v, ctx.nome) / theta(4, v, ctx.nome)


def cn(u: float, ctx: EllipticContext) -> float:
    c = theta_constants(ctx.nome)
    v = _v(u, ctx)
    return c[4] / c[2] * theta(2, v, ctx.nome) / theta(4, v, ctx.nome)


def dn(u: float, ctx: EllipticContext) -> float:
    c = theta_constants(ctx.nome)
    v = _v(u, ctx)
    return c[4] / c[3] * theta(3, v, ctx.nome) / theta(4, v, ctx.nome)


def jacobi_Z(u: float, ctx: EllipticContext) -> float:
    """Z(u) = Theta'(u)/Theta(u) with Theta(u) = theta4(pi u / 2K)."""
    v = _v(u, ctx)
    return math.pi / (2.0 * ctx.K) * theta_deriv(4, v, ctx.nome, 1) / theta(4, v, ctx.nome)


# --------------------------------------------------------------------------
# quadrature oracles
# --------------------------------------------------------------------------

def gauss_legendre(f, a: float, b: float, tol: float = 1e-12, n0: int = 16,
                   nmax: int = 8192) -> float:
    """Integrate a vectorised smooth f over [a, b], doubling nodes until stable."""
    n = n0
    prev = None
    while True:
        x, w = np.polynomial.legendre.leggauss(n)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        val = float(half * np.dot(w, f(mid + half * x)))
        if not math.isfinite(val):
            raise QuadratureError("non-finite quadrature estimate")
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        if n >= nmax:
            raise QuadratureError(f"Gauss-Legendre did not converge (last change {abs(val - prev):.3e})")
        prev = val
        n *= 2


def K_quadrature(k: float, tol: float = 1e-13) -> float:
    """K(k) = int_0^1 dv / sqrt((1-v^2)(1-k^2 v^2)), with v = sin(phi)."""
    return gauss_legendre(lambda p: 1.0 / np.sqrt(1.0 - (k * np.sin(p)) ** 2), 0.0, math.pi / 2, tol)


def Kprime_quadrature(k: float, tol: float = 1e-13) -> float:
    """K' = int_1^{1/k} dv / sqrt((v^2-1)(1-k^2 v^2)).

    With v = 1 + (1/k - 1) sin^2(phi/2) both square-root endpoints cancel
    against the Jacobian.
    """
    span = 1.0 / k - 1.0

    def f(p):
        v = 1.0 + span * np.sin(0.5 * p) ** 2
        return 1.0 / np.sqrt(k * (v + 1.0) * (1.0 + k * v))

    return gauss_legendre(f, 0.0, math.pi, tol)


def sn_by_inversion(u: float, k: float, tol: float = 1e-14) -> float:
    """sn(u) for 0 <= u <= K by inverting u = F(arcsin s) with bisection on quadrature."""
    K = K_quadrature(k)
    if not 0.0 <= u <= K * (1 + 1e-15):
        raise ValueError("sn_by_inversion only covers 0 <= u <= K")
    lo, hi = 0.0, math.pi / 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        F = gauss_legendre(lambda p: 1.0 / np.sqrt(1.0 - (k * np.sin(p)) ** 2), 0.0, mid, 1e-15) if mid > 0 else 0.0
        if F < u:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return math.sin(0.5 * (lo + hi))

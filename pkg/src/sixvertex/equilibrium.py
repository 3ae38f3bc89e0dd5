"""Constrained equilibrium measure of the antiferroelectric log-gas.

The measure lives on [alpha, beta] with a saturated band [alpha', beta'] where
the density equals its upper constraint 1/(2 gamma).  Endpoints and the
Lagrange multiplier are closed-form theta expressions; everything else
(density, resolvent, log-potential) is computed by quadrature.

Every quadrature over an unsaturated band uses the angle substitution

    x = alpha + (alpha' - alpha) sin^2(phi)      on [alpha, alpha']
    x = beta' + (beta - beta') sin^2(phi)        on [beta', beta]

which absorbs the two square-root endpoint singularities of
1/sqrt|R(x)|, R(x) = (x-alpha)(x-alpha')(x-beta')(x-beta), into the
Jacobian.  Where the density itself is integrated against a kernel the
order of integration is swapped so that the kernel is integrated in closed
form and only a single smooth integral remains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .elliptic import Kprime_quadrature, K_quadrature, context_from_gamma, gauss_legendre, sn
from .errors import DomainError, QuadratureError
from .theta import Nome, theta, theta_constants, theta_deriv

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class ModelParams:
    """Anisotropy gamma and field t, with |t| < gamma."""

    gamma: float
    t: float

    def __post_init__(self) -> None:
        g, t = float(self.gamma), float(self.t)
        if not (math.isfinite(g) and math.isfinite(t)):
            raise DomainError("gamma and t must be finite")
        if not g > 0:
            raise DomainError(f"gamma must be positive, got {g}")
        if not abs(t) < g:
            raise DomainError(f"need |t| < gamma for the antiferroelectric phase, got t={t}, gamma={g}")

    @property
    def zeta(self) -> float:
        return self.t / self.gamma

    @property
    def omega(self) -> float:
        return 0.5 * math.pi * (1.0 + self.zeta)

    @property
    def nome(self) -> Nome:
        return Nome.from_gamma(self.gamma)

    @property
    def q(self) -> float:
        return self.nome.q

    @property
    def a(self) -> float:
        return math.sinh(self.gamma - self.t)

    @property
    def b(self) -> float:
        return math.sinh(self.gamma + self.t)

    @property
    def c(self) -> float:
        return math.sinh(2.0 * self.gamma)

    @property
    def Delta(self) -> float:
        return -math.cosh(2.0 * self.gamma)

    def as_dict(self) -> dict:
        return {"gamma": self.gamma, "t": self.t, "zeta": self.zeta, "omega": self.omega,
                "q": self.q, "a": self.a, "b": self.b, "c": self.c, "Delta": self.Delta}


@dataclass(frozen=True)
class Endpoints:
    alpha: float
    alpha_p: float
    beta_p: float
    beta: float

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "alpha_p": self.alpha_p,
                "beta_p": self.beta_p, "beta": self.beta}


def endpoints(params: ModelParams) -> Endpoints:
    h = 0.5 * params.omega
    nome = params.nome

    def end(j: int) -> float:
        return -math.pi * theta_deriv(j, h, nome, 1) / theta(j, h, nome)

    return Endpoints(alpha=end(1), alpha_p=end(4), beta_p=end(3), beta=end(2))


def endpoint_gap_formulas(params: ModelParams) -> dict[str, float]:
    """Theta-product forms of the six endpoint gaps."""
    h = 0.5 * params.omega
    nome = params.nome
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


def endpoint_gap_residuals(params: ModelParams) -> dict[str, float]:
    e = endpoints(params)
    direct = {
        "alpha_p-alpha": e.alpha_p - e.alpha,
        "beta_p-alpha_p": e.beta_p - e.alpha_p,
        "beta-beta_p": e.beta - e.beta_p,
        "beta-alpha": e.beta - e.alpha,
        "beta-alpha_p": e.beta - e.alpha_p,
        "beta_p-alpha": e.beta_p - e.alpha,
    }
    closed = endpoint_gap_formulas(params)
    return {k: abs(direct[k] - closed[k]) for k in direct}


def centroid_formula(params: ModelParams) -> float:
    """-(pi/2) theta2'(pi zeta/2)/theta2(pi zeta/2)."""
    x = 0.5 * math.pi * params.zeta
    return -0.5 * math.pi * theta_deriv(2, x, params.nome, 1) / theta(2, x, params.nome)


def lagrange_multiplier(params: ModelParams) -> float:
    nome = params.nome
    c = theta_constants(nome)
    return -2.0 + 2.0 * math.log(math.pi * c[1] / (2.0 * theta(1, params.omega, nome)))


# --------------------------------------------------------------------------
# the measure
# --------------------------------------------------------------------------

def _gl_vector(f, a, b, tol: float, nmax: int):
    """Gauss-Legendre over many intervals [a_i, b_i] at once, doubling nodes."""
    a = np.asarray(a, dtype=float)[:, None]
    b = np.asarray(b, dtype=float)[:, None]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    n, prev = 16, None
    while True:
        x, w = np.polynomial.legendre.leggauss(n)
        vals = (half * f(mid + half * x[None, :])) @ w
        if prev is not None and np.max(np.abs(vals - prev)) <= tol:
            return vals
        if n >= nmax:
            raise QuadratureError("vectorised Gauss-Legendre did not converge")
        prev, n = vals, 2 * n


def _H(u):
    """Antiderivative of log|s| vanishing at 0: u log|u| - u."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(u == 0.0, 0.0, u * np.log(np.abs(u)) - u)
    return out


def _H_diff(u, d):
    """H(u) - H(u - d), with the gap d supplied directly.

    Passing d instead of the second point keeps full relative accuracy when
    |u| is huge and d is O(1).
    """
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    v = u - d
    same = (u * v) > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = d * (np.log(np.abs(u)) - 1.0) + v * np.log1p(d / np.where(same, v, 1.0))
    return np.where(same, stable, _H(u) - _H(v))


@dataclass(frozen=True)
class EquilibriumMeasure:
    """Equilibrium measure with its quadrature policy.

    ``tol`` drives single integrals; ``tol_nested`` the double/variational
    ones.
    """

    params: ModelParams
    tol: float = 1e-10
    tol_nested: float = 1e-8
    nmax: int = 8192
    ends: Endpoints = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ends", endpoints(self.params))

    @property
    def saturation(self) -> float:
        return 1.0 / (2.0 * self.params.gamma)

    # maps of the angle variable onto the two bands
    def left_x(self, phi):
        e = self.ends
        return e.alpha + (e.alpha_p - e.alpha) * np.sin(phi) ** 2

    def right_x(self, phi):
        e = self.ends
        return e.beta_p + (e.beta - e.beta_p) * np.sin(phi) ** 2

    def left_gap(self, phi):
        """alpha' - x(phi) on the left band, without cancellation."""
        e = self.ends
        return (e.alpha_p - e.alpha) * np.cos(phi) ** 2

    def right_gap(self, phi):
        """x(phi) - beta' on the right band."""
        e = self.ends
        return (e.beta - e.beta_p) * np.sin(phi) ** 2

    def _left_kernel(self, phi):
        # dx'/sqrt|R(x')| = 2 dphi / sqrt((beta'-x')(beta-x')) on the left band
        e = self.ends
        gap = self.left_gap(phi)
        return 2.0 / np.sqrt((e.beta_p - e.alpha_p + gap) * (e.beta - e.alpha_p + gap))

    def _right_kernel(self, phi):
        e = self.ends
        gap = self.right_gap(phi)
        return 2.0 / np.sqrt((e.beta_p - e.alpha + gap) * (e.beta_p - e.alpha_p + gap))

    def _grading(self, side: str) -> list[float]:
        """Panel breakpoints on [0, pi/2] graded toward the near-singular end.

        When the saturated band is narrow, the left-band kernel has a
        square-root branch point at distance ~delta (in angle) beyond pi/2,
        and the right-band kernel one beyond 0.  Geometric panels down to
        that scale keep Gauss-Legendre converging fast.
        """
        e = self.ends
        width = e.beta_p - e.alpha_p
        span = (e.alpha_p - e.alpha) if side == "left" else (e.beta - e.beta_p)
        delta = math.sqrt(width / span)
        cuts = []
        d = HALF_PI / 2
        while d > 0.25 * delta and d > 1e-14:
            cuts.append(d)
            d *= 0.5
        if side == "left":
            return sorted([0.0, HALF_PI] + [HALF_PI - c for c in cuts])
        return sorted([0.0, HALF_PI] + cuts)

    def _integrate(self, f: Callable, a: float, b: float, tol: float | None = None,
                   side: str | None = None) -> float:
        if a == b:
            return 0.0
        tol = self.tol if tol is None else tol
        if side is None:
            return gauss_legendre(f, a, b, tol, nmax=self.nmax)
        lo, hi = min(a, b), max(a, b)
        edges = [lo] + [c for c in self._grading(side) if lo < c < hi] + [hi]
        total = sum(gauss_legendre(f, x0, x1, tol, nmax=self.nmax) for x0, x1 in zip(edges[:-1], edges[1:]))
        return total if b >= a else -total

    def band_density(self, phis, side: str):
        """rho at x(phi) for an array of band angles, in one vectorised pass."""
        phis = np.asarray(phis, dtype=float)
        kern = self._left_kernel if side == "left" else self._right_kernel
        edges = np.array(self._grading(side))
        cum = [0.0]
        for x0, x1 in zip(edges[:-1], edges[1:]):
            cum.append(cum[-1] + gauss_legendre(kern, x0, x1, self.tol * 1e-2, nmax=self.nmax))
        cum = np.array(cum)
        idx = np.clip(np.searchsorted(edges, phis, side="right") - 1, 0, len(edges) - 2)
        below = cum[idx] + _gl_vector(kern, edges[idx], phis, self.tol * 1e-2, self.nmax)
        if side == "left":
            return below / math.pi
        return (cum[-1] - below) / math.pi

    def left_angle(self, x: float) -> float:
        e = self.ends
        s = (x - e.alpha) / (e.alpha_p - e.alpha)
        return math.asin(math.sqrt(min(max(s, 0.0), 1.0)))

    def right_angle(self, x: float) -> float:
        e = self.ends
        s = (x - e.beta_p) / (e.beta - e.beta_p)
        return math.asin(math.sqrt(min(max(s, 0.0), 1.0)))


def density(x: float, eq: EquilibriumMeasure) -> float:
    """rho(x); zero off [alpha, beta], 1/(2 gamma) on the saturated band."""
    e = eq.ends
    if x < e.alpha or x > e.beta:
        return 0.0
    if e.alpha_p <= x <= e.beta_p:
        return eq.saturation
    if x < e.alpha_p:
        return eq._integrate(eq._left_kernel, 0.0, eq.left_angle(x), side="left") / math.pi
    return eq._integrate(eq._right_kernel, eq.right_angle(x), HALF_PI, side="right") / math.pi


def density_samples(eq: EquilibriumMeasure, count: int) -> list[tuple[float, float]]:
    """(x, rho(x)) on a uniform grid of ``count`` points spanning [alpha, beta]."""
    e = eq.ends
    if count < 2:
        raise DomainError("need at least two sample points")
    xs = np.linspace(e.alpha, e.beta, count)
    return [(float(x), density(float(x), eq)) for x in xs]


def mass_left_of(x: float, eq: EquilibriumMeasure) -> float:
    """int_alpha^x rho for x in [alpha, alpha'] (order of integration swapped)."""
    phx = eq.left_angle(x)
    return eq._integrate(lambda p: (x - eq.left_x(p)) * eq._left_kernel(p), 0.0, phx, side="left") / math.pi


def mass_right_of(x: float, eq: EquilibriumMeasure) -> float:
    """int_x^beta rho for x in [beta', beta]."""
    phx = eq.right_angle(x)
    return eq._integrate(lambda p: (eq.right_x(p) - x) * eq._right_kernel(p), phx, HALF_PI, side="right") / math.pi


def band_mass(eq: EquilibriumMeasure, side: str) -> float:
    """Mass of one unsaturated band, by quadrature of density() itself.

    x = x(phi) on the band, dx = span sin(2 phi) dphi; the density is a smooth
    function of phi so the outer rule is again Gauss-Legendre on graded panels.
    """
    e = eq.ends
    if side == "left":
        xmap, span = eq.left_x, e.alpha_p - e.alpha
    else:
        xmap, span = eq.right_x, e.beta - e.beta_p

    def f(phis):
        return eq.band_density(phis, side) * span * np.sin(2.0 * phis)

    return eq._integrate(f, 0.0, HALF_PI, eq.tol_nested * 1e-2, side=side)


def total_mass(eq: EquilibriumMeasure) -> float:
    e = eq.ends
    return band_mass(eq, "left") + (e.beta_p - e.alpha_p) * eq.saturation + band_mass(eq, "right")


def mass_right_of_zero(eq: EquilibriumMeasure) -> float:
    """int_0^beta rho; the origin sits inside the saturated band."""
    return eq.ends.beta_p * eq.saturation + band_mass(eq, "right")


def resolvent(z: float, eq: EquilibriumMeasure) -> float:
    """omega(z) = int_z^inf dz'/sqrt(R(z')) on the sheet positive beyond beta.

    Off the cut only: z >= beta, or z <= alpha (where the path runs to -inf
    and the value is negative).  With d = sqrt(|z - end|) for the nearer
    endpoint, z' = end +- (d + s/(1-s))^2 compactifies the half-line and
    cancels the square-root factor of that endpoint exactly, so z close to
    the cut costs no more than z far from it.
    """
    e = eq.ends
    if e.alpha < z < e.beta:
        raise DomainError(f"resolvent is only evaluated off [alpha, beta], got z={z}")
    sgn = 1.0 if z >= e.beta else -1.0
    near = e.beta if sgn > 0 else e.alpha
    others = [p for p in (e.alpha, e.alpha_p, e.beta_p, e.beta) if p != near]
    gaps = [sgn * (z - p) for p in others]
    d = math.sqrt(sgn * (z - near))

    def f(s):
        v = d + s / (1.0 - s)
        w = v * v - d * d
        prod = (gaps[0] + w) * (gaps[1] + w) * (gaps[2] + w)
        return 2.0 / (1.0 - s) ** 2 / np.sqrt(prod)

    return sgn * eq._integrate(f, 0.0, 1.0)


def stieltjes_transform(z: float, eq: EquilibriumMeasure) -> float:
    """int rho(x)/(z-x) dx by swapped-order quadrature (oracle for the resolvent)."""
    e = eq.ends
    sat = eq.saturation * math.log(abs((z - e.alpha_p) / (z - e.beta_p)))

    def left_f(p):
        return np.log1p(eq.left_gap(p) / (z - e.alpha_p)) * eq._left_kernel(p)

    def right_f(p):
        return -np.log1p(-eq.right_gap(p) / (z - e.beta_p)) * eq._right_kernel(p)

    left = eq._integrate(left_f, 0.0, HALF_PI, side="left")
    right = eq._integrate(right_f, 0.0, HALF_PI, side="right")
    return (left + right) / math.pi + sat


def log_potential(x: float, eq: EquilibriumMeasure) -> float:
    """U(x) = int log|x - y| rho(y) dy for real x.

    The logarithm is integrated in closed form (H(u) = u log|u| - u) after
    swapping the order of integration; the remaining one-dimensional integral
    is split at the angle of x when x lies inside a band.
    """
    e = eq.ends
    sat = eq.saturation * float(_H_diff(e.beta_p - x, e.beta_p - e.alpha_p))

    def left_f(p):
        return _H_diff(e.alpha_p - x, eq.left_gap(p)) * eq._left_kernel(p)

    def right_f(p):
        return _H_diff(eq.right_x(p) - x, eq.right_gap(p)) * eq._right_kernel(p)

    tol = eq.tol_nested * 1e-2
    split_l = eq.left_angle(x) if e.alpha < x < e.alpha_p else None
    split_r = eq.right_angle(x) if e.beta_p < x < e.beta else None
    left = _split_integral(eq, left_f, split_l, tol, "left")
    right = _split_integral(eq, right_f, split_r, tol, "right")
    return (left + right) / math.pi + sat


def _split_integral(eq, f, split, tol, side):
    if split is None:
        return eq._integrate(f, 0.0, HALF_PI, tol, side=side)
    return eq._integrate(f, 0.0, split, tol, side=side) + eq._integrate(f, split, HALF_PI, tol, side=side)


def g_function(z: float, eq: EquilibriumMeasure) -> float:
    """g(z) = int log(z - x) rho(x) dx for real z >= beta."""
    if z < eq.ends.beta:
        raise DomainError(f"g_function is only evaluated for z >= beta, got z={z}")
    return log_potential(z, eq)


def g_jump(x: float, eq: EquilibriumMeasure) -> float:
    """Im G(x) / (2 pi) for x in [alpha, beta], G = g_+ - g_-."""
    e = eq.ends
    if x < e.alpha or x > e.beta:
        raise DomainError(f"g_jump needs x in [alpha, beta], got {x}")
    if x <= e.alpha_p:
        return 1.0 - mass_left_of(x, eq)
    if x <= e.beta_p:
        return 0.5 * (1.0 + eq.params.zeta) - x * eq.saturation
    return mass_right_of(x, eq)


def potential(x: float, params: ModelParams) -> float:
    return abs(x) - params.zeta * x


def variational_residual(x: float, eq: EquilibriumMeasure) -> float:
    """2 U(x) - V(x) - l; zero on the unsaturated bands, >= 0 on the saturated one."""
    return 2.0 * log_potential(x, eq) - potential(x, eq.params) - lagrange_multiplier(eq.params)


def interior_cutoff(eq: EquilibriumMeasure, band: str) -> float:
    """Distance from band ends inside which variational residuals are not reported."""
    e = eq.ends
    length = (e.alpha_p - e.alpha) if band == "left" else (e.beta - e.beta_p)
    return 10.0 * math.sqrt(eq.tol) * length


def support_points(eq: EquilibriumMeasure, count: int) -> list[float]:
    """``count`` points spread over both unsaturated bands, respecting the cutoff."""
    e = eq.ends
    nl = count // 2
    nr = count - nl
    dl, dr = interior_cutoff(eq, "left"), interior_cutoff(eq, "right")
    pts = list(np.linspace(e.alpha + dl, e.alpha_p - dl, nl)) + list(np.linspace(e.beta_p + dr, e.beta - dr, nr))
    return [float(p) for p in pts]


def energy(eq: EquilibriumMeasure) -> float:
    """Energy of the equilibrium measure, -int int log|x-y| + int V, by nested quadrature.

    Diagnostic only: no closed form is available to check it against.
    """
    e = eq.ends
    xg, wg = np.polynomial.legendre.leggauss(64)
    total = 0.0
    # saturated band
    xs = 0.5 * (e.alpha_p + e.beta_p) + 0.5 * (e.beta_p - e.alpha_p) * xg
    ws = 0.5 * (e.beta_p - e.alpha_p) * wg * eq.saturation
    for x, w in zip(xs, ws):
        total += w * (potential(float(x), eq.params) - log_potential(float(x), eq))
    # unsaturated bands in angle variables
    phis = 0.25 * math.pi * (xg + 1.0)
    wph = 0.25 * math.pi * wg
    for xmap, jac in ((eq.left_x, e.alpha_p - e.alpha), (eq.right_x, e.beta - e.beta_p)):
        for p, w in zip(phis, wph):
            x = float(xmap(p))
            rho = density(x, eq)
            total += w * jac * math.sin(2.0 * p) * rho * (potential(x, eq.params) - log_potential(x, eq))
    return total


def elliptic_consistency(params: ModelParams) -> dict[str, float]:
    """Residuals tying the endpoints to the elliptic parametrisation.

    k comes from the endpoint cross-ratio, K and K' from direct quadrature,
    u_inf from the elliptic change of variables integrated from beta to
    infinity.
    """
    e = endpoints(params)
    k = math.sqrt((e.beta - e.alpha) * (e.beta_p - e.alpha_p) / ((e.beta_p - e.alpha) * (e.beta - e.alpha_p)))
    K = K_quadrature(k)
    Kp = Kprime_quadrature(k)
    eq = EquilibriumMeasure(params, tol=1e-13)
    scale = math.sqrt((e.beta_p - e.alpha) * (e.beta - e.alpha_p))
    u_inf = 0.5 * scale * resolvent(e.beta, eq)
    ctx = context_from_gamma(params.gamma)
    return {
        "k_endpoints": k,
        "k_theta": ctx.k,
        "K": K,
        "Kprime": Kp,
        "u_inf": u_inf,
        "res_Kratio": abs(Kp / K - math.pi / (2.0 * params.gamma)),
        "res_2K": abs(scale - 2.0 * K),
        "res_uinf": abs(u_inf / K - 0.5 * (1.0 - params.zeta)),
        "res_sn2": abs((e.beta_p - e.alpha) / (e.beta - e.alpha) - sn(u_inf, ctx) ** 2),
        "res_k": abs(k - ctx.k),
    }

"""Hyperbolic integration contour and its optimal parameters.

The contour is the left branch

    z(phi) = mu * (1 + sin(i*phi - theta)),   phi real,

sampled at the midpoints phi_k = (k + 1/2) * tau, k = 0..N-1 (upper half only,
the lower half follows by conjugation). ``make_plan`` balances discretization
and truncation error over the window [t0, lam*t0].
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonPositiveStrip

DEFAULT_THETA = 0.6767
DEFAULT_T0 = 0.1
DEFAULT_LAMBDA = 10.0

# c_work guard: keeps sin(theta - c_work) away from zero when c_tilde == theta
C_WORK_FRACTION = 0.9

ETA_GRID = (0.001, 0.999, 4096)
ETA_XTOL = 1e-8


class SectorHypothesisWarning(UserWarning):
    """alpha + beta lies outside (epsilon, 2 - epsilon)."""


def default_epsilon(alpha, beta, theta=DEFAULT_THETA):
    """Sector slack used when the caller does not choose one.

    ``0.75 * min(1, s, 2 - s)`` with ``s = alpha + beta``. When that leaves no
    room for the contour angle ``theta`` (which happens for s > ~1.27 at the
    default angle) epsilon is raised to ``min(0.99, 0.75 * s)``, i.e. the
    ratio epsilon/s used for s <= 1, capped inside (0, 1).
    """
    s = alpha + beta
    eps = 0.75 * min(1.0, s, 2.0 - s)
    if eps * math.pi / (2.0 * s) - theta <= 0.0:
        eps = min(0.99, 0.75 * s)
    return eps


@dataclass(frozen=True)
class FractionalOrders:
    """Memory-kernel order ``alpha``, Caputo order ``beta`` and sector slack ``epsilon``."""

    alpha: float
    beta: float
    epsilon: float | None = None

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", default_epsilon(self.alpha, self.beta))
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        s = self.alpha + self.beta
        if not self.epsilon < s < 2.0 - self.epsilon:
            warnings.warn(
                f"alpha+beta={s:g} outside (epsilon, 2-epsilon) for epsilon={self.epsilon:g}; "
                "sector bounds on m(z) are not guaranteed",
                SectorHypothesisWarning,
                stacklevel=3,
            )

    @property
    def order_sum(self):
        return self.alpha + self.beta

    @property
    def sector_angle(self):
        """Half-angle of the sector on which the resolvent bounds hold."""
        s = self.order_sum
        return (s + self.epsilon) * math.pi / (2.0 * s)

    @property
    def symbol_angle(self):
        """Half-angle of the sector that contains m(z) for z in the resolvent sector."""
        s = self.order_sum
        base = (s + self.epsilon) * math.pi / 2.0
        return max(self.beta / s * base, base)


@dataclass(frozen=True)
class ContourPlan:
    theta: float
    c_tilde: float
    c_work: float
    mu: float
    tau: float
    n_nodes: int
    eta_star: float
    t0: float
    lam: float
    orders: FractionalOrders | None = None
    q_star: float = field(default=float("nan"), compare=False)

    @property
    def t1(self):
        return self.lam * self.t0

    def contains(self, t, rtol=1e-12):
        return self.t0 * (1 - rtol) <= t <= self.t1 * (1 + rtol)


@dataclass(frozen=True)
class QuadratureNodes:
    phi: np.ndarray
    z: np.ndarray
    dz: np.ndarray

    def __len__(self):
        return len(self.phi)


def strip_half_width(orders: FractionalOrders, theta: float) -> float:
    """Half-width c~ = min(theta, eps*pi/(2(alpha+beta)) - theta) of the analyticity strip."""
    if not 0.0 < theta < math.pi / 2:
        raise DomainError(f"theta must lie in (0, pi/2), got {theta}")
    c = min(theta, orders.epsilon * math.pi / (2.0 * orders.order_sum) - theta)
    if c <= 0.0:
        raise NonPositiveStrip(
            f"strip half-width {c:.6g} <= 0 for theta={theta}, epsilon={orders.epsilon}, "
            f"alpha+beta={orders.order_sum}; reduce theta or raise epsilon"
        )
    return c


def p_of_eta(eta, lam, theta, c_work):
    """P(eta) = arcosh(lam / ((1 - eta) sin(theta - c_work))); accepts arrays for eta."""
    if not 0.0 < c_work < theta:
        raise DomainError(f"need 0 < c_work < theta, got c_work={c_work}, theta={theta}")
    eta = np.asarray(eta, dtype=float)
    if np.any((eta <= 0.0) | (eta >= 1.0)):
        raise DomainError("eta must lie in (0, 1)")
    arg = lam / ((1.0 - eta) * math.sin(theta - c_work))
    if np.any(arg < 1.0):
        raise DomainError(f"arcosh argument below 1: {np.min(arg)}")
    p = np.arccosh(arg)
    return float(p) if p.ndim == 0 else p


def _q(eta, lam, theta, c_work):
    return 2.0 * math.pi * c_work * eta / p_of_eta(eta, lam, theta, c_work)


def _golden_max(f, a, b, xtol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def optimize_eta(lam, theta, c_work):
    """Maximize Q(eta) = 2*pi*c_work*eta / P(eta) over (0, 1).

    Grid scan followed by golden-section refinement inside the bracketing
    grid cells. Returns ``(eta_star, Q(eta_star))``; the result is never worse
    than the best grid point.
    """
    grid = np.linspace(*ETA_GRID)
    q = _q(grid, lam, theta, c_work)
    i = int(np.argmax(q))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    eta, qe = _golden_max(lambda e: float(_q(e, lam, theta, c_work)), lo, hi, ETA_XTOL)
    if qe < q[i]:
        return float(grid[i]), float(q[i])
    return eta, qe


def make_plan(orders, theta=DEFAULT_THETA, t0=DEFAULT_T0, lam=DEFAULT_LAMBDA, n_nodes=60):
    if n_nodes < 1:
        raise DomainError(f"n_nodes must be positive, got {n_nodes}")
    if t0 <= 0.0:
        raise DomainError(f"t0 must be positive, got {t0}")
    if lam < 1.0:
        raise DomainError(f"lambda must be >= 1, got {lam}")
    c_tilde = strip_half_width(orders, theta)
    c_work = min(c_tilde, C_WORK_FRACTION * theta)
    eta, q = optimize_eta(lam, theta, c_work)
    p = p_of_eta(eta, lam, theta, c_work)
    tau = p / n_nodes
    mu = 2.0 * math.pi * c_work * n_nodes * (1.0 - eta) / (lam * t0 * p)
    return ContourPlan(
        theta=theta, c_tilde=c_tilde, c_work=c_work, mu=float(mu), tau=float(tau),
        n_nodes=int(n_nodes), eta_star=float(eta), t0=t0, lam=lam, orders=orders, q_star=float(q),
    )


def contour_point(mu, theta, phi):
    """Return ``(z(phi), z'(phi))`` for real ``phi`` (scalar or array)."""
    phi = np.asarray(phi, dtype=float)
    ch, sh = np.cosh(phi), np.sinh(phi)
    st, ct = math.sin(theta), math.cos(theta)
    z = mu * (1.0 - st * ch) + 1j * (mu * ct * sh)
    dz = -mu * st * sh + 1j * (mu * ct * ch)
    return z, dz


def nodes(plan: ContourPlan) -> QuadratureNodes:
    phi = (np.arange(plan.n_nodes) + 0.5) * plan.tau
    z, dz = contour_point(plan.mu, plan.theta, phi)
    for a in (phi, z, dz):
        a.setflags(write=False)
    return QuadratureNodes(phi=phi, z=z, dz=dz)

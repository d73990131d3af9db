"""Fully discrete contour-integral scheme.

    u_h^N(t) = (tau/pi) * Im sum_{k=0}^{N-1} exp(z_k t) u_hat_h(z_k) z'_k

Each u_hat_h(z_k) is an independent shifted elliptic solve, so the node
solves run concurrently; time evaluation is a cheap reduction that can be
repeated for any t in the plan's window without further solves.
"""
from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import fem
from .contour import ContourPlan, QuadratureNodes, contour_point, nodes
from .errors import CimError, OutOfWindow, SolveFailure
from .symbol import TransformedSource, scalar_resolvent


class SolveCounter:
    """Thread-safe tally of resolvent solves (reported by ``--verbose``)."""

    def __init__(self):
        self._lock = threading.Lock()
        self.count = 0

    def add(self, n=1):
        with self._lock:
            self.count += n

    def reset(self):
        with self._lock:
            self.count = 0


solve_counter = SolveCounter()


@dataclass(frozen=True)
class NodeSolutionSet:
    plan: ContourPlan
    nodes: QuadratureNodes
    solutions: np.ndarray  # (N,) in scalar mode, (N, n_interior) otherwise


@dataclass(frozen=True)
class TimeSample:
    t: float
    u: np.ndarray | float


def _source_fn(sys, src):
    """Turn ``src`` into a callable z -> projected f_hat (or None)."""
    if src is None:
        return None
    if isinstance(src, TransformedSource):
        if len(src) == 0:
            return None
        if sys is None:
            return src.evaluate
        cache = {}
        profiles = []
        for p in src.profiles:
            key = id(p)
            if key not in cache:
                cache[key] = fem.l2_project(sys.mesh, sys, p)
            profiles.append(cache[key])
        return lambda z: src.evaluate(z, profiles)
    if callable(src):
        return src
    raise TypeError(f"unsupported source type {type(src).__name__}")


def _resolve_threads(threads):
    if threads and threads > 0:
        return threads
    return os.cpu_count() or 1


def solve_at(z, sys, orders, u0h, src, threads=0):
    """u_hat_h at every point of ``z``; ``sys=None`` selects the scalar problem A = 1."""
    z = np.asarray(z, dtype=complex)
    fsrc = _source_fn(sys, src)
    scalar = sys is None
    out = np.zeros(len(z) if scalar else (len(z), sys.size), dtype=complex)
    if not np.any(u0h) and fsrc is None:
        return out
    u0h = u0h if scalar else np.asarray(u0h, dtype=float)

    def work(k):
        zk = z[k]
        try:
            f = fsrc(zk) if fsrc is not None else 0.0
            if scalar:
                out[k] = scalar_resolvent(zk, orders, u0h, f)
            else:
                out[k] = fem.shifted_solve(sys, zk, orders, u0h, f)
        except CimError as exc:
            raise SolveFailure(str(exc), k=k, z=zk) from exc
        solve_counter.add()

    nthreads = min(_resolve_threads(threads), len(z))
    if nthreads <= 1:
        for k in range(len(z)):
            work(k)
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(work, range(len(z))))
    return out


def solve_nodes(plan: ContourPlan, sys, u0h, src, threads=0) -> NodeSolutionSet:
    qn = nodes(plan)
    sols = solve_at(qn.z, sys, plan.orders, u0h, src, threads)
    return NodeSolutionSet(plan, qn, sols)


def evaluate(ns: NodeSolutionSet, t: float) -> TimeSample:
    plan = ns.plan
    if not plan.contains(t):
        raise OutOfWindow(f"t={t} outside window [{plan.t0}, {plan.t1}]")
    z, dz, sol = ns.nodes.z, ns.nodes.dz, ns.solutions
    acc = np.zeros(sol.shape[1:], dtype=complex)
    # smallest terms first
    for k in range(len(z) - 1, -1, -1):
        acc += (np.exp(z[k] * t) * dz[k]) * sol[k]
    u = plan.tau / math.pi * acc.imag
    return TimeSample(t, float(u) if u.ndim == 0 else u)


def barycentric_weights(x):
    x = np.asarray(x, dtype=float)
    d = x[:, None] - x[None, :]
    np.fill_diagonal(d, 1.0)
    return 1.0 / np.prod(d, axis=1)


def barycentric_matrix(x_src, x_dst, rtol=4 * np.finfo(float).eps):
    """Matrix B with B @ f(x_src) = interpolant of f at x_dst (second barycentric form)."""
    x_src = np.asarray(x_src, dtype=float)
    x_dst = np.asarray(x_dst, dtype=float)
    w = barycentric_weights(x_src)
    diff = x_dst[:, None] - x_src[None, :]
    scale = max(np.max(np.abs(x_src)), 1.0)
    hit = np.abs(diff) <= rtol * scale
    diff[hit] = 1.0
    b = w[None, :] / diff
    b /= b.sum(axis=1, keepdims=True)
    rows = np.flatnonzero(hit.any(axis=1))
    for r in rows:
        b[r] = 0.0
        b[r, np.flatnonzero(hit[r])[0]] = 1.0
    return b


def chebyshev_lobatto(a, b, n):
    """n+1 Chebyshev-Gauss-Lobatto points mapped onto [a, b] (descending, endpoints exact)."""
    x = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * np.arange(n + 1) / n)
    x[0], x[-1] = b, a
    return x


def accelerate(plan: ContourPlan, sys, u0h, src, n_cheb, threads=0, phi_interp=None) -> NodeSolutionSet:
    """Node solutions from n_cheb+1 solves plus barycentric interpolation in phi.

    The interpolation points default to Chebyshev-Gauss-Lobatto points on
    [phi_0, phi_{N-1}]; ``phi_interp`` overrides them.
    """
    qn = nodes(plan)
    if phi_interp is None:
        if not 4 <= n_cheb + 1 <= plan.n_nodes:
            raise ValueError(f"need 4 <= n_cheb + 1 <= N, got n_cheb={n_cheb}, N={plan.n_nodes}")
        phi_interp = chebyshev_lobatto(qn.phi[0], qn.phi[-1], n_cheb)
    zx, _ = contour_point(plan.mu, plan.theta, phi_interp)
    ux = solve_at(zx, sys, plan.orders, u0h, src, threads)
    sols = barycentric_matrix(phi_interp, qn.phi) @ ux
    return NodeSolutionSet(plan, qn, sols)

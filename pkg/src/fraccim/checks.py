"""Self-contained property checks run by ``fraccim check``.

None of these touch the reference cache; each returns a :class:`CheckResult`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cim, fem
from .contour import FractionalOrders, contour_point, make_plan, nodes
from .symbol import kernel, sector_check


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _sample_z(n=64, seed=0):
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(-4, 6, n))
    a = rng.uniform(-2.5, 2.5, n)
    return r * np.exp(1j * a)


def kernel_identity():
    """m(z) (1 + z**-alpha) = z**beta."""
    worst = 0.0
    for a, b in [(0.2, 0.77), (0.5, 0.5), (0.75, 0.8)]:
        o = FractionalOrders(a, b)
        z = _sample_z()
        kv = kernel(z, o)
        zb = np.power(z, b)
        worst = max(worst, float(np.max(np.abs(kv.m * kv.shift - zb) / np.abs(zb))))
    return CheckResult("kernel identity", worst < 1e-12, f"max rel dev {worst:.2e}")


def symbol_conjugate_symmetry():
    o = FractionalOrders(0.4, 0.25)
    z = _sample_z(seed=1)
    dev = np.max(np.abs(kernel(z.conj(), o).m - kernel(z, o).m.conj()) / np.abs(kernel(z, o).m))
    return CheckResult("symbol conjugate symmetry", bool(dev < 1e-13), f"max rel dev {dev:.2e}")


def hyperbola_identity():
    """((mu - Re z)/(mu sin theta))**2 - (Im z/(mu cos theta))**2 = 1 along the contour."""
    mu, th = 3.7, 0.6767
    phi = np.linspace(-5, 5, 101)
    z, _ = contour_point(mu, th, phi)
    lhs = ((mu - z.real) / (mu * math.sin(th))) ** 2 - (z.imag / (mu * math.cos(th))) ** 2
    dev = float(np.max(np.abs(lhs - 1.0) / np.cosh(phi) ** 2))
    return CheckResult("hyperbola identity", dev < 1e-13, f"max scaled dev {dev:.2e}")


def sector_containment():
    ok = True
    for a, b in [(0.2, 0.77), (0.4, 0.25), (0.5, 0.5), (0.25, 0.4)]:
        o = FractionalOrders(a, b)
        plan = make_plan(o, n_nodes=80)
        for z in nodes(plan).z:
            ok &= sector_check(z, o, debug=True)
            ok &= abs(np.angle(kernel(z, o).m)) < o.symbol_angle
    return CheckResult("sector containment", bool(ok), "all contour nodes and m(z) inside their sectors")


def fem_hand_assembly():
    """h = 1/2 systems have a single interior node with known entries."""
    s1 = fem.assemble(fem.build_mesh(1, 0.5))
    s2 = fem.assemble(fem.build_mesh(2, 0.5))
    got = [float(a[0, 0]) for a in (s1.mass, s1.stiffness, s2.mass, s2.stiffness)]
    want = [1.0 / 3.0, 4.0, 1.0 / 8.0, 4.0]
    dev = max(abs(g - w) for g, w in zip(got, want))
    return CheckResult("FE hand assembly (h = 1/2)", bool(dev < 1e-14), f"entries {got}")


def fem_conjugate_symmetry():
    o = FractionalOrders(0.5, 0.5)
    sys = fem.assemble(fem.build_mesh(2, 0.125))
    mesh = sys.mesh
    u0 = fem.l2_project(mesh, sys, fem.BoxIndicator((0.5, 0.0), (1.0, 1.0)))
    f = fem.load_vector(mesh, 1.0)
    z = 2.0 + 5.0j
    a = fem.shifted_solve(sys, z, o, u0, f / z)
    b = fem.shifted_solve(sys, z.conjugate(), o, u0, f / z.conjugate())
    dev = float(np.max(np.abs(b - a.conj())) / np.max(np.abs(a)))
    return CheckResult("FE conjugate symmetry", bool(dev < 1e-13), f"max rel dev {dev:.2e}")


def cim_conjugate_symmetry():
    """The mirrored 2N-term midpoint sum is real, and equals the half sum."""
    o = FractionalOrders(0.2, 0.77)
    plan = make_plan(o, n_nodes=5)
    qn = nodes(plan)
    z = np.concatenate([qn.z.conj(), qn.z])
    dz = np.concatenate([-qn.dz.conj(), qn.dz])
    uh = cim.solve_at(z, None, o, 1.0, None)
    t = 0.5
    full = plan.tau / (2j * math.pi) * np.sum(np.exp(z * t) * uh * dz)
    half = cim.evaluate(cim.solve_nodes(plan, None, 1.0, None), t).u
    ok = abs(full.imag) < 1e-13 * abs(full) and abs(full.real - half) < 1e-13 * abs(half)
    return CheckResult("CIM conjugate symmetry", bool(ok), f"full={full:.17g} half={half:.17g}")


def projection_order():
    errs = []
    fn = lambda x: np.sin(np.pi * x) * np.exp(x)
    for h in (1 / 16, 1 / 32, 1 / 64):
        mesh = fem.build_mesh(1, h)
        sys = fem.assemble(mesh)
        ph = fem.l2_project(mesh, sys, fn)
        fine = fem.build_mesh(1, 1 / 1024)
        fsys = fem.assemble(fine)
        errs.append(fem.l2_norm(fsys, fem.prolong(mesh, ph, fine) - fem.interpolate(fine, fn)))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    ok = all(1.9 <= p <= 2.1 for p in orders)
    return CheckResult("L2 projection order 2", ok, f"orders {[round(p, 3) for p in orders]}")


ALL_CHECKS = (
    kernel_identity,
    symbol_conjugate_symmetry,
    hyperbola_identity,
    sector_containment,
    fem_hand_assembly,
    fem_conjugate_symmetry,
    cim_conjugate_symmetry,
    projection_order,
)


def run_all():
    return [check() for check in ALL_CHECKS]

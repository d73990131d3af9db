"""Piecewise-linear Galerkin discretization on uniform meshes of (0,1) and (0,1)^2.

Only interior vertices carry unknowns (homogeneous Dirichlet data eliminated).
In 2-D every grid cell is split along the diagonal from (x, y) to (x+h, y+h).
FE vectors are plain numpy arrays indexed by interior vertex.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, solve_banded
from scipy.sparse.linalg import splu

from .contour import FractionalOrders
from .errors import BadMeshSize, SolveFailure

# degree-5 Dunavant rule on the reference triangle: (barycentric, weight / area)
_TRI_RULE = (
    ((1 / 3, 1 / 3, 1 / 3), 0.225),
    ((0.059715871789770, 0.470142064105115, 0.470142064105115), 0.132394152788506),
    ((0.470142064105115, 0.059715871789770, 0.470142064105115), 0.132394152788506),
    ((0.470142064105115, 0.470142064105115, 0.059715871789770), 0.132394152788506),
    ((0.797426985353087, 0.101286507323456, 0.101286507323456), 0.125939180544827),
    ((0.101286507323456, 0.797426985353087, 0.101286507323456), 0.125939180544827),
    ((0.101286507323456, 0.101286507323456, 0.797426985353087), 0.125939180544827),
)
_GAUSS_1D = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class Mesh:
    dimension: int
    h: float
    n: int  # cells per side
    vertices: np.ndarray  # (n_vertices, dimension)
    elements: np.ndarray  # (n_elements, dimension + 1)
    interior: np.ndarray  # vertex ids of the unknowns, lexicographic (x fastest)

    @property
    def interior_nodes(self):
        return self.vertices[self.interior]

    @property
    def n_interior(self):
        return len(self.interior)


@dataclass(frozen=True)
class BoxIndicator:
    """``scale`` times the indicator of an interval (1-D) or axis-aligned box (2-D)."""

    lower: tuple
    upper: tuple
    scale: float = 1.0


def build_mesh(dimension: int, h: float) -> Mesh:
    if dimension not in (1, 2):
        raise BadMeshSize(f"dimension must be 1 or 2, got {dimension}")
    if not h > 0.0 or not np.isfinite(h):
        raise BadMeshSize(f"1/h must be an integer >= 2, got h={h!r}")
    n = int(round(1.0 / h))
    if n < 2 or abs(n * h - 1.0) > 1e-12:
        raise BadMeshSize(f"1/h must be an integer >= 2, got h={h!r}")
    h = 1.0 / n
    if dimension == 1:
        vertices = (np.arange(n + 1) * h)[:, None]
        elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
        interior = np.arange(1, n)
    else:
        i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1))
        vertices = np.column_stack([i.ravel() * h, j.ravel() * h])
        ci, cj = np.meshgrid(np.arange(n), np.arange(n))
        v00 = (ci + (n + 1) * cj).ravel()
        v10, v01, v11 = v00 + 1, v00 + n + 1, v00 + n + 2
        elements = np.concatenate([
            np.column_stack([v00, v10, v11]),
            np.column_stack([v00, v11, v01]),
        ])
        ii, jj = np.meshgrid(np.arange(1, n), np.arange(1, n))
        interior = (ii + (n + 1) * jj).ravel()
    return Mesh(dimension, h, n, vertices, elements, interior)


def _element_geometry(mesh):
    """Element measures and basis-function gradients, shape (ne, d+1, d)."""
    p = mesh.vertices[mesh.elements]
    if mesh.dimension == 1:
        length = (p[:, 1, 0] - p[:, 0, 0])
        grads = np.stack([-1.0 / length, 1.0 / length], axis=1)[:, :, None]
        return length, grads
    b = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # columns are edges
    det = b[:, 0, 0] * b[:, 1, 1] - b[:, 0, 1] * b[:, 1, 0]
    inv_t = np.empty_like(b)  # inverse transpose of b
    inv_t[:, 0, 0] = b[:, 1, 1] / det
    inv_t[:, 0, 1] = -b[:, 1, 0] / det
    inv_t[:, 1, 0] = -b[:, 0, 1] / det
    inv_t[:, 1, 1] = b[:, 0, 0] / det
    ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = np.einsum("kl,eml->ekm", ref, inv_t)
    return 0.5 * np.abs(det), grads


@dataclass(frozen=True)
class FemSystem:
    """Mass and stiffness matrices over the interior basis functions.

    ``mesh`` may be None for a bare algebraic system (e.g. the 1x1 scalar
    problem with M = K = 1).
    """

    mesh: Mesh | None
    mass: sp.csr_matrix
    stiffness: sp.csr_matrix

    @property
    def size(self):
        return self.mass.shape[0]

    @cached_property
    def _mass_lu(self):
        return splu(self.mass.tocsc())

    def solve_mass(self, b):
        return self._mass_lu.solve(np.asarray(b, dtype=float))

    @cached_property
    def _bands(self):
        if self.mesh is None or self.mesh.dimension != 1:
            return None
        m = [self.mass.diagonal(k) for k in (1, 0, -1)]
        k = [self.stiffness.diagonal(k) for k in (1, 0, -1)]
        return m, k


def assemble(mesh: Mesh) -> FemSystem:
    vol, grads = _element_geometry(mesh)
    nl = mesh.dimension + 1
    k_loc = vol[:, None, None] * np.einsum("eid,ejd->eij", grads, grads)
    m_ref = (np.ones((nl, nl)) + np.eye(nl)) / ((nl + 1) * nl)
    m_loc = vol[:, None, None] * m_ref
    rows = np.repeat(mesh.elements, nl, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, nl)).ravel()
    nv = len(mesh.vertices)
    k_full = sp.coo_matrix((k_loc.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    m_full = sp.coo_matrix((m_loc.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()
    idx = mesh.interior
    k = k_full[idx][:, idx].tocsr()
    m = m_full[idx][:, idx].tocsr()
    k.eliminate_zeros()
    m.eliminate_zeros()
    return FemSystem(mesh, m, k)


def _scatter(mesh, local):
    """Sum per-element, per-vertex contributions into an interior load vector."""
    full = np.bincount(mesh.elements.ravel(), weights=local.ravel(), minlength=len(mesh.vertices))
    return full[mesh.interior]


def _quadrature(mesh):
    """Physical quadrature points (ne, q, d), weights (ne, q), basis values (q, d+1)."""
    p = mesh.vertices[mesh.elements]
    vol, _ = _element_geometry(mesh)
    if mesh.dimension == 1:
        xg, wg = _GAUSS_1D
        lam1 = 0.5 * (xg + 1.0)
        bary = np.column_stack([1.0 - lam1, lam1])
        weights = 0.5 * wg
    else:
        bary = np.array([r[0] for r in _TRI_RULE])
        weights = np.array([r[1] for r in _TRI_RULE])
    pts = np.einsum("qk,ekd->eqd", bary, p)
    return pts, vol[:, None] * weights[None, :], bary


def _indicator_load(mesh, ind: BoxIndicator):
    if mesh.dimension == 1:
        a, b = float(ind.lower[0]), float(ind.upper[0])
        x = mesh.vertices[mesh.elements][:, :, 0]
        lo = np.clip(x[:, 0], a, b)
        hi = np.clip(x[:, 1], a, b)
        length = np.maximum(hi - lo, 0.0)
        mid = 0.5 * (lo + hi)
        h = x[:, 1] - x[:, 0]
        right = (mid - x[:, 0]) / h
        local = length[:, None] * np.column_stack([1.0 - right, right])
        return ind.scale * _scatter(mesh, local)
    return ind.scale * _box_load_2d(mesh, ind)


def _box_load_2d(mesh, ind):
    (x0, y0), (x1, y1) = ind.lower, ind.upper
    p = mesh.vertices[mesh.elements]
    vol, _ = _element_geometry(mesh)
    pmin, pmax = p.min(axis=1), p.max(axis=1)
    inside = (pmin[:, 0] >= x0) & (pmax[:, 0] <= x1) & (pmin[:, 1] >= y0) & (pmax[:, 1] <= y1)
    outside = (pmax[:, 0] <= x0) | (pmin[:, 0] >= x1) | (pmax[:, 1] <= y0) | (pmin[:, 1] >= y1)
    local = np.zeros((len(p), 3))
    local[inside] = vol[inside, None] / 3.0
    for e in np.flatnonzero(~inside & ~outside):
        local[e] = _clipped_triangle_integrals(p[e], (x0, y0, x1, y1))
    return _scatter(mesh, local)


def _clip(poly, inside, cross):
    out = []
    for i, cur in enumerate(poly):
        prev = poly[i - 1]
        if inside(cur):
            if not inside(prev):
                out.append(cross(prev, cur))
            out.append(cur)
        elif inside(prev):
            out.append(cross(prev, cur))
    return out


def _clipped_triangle_integrals(tri, box):
    """Exact integrals of the three barycentric functions over tri intersected with box."""
    x0, y0, x1, y1 = box
    poly = [np.asarray(v, dtype=float) for v in tri]

    def cut(axis, value, keep_above):
        def inside(v):
            return v[axis] >= value if keep_above else v[axis] <= value

        def cross(a, b):
            s = (value - a[axis]) / (b[axis] - a[axis])
            return a + s * (b - a)
        return inside, cross

    for axis, value, above in ((0, x0, True), (0, x1, False), (1, y0, True), (1, y1, False)):
        if not poly:
            break
        poly = _clip(poly, *cut(axis, value, above))
    res = np.zeros(3)
    if len(poly) < 3:
        return res
    t = np.asarray(tri, dtype=float)
    bmat = np.array([[t[1, 0] - t[0, 0], t[2, 0] - t[0, 0]], [t[1, 1] - t[0, 1], t[2, 1] - t[0, 1]]])
    for a, b in zip(poly[1:-1], poly[2:]):
        c = poly[0]
        area = 0.5 * abs((a[0] - c[0]) * (b[1] - c[1]) - (a[1] - c[1]) * (b[0] - c[0]))
        g = (a + b + c) / 3.0
        l12 = np.linalg.solve(bmat, g - t[0])
        res += area * np.array([1.0 - l12.sum(), l12[0], l12[1]])
    return res


def load_vector(mesh: Mesh, data) -> np.ndarray:
    """b_i = integral of data * phi_i over the domain.

    ``data`` may be a number, a :class:`BoxIndicator` (integrated exactly) or a
    vectorized callable of the coordinates (``f(x)`` or ``f(x, y)``).
    """
    if isinstance(data, BoxIndicator):
        return _indicator_load(mesh, data)
    pts, w, bary = _quadrature(mesh)
    if callable(data):
        vals = data(*np.moveaxis(pts, -1, 0))
    else:
        vals = np.full(w.shape, float(data))
    local = np.einsum("eq,eq,qk->ek", np.broadcast_to(vals, w.shape), w, bary)
    return _scatter(mesh, local)


def l2_project(mesh: Mesh, sys: FemSystem, data) -> np.ndarray:
    """L2 projection onto the FE space; FE vectors pass through unchanged."""
    if isinstance(data, np.ndarray) and data.shape == (sys.size,):
        return data
    b = load_vector(mesh, data)
    if not np.any(b):
        return np.zeros(sys.size)
    return sys.solve_mass(b)


def interpolate(mesh: Mesh, fn) -> np.ndarray:
    """Nodal interpolant of a vectorized function at the interior vertices."""
    pts = mesh.interior_nodes
    return np.asarray(fn(*pts.T), dtype=float) * np.ones(len(pts))


def factorize(sys: FemSystem, z, orders: FractionalOrders):
    """Factor z**beta M + (1 + z**-alpha) K and return a solver for right-hand sides."""
    zb = np.power(complex(z), orders.beta)
    shift = 1.0 + np.power(complex(z), -orders.alpha)
    bands = sys._bands
    if bands is not None:
        (m_up, m_d, m_lo), (k_up, k_d, k_lo) = bands
        n = sys.size
        ab = np.zeros((3, n), dtype=complex)
        ab[0, 1:] = zb * m_up + shift * k_up
        ab[1] = zb * m_d + shift * k_d
        ab[2, :-1] = zb * m_lo + shift * k_lo

        def solve(rhs):
            try:
                return solve_banded((1, 1), ab, rhs, check_finite=False)
            except (LinAlgError, ValueError) as exc:
                raise SolveFailure(f"tridiagonal solve failed: {exc}") from exc
        return solve
    a = (zb * sys.mass + shift * sys.stiffness).tocsc()
    try:
        # minimum degree on A^T + A suits the symmetric sparsity pattern
        lu = splu(a, permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise SolveFailure(f"sparse factorization failed: {exc}") from exc
    return lu.solve


def shifted_solve(sys: FemSystem, z, orders: FractionalOrders, u0h, fhat_h, solver=None):
    """Solve (z**beta M + (1 + z**-alpha) K) u = M (z**(beta-1) u0h + fhat_h)."""
    solver = solver or factorize(sys, z, orders)
    rhs = sys.mass @ (np.power(complex(z), orders.beta - 1.0) * u0h + fhat_h)
    u = solver(np.asarray(rhs, dtype=complex))
    if not np.all(np.isfinite(u)):
        raise SolveFailure("non-finite solution")
    return u


def l2_norm(sys: FemSystem, v) -> float:
    v = np.asarray(v)
    val = np.real(np.vdot(v, sys.mass @ v))
    return float(np.sqrt(max(val, 0.0)))


def prolong(coarse: Mesh, v, fine: Mesh) -> np.ndarray:
    """Nodal interpolation of a coarse P1 function onto a nested finer mesh."""
    if coarse.dimension != fine.dimension or fine.n % coarse.n:
        raise BadMeshSize(f"meshes with n={coarse.n} and n={fine.n} are not nested")
    full = np.zeros(len(coarse.vertices), dtype=np.asarray(v).dtype)
    full[coarse.interior] = v
    pts = fine.interior_nodes / coarse.h
    if coarse.dimension == 1:
        return np.interp(pts[:, 0], np.arange(coarse.n + 1), full)
    n = coarse.n
    i = np.minimum(np.floor(pts[:, 0]).astype(int), n - 1)
    j = np.minimum(np.floor(pts[:, 1]).astype(int), n - 1)
    xi, eta = pts[:, 0] - i, pts[:, 1] - j
    v00 = full[i + (n + 1) * j]
    v10 = full[i + 1 + (n + 1) * j]
    v01 = full[i + (n + 1) * (j + 1)]
    v11 = full[i + 1 + (n + 1) * (j + 1)]
    lower = xi >= eta
    return np.where(
        lower,
        v00 + xi * (v10 - v00) + eta * (v11 - v10),
        v00 + eta * (v01 - v00) + xi * (v11 - v01),
    )

"""Numerical examples, reference caching and convergence tables."""
from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import cim, fem
from .contour import DEFAULT_T0, DEFAULT_THETA, FractionalOrders, make_plan
from .errors import CacheCorrupt, MissingReference
from .fem import BoxIndicator
from .symbol import PowerLawSource, PowerTerm, transform_source

CASE_IDS = (
    "scalar_ex1",
    "homog_1d_ex2",
    "homog_2d_ex2",
    "nonhomog_1d_ex3",
    "nonhomog_2d_ex3",
    "nonsmooth_1d_ex4",
)
WINDOW_SAMPLES = 16
CACHE_VERSION = "v1"

# solves spent on reference generation (a subset of cim.solve_counter)
reference_counter = cim.SolveCounter()
_SQRT_PI_15 = 1.5 * math.sqrt(math.pi)


def _bubble(x, *rest):
    return x * (1.0 - x)


def example1_source(orders):
    a, b = orders.alpha, orders.beta
    c = _SQRT_PI_15
    return PowerLawSource.of(
        (1.0, 1.0, 0.0),
        (1.0, c, 1.0),
        (1.0, c / math.gamma(2.0 - b), 1.0 - b),
        (1.0, 1.0 / math.gamma(a + 1.0), a),
        (1.0, c / math.gamma(a + 2.0), a + 1.0),
    )


def example3_source(orders):
    a, b = orders.alpha, orders.beta
    return PowerLawSource.of(
        (_bubble, 1.0 / math.gamma(2.0 - b), 1.0 - b),
        (1.0, 2.0, 1.0),
        (1.0, 2.0 / math.gamma(a + 2.0), a + 1.0),
    )


def example4_source(orders):
    """Source for u = 1 + t**(1/6) x(1-x), including the standalone constant 1."""
    a, b = orders.alpha, orders.beta
    g = math.gamma(7.0 / 6.0)
    return PowerLawSource.of(
        (1.0, 1.0, 0.0),
        (_bubble, g / math.gamma(7.0 / 6.0 - b), 1.0 / 6.0 - b),
        (1.0, 2.0, 1.0 / 6.0),
        (1.0, 2.0 * g / math.gamma(a + 7.0 / 6.0), a + 1.0 / 6.0),
    )


@dataclass(frozen=True)
class ExperimentCase:
    id: str
    orders: FractionalOrders
    dimension: int  # 0 = scalar problem with A = 1
    table_time: float
    u0: object = 0.0
    source: PowerLawSource = PowerLawSource()
    lam: float = 10.0
    t0: float = DEFAULT_T0
    theta: float = DEFAULT_THETA
    exact_solution: Callable | None = None  # (*coords, t) -> values; (t) in scalar mode
    reference_config: tuple[int, float] | None = None
    ground_truth: str = "exact"
    lift: float = 0.0  # constant added to the homogeneous-Dirichlet solution

    def __post_init__(self):
        if self.ground_truth == "exact" and self.exact_solution is None:
            raise MissingReference(f"{self.id}: no exact solution available")
        if self.ground_truth == "reference" and self.reference_config is None:
            raise MissingReference(f"{self.id}: no reference configuration available")
        if self.ground_truth not in ("exact", "reference"):
            raise ValueError(f"unknown ground truth {self.ground_truth!r}")

    @property
    def window_times(self):
        ts = np.linspace(self.t0, self.lam * self.t0, WINDOW_SAMPLES).tolist()
        close = [i for i, t in enumerate(ts) if abs(t - self.table_time) <= 1e-12]
        if close:
            ts[close[0]] = self.table_time
        else:
            ts.append(self.table_time)
        return tuple(sorted(ts))


_DEFAULT_ORDERS = {
    "scalar_ex1": (0.2, 0.77),
    "homog_1d_ex2": (0.5, 0.5),
    "homog_2d_ex2": (0.5, 0.5),
    "nonhomog_1d_ex3": (0.4, 0.25),
    "nonhomog_2d_ex3": (0.4, 0.25),
    "nonsmooth_1d_ex4": (0.25, 0.4),
}


def make_case(case_id, alpha=None, beta=None, epsilon=None, theta=DEFAULT_THETA, t0=DEFAULT_T0,
              lam=None, ground_truth=None) -> ExperimentCase:
    """Build one of the six numerical examples with concrete parameters."""
    if case_id not in _DEFAULT_ORDERS:
        raise ValueError(f"unknown case {case_id!r}; choose from {', '.join(CASE_IDS)}")
    a0, b0 = _DEFAULT_ORDERS[case_id]
    orders = FractionalOrders(a0 if alpha is None else alpha, b0 if beta is None else beta, epsilon)
    common = dict(orders=orders, theta=theta, t0=t0)
    if case_id == "scalar_ex1":
        case = ExperimentCase(
            case_id, dimension=0, table_time=0.5, u0=1.0, source=example1_source(orders),
            exact_solution=lambda t: 1.0 + _SQRT_PI_15 * t, **common)
    elif case_id == "homog_1d_ex2":
        case = ExperimentCase(
            case_id, dimension=1, table_time=0.4, u0=BoxIndicator((0.0,), (2.0 / 3.0,), math.pi ** 3),
            reference_config=(200, 2.0 ** -7), ground_truth="reference", **common)
    elif case_id == "homog_2d_ex2":
        case = ExperimentCase(
            case_id, dimension=2, table_time=0.4, u0=BoxIndicator((0.5, 0.0), (1.0, 1.0)),
            reference_config=(200, 2.0 ** -7), ground_truth="reference", **common)
    elif case_id == "nonhomog_1d_ex3":
        case = ExperimentCase(
            case_id, dimension=1, table_time=0.6, source=example3_source(orders),
            exact_solution=lambda x, t: t * x * (1.0 - x),
            reference_config=(200, 2.0 ** -9), ground_truth="reference", **common)
    elif case_id == "nonhomog_2d_ex3":
        case = ExperimentCase(
            case_id, dimension=2, table_time=0.6, source=PowerLawSource.of((1.0, 1.0, 0.0)),
            reference_config=(200, 2.0 ** -9), ground_truth="reference", **common)
    else:
        full = example4_source(orders)
        # the constant 1 in u is carried by the lift; it contributes nothing to the
        # operator, so the lifted unknown sees f - 1 and zero initial data
        case = ExperimentCase(
            case_id, dimension=1, table_time=0.5, lam=5.0,
            source=PowerLawSource(full.terms[1:]), lift=1.0,
            exact_solution=lambda x, t: 1.0 + t ** (1.0 / 6.0) * x * (1.0 - x), **common)
    overrides = {}
    if lam is not None:
        overrides["lam"] = lam
    if ground_truth is not None:
        overrides["ground_truth"] = ground_truth
    return replace(case, **overrides) if overrides else case


@dataclass
class Discretization:
    case: ExperimentCase
    mesh: fem.Mesh | None
    system: fem.FemSystem | None
    u0h: object

    @classmethod
    def build(cls, case, h=None):
        if case.dimension == 0:
            return cls(case, None, None, float(case.u0))
        mesh = fem.build_mesh(case.dimension, h)
        system = fem.assemble(mesh)
        u0h = fem.l2_project(mesh, system, case.u0)
        return cls(case, mesh, system, u0h)

    def norm(self, v):
        if self.system is None:
            return abs(float(v))
        return fem.l2_norm(self.system, v)


def run_case(case: ExperimentCase, n_nodes: int, h: float | None = None, times=None,
             threads=0, n_cheb=0, disc: Discretization | None = None):
    """Solve the case on one mesh and return TimeSamples at ``times`` (default: table time)."""
    disc = disc or Discretization.build(case, h)
    plan = make_plan(case.orders, case.theta, case.t0, case.lam, n_nodes)
    src = transform_source(case.source)
    if n_cheb:
        ns = cim.accelerate(plan, disc.system, disc.u0h, src, n_cheb, threads=threads)
    else:
        ns = cim.solve_nodes(plan, disc.system, disc.u0h, src, threads=threads)
    times = (case.table_time,) if times is None else times
    out = []
    for t in times:
        s = cim.evaluate(ns, t)
        out.append(cim.TimeSample(s.t, s.u + case.lift if case.lift else s.u))
    return out


# ----------------------------------------------------------------------------- cache

def cache_dir(path=None):
    if path:
        return Path(path)
    env = os.environ.get("CIM_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "fraccim"


def content_hash(case, n_ref, h_ref, times):
    o = case.orders
    key = "|".join([
        case.id, repr(o.alpha), repr(o.beta), repr(case.theta), repr(o.epsilon),
        repr(case.t0), repr(case.lam), str(int(n_ref)), repr(float(h_ref)),
        ",".join(repr(float(t)) for t in times),
    ])
    return hashlib.sha256(key.encode()).hexdigest()


def write_cache(path, digest, samples):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(f"#cim-cache {CACHE_VERSION} {digest}\n")
    for s in samples:
        vals = np.atleast_1d(s.u)
        buf.write(repr(float(s.t)) + "," + ",".join("%.17g" % v for v in vals) + "\n")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_cache(path, digest, scalar=False):
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CacheCorrupt(f"cannot read cache {path}: {exc}") from exc
    if not lines or lines[0].strip() != f"#cim-cache {CACHE_VERSION} {digest}":
        raise CacheCorrupt(f"{path}: bad header")
    samples = []
    width = None
    for no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        try:
            t = float(parts[0])
            vals = np.array([float(p) for p in parts[1:]])
        except ValueError as exc:
            raise CacheCorrupt(f"{path}:{no}: {exc}") from exc
        if len(vals) == 0 or (width is not None and len(vals) != width):
            raise CacheCorrupt(f"{path}:{no}: inconsistent row length")
        width = len(vals)
        samples.append(cim.TimeSample(t, float(vals[0]) if scalar else vals))
    if not samples:
        raise CacheCorrupt(f"{path}: no samples")
    return samples


def cache_path(case, n_ref, h_ref, times, cache=None):
    digest = content_hash(case, n_ref, h_ref, times)
    return cache_dir(cache) / f"{case.id}-{digest[:16]}.csv", digest


def reference_solution(case: ExperimentCase, n_ref=None, h_ref=None, times=None,
                       cache=None, threads=0, use_cache=True):
    """Reference samples at (n_ref, h_ref), read from or written to the cache.

    Returns a dict mapping t to the sample value.
    """
    if n_ref is None or h_ref is None:
        if case.reference_config is None:
            raise MissingReference(f"{case.id} has no reference configuration")
        n_ref = n_ref or case.reference_config[0]
        h_ref = h_ref or case.reference_config[1]
    times = tuple(case.window_times if times is None else times)
    path, digest = cache_path(case, n_ref, h_ref, times, cache)
    if use_cache and path.exists():
        samples = read_cache(path, digest, scalar=case.dimension == 0)
        if [s.t for s in samples] != [float(t) for t in times]:
            raise CacheCorrupt(f"{path}: time grid mismatch")
    else:
        before = cim.solve_counter.count
        samples = run_case(case, n_ref, h_ref, times, threads=threads)
        reference_counter.add(cim.solve_counter.count - before)
        if use_cache:
            write_cache(path, digest, samples)
    return {s.t: s.u for s in samples}


# ----------------------------------------------------------------------------- tables

@dataclass
class ErrorRow:
    param: float
    error: float
    order: float | None = None


@dataclass
class ErrorTable:
    rows: list[ErrorRow]
    metadata: dict = field(default_factory=dict)

    @property
    def errors(self):
        return [r.error for r in self.rows]

    @property
    def orders(self):
        return [r.order for r in self.rows[1:]]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "error", "order"])
        for r in self.rows:
            param = str(int(r.param)) if float(r.param).is_integer() else repr(float(r.param))
            w.writerow([param, "%.10e" % r.error, "" if r.order is None else "%.6f" % r.order])
        return buf.getvalue()


def with_orders(rows):
    """Fill Order = ln(E_prev/E) / ln(h_prev/h) for a refinement sequence."""
    for prev, cur in zip(rows, rows[1:]):
        if prev.error > 0.0 and cur.error > 0.0:
            cur.order = math.log(prev.error / cur.error) / math.log(prev.param / cur.param)
        else:
            cur.order = math.nan
    return rows


class _Truth:
    """Ground truth for one case at given times on a given discretization."""

    def __init__(self, case, cache=None, threads=0, n_ref=None, h_ref=None):
        self.case = case
        self.cache = cache
        self.threads = threads
        self.n_ref = n_ref
        self.h_ref = h_ref
        self._ref = None
        self._ref_disc = None

    def reference(self, times):
        if self._ref is None:
            cfg = self.case.reference_config or (None, None)
            n_ref = self.n_ref or cfg[0]
            h_ref = self.h_ref or cfg[1]
            if n_ref is None or (self.case.dimension and h_ref is None):
                raise MissingReference(f"{self.case.id}: no reference configuration")
            self._ref = reference_solution(self.case, n_ref, h_ref, times, self.cache, self.threads)
            self._ref_disc = Discretization.build(self.case, h_ref)
        return self._ref, self._ref_disc

    def errors(self, disc, samples):
        """Errors of ``samples`` (computed on ``disc``) against the ground truth."""
        case = self.case
        if case.ground_truth == "exact":
            out = []
            for s in samples:
                if disc.mesh is None:
                    truth = case.exact_solution(s.t)
                else:
                    truth = fem.interpolate(disc.mesh, lambda *x: case.exact_solution(*x, s.t))
                out.append(disc.norm(s.u - truth))
            return out
        ref, ref_disc = self.reference([s.t for s in samples])
        out = []
        for s in samples:
            truth = ref[s.t]
            if disc.mesh is None:
                out.append(abs(s.u - truth))
                continue
            u = s.u
            if disc.mesh.n == ref_disc.mesh.n:
                out.append(disc.norm(u - truth))
            elif disc.mesh.n < ref_disc.mesh.n:
                out.append(ref_disc.norm(fem.prolong(disc.mesh, u, ref_disc.mesh) - truth))
            else:
                out.append(disc.norm(u - fem.prolong(ref_disc.mesh, truth, disc.mesh)))
        return out


def temporal_error_table(case: ExperimentCase, n_values, h=None, cache=None, threads=0,
                         n_ref=None, h_ref=None):
    """Err_tau(N) at the table time and its maximum over the window.

    Returns ``(table_at_t, table_window_max)``.
    """
    if case.dimension and h is None:
        h = case.reference_config[1] if case.reference_config else None
    truth = _Truth(case, cache, threads, n_ref=n_ref, h_ref=h_ref or h)
    disc = Discretization.build(case, h)
    times = case.window_times
    i_table = times.index(case.table_time)
    at_t, window = [], []
    for n in n_values:
        samples = run_case(case, n, h, times, threads=threads, disc=disc)
        errs = truth.errors(disc, samples)
        at_t.append(ErrorRow(n, errs[i_table]))
        window.append(ErrorRow(n, max(errs)))
    meta = dict(case=case.id, alpha=case.orders.alpha, beta=case.orders.beta, t=case.table_time,
                lam=case.lam, h=h, ground_truth=case.ground_truth)
    return ErrorTable(at_t, meta), ErrorTable(window, dict(meta, t="window-max"))


def default_spatial_reference(case, h_values):
    return min(h_values) / (8 if case.dimension == 1 else 2)


def spatial_error_table(case: ExperimentCase, h_values, n_nodes=200, cache=None, threads=0,
                        h_ref=None, n_ref=None):
    """Err_h at the table time for each mesh size, with observed orders."""
    h_values = sorted(h_values, reverse=True)
    if case.ground_truth == "reference" and h_ref is None:
        h_ref = default_spatial_reference(case, h_values)
    truth = _Truth(case, cache, threads, n_ref=n_ref or n_nodes, h_ref=h_ref)
    rows = []
    for h in h_values:
        disc = Discretization.build(case, h)
        samples = run_case(case, n_nodes, h, (case.table_time,), threads=threads, disc=disc)
        rows.append(ErrorRow(h, truth.errors(disc, samples)[0]))
    meta = dict(case=case.id, alpha=case.orders.alpha, beta=case.orders.beta, t=case.table_time,
                lam=case.lam, N=n_nodes, h_ref=h_ref, ground_truth=case.ground_truth)
    return ErrorTable(with_orders(rows), meta)


def fitted_decay_rate(n_values, errors, floor=1e-13):
    """Least-squares slope of log10(error) vs N over the rows above ``floor``."""
    pts = [(n, math.log10(e)) for n, e in zip(n_values, errors) if e > floor]
    if len(pts) < 2:
        raise ValueError("need at least two pre-plateau points")
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])

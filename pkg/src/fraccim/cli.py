"""Command-line front end.

    fraccim solve --case scalar_ex1 --N 60 --t 0.5
    fraccim table-temporal --case homog_1d_ex2 --alpha 0.5 --beta 0.5 --N-list 20,40,60
    fraccim table-spatial --case homog_1d_ex2 --h-list 1/32,1/64,1/128,1/256 --N 200
    fraccim reference --case homog_2d_ex2
    fraccim check

Exit status: 0 ok, 1 other library error, 2 usage, 3 solve failure, 4 cache.
Failures print one JSON line ``{"error": ..., "exit_code": ..., "message": ...}``
to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import checks, cim, experiments
from .contour import DEFAULT_T0, DEFAULT_THETA
from .errors import CimError, UsageError

COMMANDS = ("solve", "table-temporal", "table-spatial", "reference", "check")


@dataclass
class RunConfig:
    command: str
    case: str | None = None
    alpha: float | None = None
    beta: float | None = None
    epsilon: float | None = None
    theta: float = DEFAULT_THETA
    t0: float = DEFAULT_T0
    lam: float | None = None
    n_nodes: int | None = None
    n_list: list[int] = field(default_factory=list)
    n_cheb: int = 0
    h: float | None = None
    h_list: list[float] = field(default_factory=list)
    h_ref: float | None = None
    times: list[float] = field(default_factory=list)
    metric: str = "table-time"
    output: str | None = None
    cache_dir: str | None = None
    threads: int = 0
    ground_truth: str | None = None
    verbose: bool = False


def parse_real(text):
    """Parse a real number, accepting fractions such as ``1/32``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from exc


def _list_of(conv):
    def parse(text):
        return [conv(p) for p in text.split(",") if p.strip()]
    return parse


def _positive_int(text):
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# (flag, dest, type, help); shared by the command line and config files
_OPTIONS = [
    ("--case", "case", str, "example id: " + ", ".join(experiments.CASE_IDS)),
    ("--alpha", "alpha", parse_real, "memory-kernel order in (0, 1)"),
    ("--beta", "beta", parse_real, "Caputo order in (0, 1)"),
    ("--epsilon", "epsilon", parse_real, "sector slack in (0, 1)"),
    ("--theta", "theta", parse_real, "contour angle"),
    ("--t0", "t0", parse_real, "window start"),
    ("--lambda", "lam", parse_real, "window ratio, t in [t0, lambda*t0]"),
    ("--N", "n_nodes", _positive_int, "quadrature nodes"),
    ("--N-list", "n_list", _list_of(_positive_int), "comma-separated node counts"),
    ("--n-cheb", "n_cheb", _positive_int, "Chebyshev degree for acceleration (0 = off)"),
    ("--h", "h", parse_real, "mesh size, e.g. 1/128"),
    ("--h-list", "h_list", _list_of(parse_real), "comma-separated mesh sizes"),
    ("--h-ref", "h_ref", parse_real, "reference mesh size"),
    ("--t", "times", _list_of(parse_real), "comma-separated evaluation times"),
    ("--metric", "metric", str, "temporal table metric: table-time or window"),
    ("--output", "output", str, "output CSV path (default: stdout)"),
    ("--cache-dir", "cache_dir", str, "reference cache directory"),
    ("--threads", "threads", _positive_int, "parallel node solves (0 = all cores)"),
]
_BY_KEY = {flag.lstrip("-"): (dest, conv) for flag, dest, conv, _ in _OPTIONS}
_BY_KEY.update({dest: (dest, conv) for _, dest, conv, _ in _OPTIONS})


def build_parser():
    p = _Parser(prog="fraccim", description="Contour-integral solver for time-fractional problems.")
    p.add_argument("command", choices=COMMANDS)
    for flag, dest, conv, help_ in _OPTIONS:
        p.add_argument(flag, dest=dest, type=conv, default=None, help=help_)
    truth = p.add_mutually_exclusive_group()
    truth.add_argument("--exact", dest="ground_truth", action="store_const", const="exact",
                       help="measure errors against the exact solution")
    truth.add_argument("--reference", dest="ground_truth", action="store_const", const="reference",
                       help="measure errors against the cached reference solution")
    p.add_argument("--config", help="file of key=value lines; command-line flags take precedence")
    p.add_argument("--verbose", action="store_true", help="report solve counts on stderr")
    return p


def read_config_file(path):
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _BY_KEY:
            raise UsageError(f"{path}:{no}: expected key=value with a known key, got {raw!r}")
        dest, conv = _BY_KEY[key]
        try:
            values[dest] = conv(value.strip())
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"{path}:{no}: {exc}") from exc
    return values


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    merged = read_config_file(ns.config) if ns.config else {}
    merged.update({k: v for k, v in vars(ns).items() if v is not None and k != "config"})
    cfg = RunConfig(**{k: v for k, v in merged.items() if k in RunConfig.__dataclass_fields__})
    if cfg.command != "check" and not cfg.case:
        raise UsageError(f"{cfg.command} requires --case")
    if cfg.case is not None and cfg.case not in experiments.CASE_IDS:
        raise UsageError(f"unknown case {cfg.case!r}; choose from {', '.join(experiments.CASE_IDS)}")
    if cfg.metric not in ("table-time", "window"):
        raise UsageError(f"--metric must be table-time or window, got {cfg.metric!r}")
    if cfg.command == "table-temporal" and not cfg.n_list:
        raise UsageError("table-temporal requires --N-list")
    if cfg.command == "table-spatial" and not cfg.h_list:
        raise UsageError("table-spatial requires --h-list")
    if cfg.n_cheb < 0 or cfg.threads < 0 or (cfg.n_nodes is not None and cfg.n_nodes < 1):
        raise UsageError("--N must be positive; --n-cheb and --threads must be non-negative")
    return cfg


def _case(cfg):
    return experiments.make_case(cfg.case, cfg.alpha, cfg.beta, cfg.epsilon, cfg.theta, cfg.t0,
                                 cfg.lam, cfg.ground_truth)


def _emit(cfg, text):
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _solution_csv(case, disc, samples):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if disc.mesh is None:
        w.writerow(["t", "u"])
        for s in samples:
            w.writerow([repr(s.t), "%.17g" % s.u])
        return buf.getvalue()
    mesh = disc.mesh
    coords = ["x", "y"][: mesh.dimension]
    w.writerow(["t", *coords, "u"])
    for s in samples:
        full = np.full(len(mesh.vertices), case.lift)
        full[mesh.interior] = s.u
        for v, val in zip(mesh.vertices, full):
            w.writerow([repr(s.t), *("%.17g" % c for c in np.atleast_1d(v)), "%.17g" % val])
    return buf.getvalue()


def _solve(cfg):
    case = _case(cfg)
    h = cfg.h if cfg.h is not None else (case.reference_config[1] if case.reference_config else 2.0 ** -7)
    disc = experiments.Discretization.build(case, h)
    times = cfg.times or [case.table_time]
    samples = experiments.run_case(case, cfg.n_nodes or 60, h, times, cfg.threads, cfg.n_cheb, disc)
    _emit(cfg, _solution_csv(case, disc, samples))


def _table_temporal(cfg):
    case = _case(cfg)
    at_t, window = experiments.temporal_error_table(
        case, cfg.n_list, cfg.h, cfg.cache_dir, cfg.threads, h_ref=cfg.h_ref)
    _emit(cfg, (window if cfg.metric == "window" else at_t).to_csv())


def _table_spatial(cfg):
    case = _case(cfg)
    table = experiments.spatial_error_table(
        case, cfg.h_list, cfg.n_nodes or 200, cfg.cache_dir, cfg.threads, h_ref=cfg.h_ref)
    _emit(cfg, table.to_csv())


def _reference(cfg):
    case = _case(cfg)
    cfg_n, cfg_h = case.reference_config or (None, None)
    n_ref, h_ref = cfg.n_nodes or cfg_n, cfg.h or cfg_h
    if n_ref is None or (case.dimension and h_ref is None):
        raise UsageError(f"{case.id} has no reference configuration; pass --N and --h")
    times = tuple(cfg.times) if cfg.times else None
    experiments.reference_solution(case, n_ref, h_ref, times, cfg.cache_dir, cfg.threads)
    path, _ = experiments.cache_path(case, n_ref, h_ref, times or case.window_times, cfg.cache_dir)
    print(path)


def _check(cfg):
    ok = True
    for r in checks.run_all():
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
        ok &= r.passed
    return 0 if ok else 1


_DISPATCH = {
    "solve": _solve,
    "table-temporal": _table_temporal,
    "table-spatial": _table_spatial,
    "reference": _reference,
    "check": _check,
}


def dispatch(cfg: RunConfig) -> int:
    cim.solve_counter.reset()
    experiments.reference_counter.reset()
    status = _DISPATCH[cfg.command](cfg) or 0
    if cfg.verbose:
        print(f"solves={cim.solve_counter.count} reference_solves={experiments.reference_counter.count}",
              file=sys.stderr)
    return status


def _fail(exc):
    code = getattr(exc, "exit_code", 1)
    print(json.dumps({"error": type(exc).__name__, "exit_code": code, "message": str(exc)}),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        if not cfg.verbose:
            warnings.simplefilter("ignore")
        return dispatch(cfg)
    except CimError as exc:
        return _fail(exc)
    except ValueError as exc:
        # argument values the library rejects (e.g. an unknown case)
        exc.exit_code = 2
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())

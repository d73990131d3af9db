"""Contour-integral solver for time-fractional integro-differential equations."""
from .contour import FractionalOrders, ContourPlan, make_plan, nodes
from .symbol import PowerLawSource, PowerTerm, kernel, transform_source
from .cim import accelerate, evaluate, solve_nodes
from .errors import CimError

__all__ = [
    "FractionalOrders", "ContourPlan", "make_plan", "nodes",
    "PowerLawSource", "PowerTerm", "kernel", "transform_source",
    "accelerate", "evaluate", "solve_nodes", "CimError",
]

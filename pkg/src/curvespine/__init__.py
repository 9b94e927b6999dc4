"""Resolution graphs, radius-zero Milnor fibers and gradient spines of
plane curve singularities."""

from .algebra import BivariatePoly, FieldTower, UniPoly
from .fiber0 import fiber_model
from .flow import FlowConfig, phi0_criticals, spine_workflow, \
    trace_invariant_spine, trace_to_curve
from .invariants import analyze, compute_invariants
from .parser import ParseError, parse_poly, to_text
from .resolution import resolve_min, resolve_pol

__version__ = "0.1.0"

__all__ = ["BivariatePoly", "FieldTower", "FlowConfig", "ParseError",
           "UniPoly", "analyze", "compute_invariants", "fiber_model",
           "parse_poly", "phi0_criticals", "resolve_min", "resolve_pol",
           "spine_workflow", "to_text", "trace_invariant_spine",
           "trace_to_curve"]

"""Independence numbers and maximum independent sets of flag Kneser graphs."""

from .core import ParameterError, count_flags, dual_type, enumerate_flags, make_type
from .graph import FlagGraph, ResourceError, build_graph, is_bipartite
from .solver import Budget, SolveResult, alpha_exact, enumerate_maximum, omega_exact
from .families import FamilySpec, build_family, family_members, family_size, f_max, optimal_shift
from .bounds import AlphaVerdict, BoundReport, DispatchConfig, alpha_dispatch
from .symmetry import SymmetryGroupSpec, are_equivalent, classify
from .slices import SliceResult, slice_classes

__version__ = "0.1.0"

__all__ = [
    "AlphaVerdict", "BoundReport", "Budget", "DispatchConfig", "FamilySpec", "FlagGraph",
    "ParameterError", "ResourceError", "SliceResult", "SolveResult", "SymmetryGroupSpec",
    "alpha_dispatch",
    "alpha_exact", "are_equivalent", "build_family", "build_graph", "classify", "count_flags",
    "dual_type", "enumerate_flags", "enumerate_maximum", "f_max", "family_members", "family_size",
    "is_bipartite", "make_type", "omega_exact", "optimal_shift", "slice_classes",
]

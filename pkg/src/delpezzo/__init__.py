"""Combinatorial intersection theory for boundary divisors on rational
surfaces: weighted dual graphs, chain calculus, singularity classification,
birational moves, and the parametric families behind the classification of
low-rank log del Pezzo fibrations."""

from .chains import adjoint, disc, is_admissible, star, transpose
from .graphs import WeightedGraph, chain_graph, fork_graph
from .notation import format_type, parse_chain, parse_type

__all__ = [
    "WeightedGraph",
    "adjoint",
    "chain_graph",
    "disc",
    "fork_graph",
    "format_type",
    "is_admissible",
    "parse_chain",
    "parse_type",
    "star",
    "transpose",
]

__version__ = "0.1.0"

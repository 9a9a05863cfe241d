"""Fractional DP-coloring toolkit: covers, exact solvers, random-cover bounds,
the random greedy fractional coloring, and high-girth constructions."""

from .covers import Cover, from_list_assignment, h_sigma, normalize, random_cover, validate
from .graphs import Digraph, Graph
from .solver import find_h_coloring, max_uniform_fraction, theta_dp, theta_dp_cycle

__all__ = [
    "Cover",
    "Digraph",
    "Graph",
    "find_h_coloring",
    "from_list_assignment",
    "h_sigma",
    "max_uniform_fraction",
    "normalize",
    "random_cover",
    "theta_dp",
    "theta_dp_cycle",
    "validate",
]
